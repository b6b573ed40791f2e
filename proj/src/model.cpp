#include "matchup/model.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "matchup/rng.hpp"

namespace matchup {

using ordered_json = nlohmann::ordered_json;

std::string_view variant_name(Variant v) {
    switch (v) {
        case Variant::P: return "P";
        case Variant::PB: return "PB";
        case Variant::PBR: return "PBR";
        case Variant::BR: return "BR";
    }
    throw std::logic_error("variant_name: bad variant");
}

Variant variant_from_name(std::string_view s) {
    if (s == "P") return Variant::P;
    if (s == "PB") return Variant::PB;
    if (s == "PBR") return Variant::PBR;
    if (s == "BR") return Variant::BR;
    throw std::invalid_argument("unknown model variant '" + std::string(s) +
                                "' (expected P, PB, PBR, or BR)");
}

void FitConfig::validate() const {
    sampler.validate();
    if (chains < 1 || chains > 4)
        throw std::invalid_argument("chains must be in 1..4");
    if (min_pa < 0) throw std::invalid_argument("min_pa must be >= 0");
    if (min_steal_opps < 0)
        throw std::invalid_argument("min_steal_opps must be >= 0");
    if (steal_groups < 1)
        throw std::invalid_argument("steal_groups must be >= 1");
    if (!(table_smoothing >= 0.0))
        throw std::invalid_argument("table_smoothing must be >= 0");
}

PlayerParams MatchupModel::pitcher_params(const std::string& id) const {
    auto it = pitchers.find(id);
    if (it != pitchers.end()) return it->second.params();
    PlayerParams p;
    for (int i = 0; i < kNumOutcomes; ++i) {
        p.base[i] = clamp_prob(pitcher_priors.base[i].mean());
        p.offset[i] = pitcher_priors.offset[i].mean();
    }
    return p;
}

PlayerParams MatchupModel::batter_params(const std::string& id) const {
    auto it = batters.find(id);
    if (it != batters.end()) return it->second.params();
    PlayerParams p;
    for (int i = 0; i < kNumOutcomes; ++i) {
        p.base[i] = clamp_prob(batter_priors.base[i].mean());
        p.offset[i] = batter_priors.offset[i].mean();
    }
    return p;
}

Simplex9 MatchupModel::predict(const std::string& pitcher_id,
                               const std::string& batter_id, int batting_order,
                               Handedness h) const {
    if (batting_order < 1 || batting_order > 9)
        throw std::invalid_argument("batting_order outside 1..9");
    PlayerParams pit = pitcher_params(pitcher_id);
    if (!parametric_batters())
        return outcome_distribution(pit, order.at(batting_order, h),
                                    league.at(h), weights, h);
    return outcome_distribution(pit, batter_params(batter_id), league.at(h),
                                weights, h);
}

const TransitionTable& MatchupModel::transition_table(
    const std::string& batter_id) const {
    if (!steal) return league_table;
    if (!materialized_)
        throw std::logic_error("model tables not materialized");
    auto it = batter_tables_.find(batter_id);
    return it != batter_tables_.end() ? it->second : default_table_;
}

void MatchupModel::materialize_tables() {
    batter_tables_.clear();
    if (steal) {
        for (const auto& [id, w] : steal->batter_weights)
            batter_tables_.emplace(id,
                                   batter_transition_table(w, steal->group_tables));
        default_table_ =
            batter_transition_table(steal->default_weights, steal->group_tables);
    }
    materialized_ = true;
}

namespace {

void average_posteriors(std::map<std::string, PlayerPosterior>& acc,
                        const std::map<std::string, PlayerPosterior>& part,
                        std::map<std::string, int>& counts) {
    for (const auto& [id, pp] : part) {
        PlayerPosterior& a = acc[id];
        for (int i = 0; i < kNumOutcomes; ++i) {
            a.base_mean[i] += pp.base_mean[i];
            a.base_sd[i] += pp.base_sd[i];
            a.offset_mean[i] += pp.offset_mean[i];
            a.offset_sd[i] += pp.offset_sd[i];
        }
        counts[id] += 1;
    }
}

void divide_posteriors(std::map<std::string, PlayerPosterior>& acc,
                       const std::map<std::string, int>& counts) {
    for (auto& [id, pp] : acc) {
        double n = static_cast<double>(counts.at(id));
        for (int i = 0; i < kNumOutcomes; ++i) {
            pp.base_mean[i] /= n;
            pp.base_sd[i] /= n;
            pp.offset_mean[i] /= n;
            pp.offset_sd[i] /= n;
        }
    }
}

std::string hex64(std::uint64_t x) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx",
                  static_cast<unsigned long long>(x));
    return std::string(buf);
}

std::string dtos(double x) {
    std::ostringstream os;
    os.precision(17);
    os << x;
    return os.str();
}

}  // namespace

MatchupModel fit_variant(Variant v,
                         const std::vector<PlateAppearanceRecord>& records,
                         const FitConfig& cfg,
                         const std::vector<StealCounts>& steals) {
    cfg.validate();
    if (records.empty()) throw InsufficientDataError("no records to fit");
    if (v == Variant::BR && steals.empty())
        throw std::invalid_argument(
            "BR variant requires steal opportunity data");

    MatchupModel m;
    m.variant = v;
    m.league = league_rates(records);
    m.order = batting_order_rates(records, m.league);
    m.league_table = league_transition_table(records);
    m.pitcher_priors = fit_priors(summarize_pitchers(records), cfg.min_pa);
    if (v == Variant::P) {
        m.batter_priors = m.pitcher_priors;
        PosteriorSummary s = sample_posterior(records, m.pitcher_priors,
                                              cfg.sampler,
                                              ModelStructure::PitcherOnly);
        m.pitchers = std::move(s.pitchers);
        m.weights = s.weights;
        m.diagnostics = {s.acceptance_rate, s.effective_samples};
    } else if (v == Variant::PB) {
        m.batter_priors = fit_priors(summarize_batters(records), cfg.min_pa);
        PosteriorSummary s = sample_posterior(
            records, m.pitcher_priors, cfg.sampler,
            ModelStructure::PitcherBatter, {}, {}, &m.batter_priors);
        m.pitchers = std::move(s.pitchers);
        m.batters = std::move(s.batters);
        m.weights = s.weights;
        m.diagnostics = {s.acceptance_rate, s.effective_samples};
    } else {
        m.batter_priors = fit_priors(summarize_batters(records), cfg.min_pa);
        auto chains = chain_datasets(records);
        std::map<std::string, int> pc, bc;
        Simplex9 wp{}, wb{};
        double acc = 0.0, ess = 0.0;
        for (int j = 0; j < cfg.chains; ++j) {
            SamplerConfig sc = cfg.sampler;
            sc.seed = mix64(cfg.sampler.seed, 0xC8A15ULL,
                            static_cast<std::uint64_t>(j));
            PosteriorSummary s = sample_posterior(
                chains[j], m.pitcher_priors, sc, ModelStructure::PitcherBatter,
                {}, {}, &m.batter_priors);
            average_posteriors(m.pitchers, s.pitchers, pc);
            average_posteriors(m.batters, s.batters, bc);
            for (int i = 0; i < kNumOutcomes; ++i) {
                wp[i] += s.weights.pitcher[i];
                wb[i] += s.weights.batter[i];
            }
            acc += s.acceptance_rate;
            ess += s.effective_samples;
        }
        divide_posteriors(m.pitchers, pc);
        divide_posteriors(m.batters, bc);
        double nc = static_cast<double>(cfg.chains);
        for (int i = 0; i < kNumOutcomes; ++i) {
            m.weights.pitcher[i] = wp[i] / nc;
            m.weights.batter[i] = wb[i] / nc;
        }
        m.diagnostics = {acc / nc, ess / nc};
    }

    if (v == Variant::BR) {
        StealModel sm;
        sm.prior = fit_steal_prior(steals, cfg.min_steal_opps);
        std::map<std::string, StealCounts> by_id;
        for (const auto& s : steals) by_id[s.batter_id] = s;
        std::set<std::string> batter_ids;
        for (const auto& rec : records) batter_ids.insert(rec.batter_id);
        auto profile_of = [&](const std::string& id) {
            StealProfile prof;
            prof.prior = sm.prior;
            auto it = by_id.find(id);
            if (it != by_id.end()) {
                prof.opportunities = it->second.opportunities;
                prof.steals = it->second.steals;
            }
            return prof;
        };
        std::map<std::string, double> rates;
        for (const auto& id : batter_ids)
            rates[id] = profile_of(id).posterior_rate();
        GroupedTables gt = build_group_tables(records, rates, cfg.steal_groups,
                                              cfg.table_smoothing);
        sm.boundaries = std::move(gt.boundaries);
        sm.group_tables = std::move(gt.tables);
        for (const auto& id : batter_ids)
            sm.batter_weights[id] =
                batter_mixture_weights(profile_of(id), sm.boundaries);
        StealProfile prior_only;
        prior_only.prior = sm.prior;
        sm.default_weights = batter_mixture_weights(prior_only, sm.boundaries);
        m.steal = std::move(sm);
    }

    m.provenance["variant"] = std::string(variant_name(v));
    m.provenance["steps"] = std::to_string(cfg.sampler.steps);
    m.provenance["burn_in"] = std::to_string(cfg.sampler.burn_in);
    m.provenance["seed"] = std::to_string(cfg.sampler.seed);
    m.provenance["min_pa"] = std::to_string(cfg.min_pa);
    m.provenance["chains"] = std::to_string(cfg.chains);
    m.provenance["records"] = std::to_string(records.size());
    m.provenance["data_digest"] = hex64(fnv1a64(serialize_event_log(records)));
    if (v == Variant::BR) {
        m.provenance["min_steal_opps"] = std::to_string(cfg.min_steal_opps);
        m.provenance["steal_groups"] = std::to_string(cfg.steal_groups);
        m.provenance["table_smoothing"] = dtos(cfg.table_smoothing);
    }
    m.materialize_tables();
    return m;
}

// --------------------------------------------------------------------------
// JSON persistence.

namespace {

ordered_json vec9_json(const Simplex9& v) {
    ordered_json a = ordered_json::array();
    for (double x : v) a.push_back(x);
    return a;
}

Simplex9 json_vec9(const ordered_json& a, const char* what) {
    if (!a.is_array() || a.size() != kNumOutcomes)
        throw SchemaError(std::string("model json: ") + what +
                          " must be a 9-array");
    Simplex9 v{};
    for (int i = 0; i < kNumOutcomes; ++i) v[i] = a[i].get<double>();
    return v;
}

ordered_json priors_json(const PriorSpec& p) {
    ordered_json base = ordered_json::array();
    ordered_json off = ordered_json::array();
    for (int i = 0; i < kNumOutcomes; ++i) {
        base.push_back({p.base[i].alpha, p.base[i].beta});
        off.push_back({p.offset[i].shape, p.offset[i].rate});
    }
    return ordered_json{{"base", base}, {"offset", off}};
}

PriorSpec json_priors(const ordered_json& j) {
    if (!j.is_object() || !j.contains("base") || !j.contains("offset"))
        throw SchemaError("model json: malformed prior spec");
    PriorSpec p;
    const auto& base = j["base"];
    const auto& off = j["offset"];
    if (!base.is_array() || base.size() != kNumOutcomes || !off.is_array() ||
        off.size() != kNumOutcomes)
        throw SchemaError("model json: prior arrays must have 9 entries");
    for (int i = 0; i < kNumOutcomes; ++i) {
        p.base[i] = BetaParams{base[i][0].get<double>(),
                               base[i][1].get<double>()};
        p.offset[i] = GammaParams{off[i][0].get<double>(),
                                  off[i][1].get<double>()};
    }
    p.validate();
    return p;
}

ordered_json posterior_json(const PlayerPosterior& p) {
    return ordered_json{{"base", vec9_json(p.base_mean)},
                        {"base_sd", vec9_json(p.base_sd)},
                        {"offset", vec9_json(p.offset_mean)},
                        {"offset_sd", vec9_json(p.offset_sd)}};
}

PlayerPosterior json_posterior(const ordered_json& j) {
    PlayerPosterior p;
    p.base_mean = json_vec9(j.at("base"), "player base");
    p.base_sd = json_vec9(j.at("base_sd"), "player base_sd");
    p.offset_mean = json_vec9(j.at("offset"), "player offset");
    p.offset_sd = json_vec9(j.at("offset_sd"), "player offset_sd");
    return p;
}

ordered_json table_json(const TransitionTable& t) {
    ordered_json rows = ordered_json::array();
    for (int s = 0; s < BaseOutState::kStates; ++s) {
        for (int oi = 0; oi < kNumOutcomes; ++oi) {
            ordered_json row = ordered_json::array();
            for (const auto& e :
                 t.row_support(s, static_cast<Outcome>(oi))) {
                row.push_back({static_cast<int>(e.succ_index),
                               static_cast<int>(e.runs), e.prob});
            }
            rows.push_back(std::move(row));
        }
    }
    return rows;
}

TransitionTable json_table(const ordered_json& rows) {
    if (!rows.is_array() || rows.size() != TransitionTable::kRows)
        throw SchemaError("model json: transition table must have 216 rows");
    TransitionTable t;
    int r = 0;
    for (const auto& row : rows) {
        int s = r / kNumOutcomes;
        Outcome o = static_cast<Outcome>(r % kNumOutcomes);
        if (!row.is_array())
            throw SchemaError("model json: table row must be an array");
        for (const auto& e : row) {
            if (!e.is_array() || e.size() != 3)
                throw SchemaError("model json: table entry must be a triple");
            int succ = e[0].get<int>();
            int runs = e[1].get<int>();
            double prob = e[2].get<double>();
            if (succ < 0 || succ > BaseOutState::kTerminalIndex || runs < 0 ||
                runs > kMaxRunsPerPa || !(prob >= 0.0))
                throw SchemaError("model json: table entry out of range");
            t.cell(s, o, succ, runs) = prob;
        }
        ++r;
    }
    try {
        t.finalize();
    } catch (const std::logic_error& e) {
        throw SchemaError(std::string("model json: ") + e.what());
    }
    std::string err = t.validate();
    if (!err.empty()) throw SchemaError("model json: " + err);
    return t;
}

ordered_json rates_json(const LeagueRates& r) {
    return ordered_json{{"opposite", vec9_json(r.by_hand[0])},
                        {"same", vec9_json(r.by_hand[1])}};
}

LeagueRates json_rates(const ordered_json& j) {
    LeagueRates r;
    r.by_hand[0] = json_vec9(j.at("opposite"), "league opposite");
    r.by_hand[1] = json_vec9(j.at("same"), "league same");
    return r;
}

ordered_json order_json(const OrderRates& o) {
    ordered_json opp = ordered_json::array(), same = ordered_json::array();
    for (int k = 0; k < 9; ++k) {
        opp.push_back(vec9_json(o.by_order[k][0]));
        same.push_back(vec9_json(o.by_order[k][1]));
    }
    return ordered_json{{"opposite", opp}, {"same", same}};
}

OrderRates json_order(const ordered_json& j) {
    OrderRates o;
    const auto& opp = j.at("opposite");
    const auto& same = j.at("same");
    if (!opp.is_array() || opp.size() != 9 || !same.is_array() ||
        same.size() != 9)
        throw SchemaError("model json: order tables must have 9 rows");
    for (int k = 0; k < 9; ++k) {
        o.by_order[k][0] = json_vec9(opp[k], "order row");
        o.by_order[k][1] = json_vec9(same[k], "order row");
    }
    return o;
}

}  // namespace

std::string model_to_json(const MatchupModel& m) {
    ordered_json j;
    j["format"] = "matchup-model";
    j["version"] = 1;
    j["variant"] = std::string(variant_name(m.variant));
    j["provenance"] = m.provenance;
    j["diagnostics"] = ordered_json{
        {"acceptance_rate", m.diagnostics.acceptance_rate},
        {"effective_samples", m.diagnostics.effective_samples}};
    j["weights"] = ordered_json{{"pitcher", vec9_json(m.weights.pitcher)},
                                {"batter", vec9_json(m.weights.batter)}};
    j["league"] = rates_json(m.league);
    j["order"] = order_json(m.order);
    j["pitcher_priors"] = priors_json(m.pitcher_priors);
    j["batter_priors"] = priors_json(m.batter_priors);
    ordered_json pit = ordered_json::object();
    for (const auto& [id, pp] : m.pitchers) pit[id] = posterior_json(pp);
    j["pitchers"] = std::move(pit);
    ordered_json bat = ordered_json::object();
    for (const auto& [id, pp] : m.batters) bat[id] = posterior_json(pp);
    j["batters"] = std::move(bat);
    j["league_table"] = table_json(m.league_table);
    if (m.steal) {
        ordered_json s;
        s["prior"] = {m.steal->prior.alpha, m.steal->prior.beta};
        s["boundaries"] = m.steal->boundaries;
        ordered_json gts = ordered_json::array();
        for (const auto& t : m.steal->group_tables) gts.push_back(table_json(t));
        s["group_tables"] = std::move(gts);
        ordered_json bw = ordered_json::object();
        for (const auto& [id, w] : m.steal->batter_weights) bw[id] = w;
        s["batter_weights"] = std::move(bw);
        s["default_weights"] = m.steal->default_weights;
        j["steal"] = std::move(s);
    }
    return j.dump(2) + "\n";
}

MatchupModel model_from_json(const std::string& text) {
    ordered_json j = ordered_json::parse(text, nullptr, false);
    if (j.is_discarded()) throw SchemaError("model json: parse error");
    if (!j.is_object() || j.value("format", "") != "matchup-model")
        throw SchemaError("model json: not a matchup-model document");
    if (j.value("version", 0) != 1)
        throw SchemaError("model json: unsupported version");
    try {
        MatchupModel m;
        m.variant = variant_from_name(j.at("variant").get<std::string>());
        if (j.contains("provenance"))
            m.provenance =
                j["provenance"].get<std::map<std::string, std::string>>();
        const auto& d = j.at("diagnostics");
        m.diagnostics.acceptance_rate = d.at("acceptance_rate").get<double>();
        m.diagnostics.effective_samples =
            d.at("effective_samples").get<double>();
        m.weights.pitcher = json_vec9(j.at("weights").at("pitcher"),
                                      "pitcher weights");
        m.weights.batter = json_vec9(j.at("weights").at("batter"),
                                     "batter weights");
        m.league = json_rates(j.at("league"));
        m.order = json_order(j.at("order"));
        m.pitcher_priors = json_priors(j.at("pitcher_priors"));
        m.batter_priors = json_priors(j.at("batter_priors"));
        for (const auto& [id, pp] : j.at("pitchers").items())
            m.pitchers[id] = json_posterior(pp);
        for (const auto& [id, pp] : j.at("batters").items())
            m.batters[id] = json_posterior(pp);
        m.league_table = json_table(j.at("league_table"));
        if (j.contains("steal")) {
            StealModel sm;
            const auto& s = j["steal"];
            sm.prior = BetaParams{s.at("prior")[0].get<double>(),
                                  s.at("prior")[1].get<double>()};
            sm.boundaries = s.at("boundaries").get<std::vector<double>>();
            for (const auto& t : s.at("group_tables"))
                sm.group_tables.push_back(json_table(t));
            for (const auto& [id, w] : s.at("batter_weights").items())
                sm.batter_weights[id] = w.get<GroupWeights>();
            sm.default_weights =
                s.at("default_weights").get<GroupWeights>();
            m.steal = std::move(sm);
        }
        m.materialize_tables();
        return m;
    } catch (const ordered_json::exception& e) {
        throw SchemaError(std::string("model json: ") + e.what());
    } catch (const std::invalid_argument& e) {
        throw SchemaError(std::string("model json: ") + e.what());
    }
}

void save_model(const MatchupModel& m, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write model file: " + path);
    out << model_to_json(m);
    if (!out) throw std::runtime_error("failed writing model file: " + path);
}

MatchupModel load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open model file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return model_from_json(buf.str());
}

std::uint64_t fnv1a64(std::string_view data) {
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char c : data) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

}  // namespace matchup
