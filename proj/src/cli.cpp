#include "matchup/cli.hpp"

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "matchup/evaluation.hpp"
#include "matchup/manager.hpp"
#include "matchup/model.hpp"

namespace matchup {

namespace {

using ordered_json = nlohmann::ordered_json;

constexpr const char* kToolVersion = "matchup 1.0.0";

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write file: " + path);
    out << content;
    if (!out) throw std::runtime_error("write failed: " + path);
}

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx",
                  static_cast<unsigned long long>(v));
    return std::string(buf);
}

std::string format_double(double x) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

using KeyValues = std::vector<std::pair<std::string, std::string>>;

// Leading comment block stamped into every CSV artifact. Deliberately free
// of timestamps and host details so reruns are byte-identical.
std::string provenance_header(const KeyValues& kv) {
    std::string out;
    for (const auto& [k, v] : kv) {
        out += "# ";
        out += k;
        out += '=';
        out += v;
        out += '\n';
    }
    return out;
}

ordered_json provenance_json(const KeyValues& kv) {
    ordered_json j = ordered_json::object();
    for (const auto& [k, v] : kv) j[k] = v;
    return j;
}

// ---------------------------------------------------------------- ingest

struct IngestOpts {
    std::string input;
    std::string output;
};

int cmd_ingest(const IngestOpts& o) {
    ParseResult pr = parse_event_log_file(o.input);
    std::cout << "records: " << pr.records.size() << "\n";
    std::cout << "rejected: " << pr.errors.size() << "\n";
    for (const auto& e : pr.errors)
        std::cout << "line " << e.line << ": " << e.message << "\n";
    if (!o.output.empty())
        write_file(o.output, serialize_event_log(pr.records));
    return pr.errors.empty() ? 0 : 1;
}

// ------------------------------------------------------------------- fit

struct FitOpts {
    std::string variant;
    std::string data;
    std::string steals;
    std::string out;
    std::uint64_t seed = 0;
    int steps = 5000;
    int burn_in = 2000;
    int chains = 4;
    long long min_pa = 100;
    long long min_steal_opps = 200;
    int steal_groups = 5;
    double smoothing = 5.0;
};

int cmd_fit(const FitOpts& o) {
    Variant v = variant_from_name(o.variant);
    if (v == Variant::BR && o.steals.empty()) {
        std::cerr << "fit: variant BR requires --steals <csv>\n";
        return 2;
    }
    ParseResult pr = parse_event_log_file(o.data);
    if (!pr.errors.empty()) {
        std::cerr << "fit: " << pr.errors.size()
                  << " invalid rows in " << o.data
                  << "; run the ingest subcommand for details\n";
        return 1;
    }
    if (pr.records.empty()) {
        std::cerr << "fit: no records in " << o.data << "\n";
        return 1;
    }
    FitConfig cfg;
    cfg.sampler.steps = o.steps;
    cfg.sampler.burn_in = o.burn_in;
    cfg.sampler.seed = o.seed;
    cfg.chains = o.chains;
    cfg.min_pa = o.min_pa;
    cfg.min_steal_opps = o.min_steal_opps;
    cfg.steal_groups = o.steal_groups;
    cfg.table_smoothing = o.smoothing;
    std::vector<StealCounts> steals;
    if (!o.steals.empty()) steals = parse_steal_csv(o.steals);
    MatchupModel model = fit_variant(v, pr.records, cfg, steals);
    model.provenance["tool_version"] = kToolVersion;
    save_model(model, o.out);
    std::cout << "model: " << o.out << "\n";
    std::cout << "records: " << pr.records.size() << "\n";
    std::cout << "acceptance_rate: "
              << format_double(model.diagnostics.acceptance_rate) << "\n";
    return 0;
}

// -------------------------------------------------------------- simulate

struct SimulateOpts {
    std::string spec;
    std::string out;
    std::string decisions;
    long long n = 100;
    std::uint64_t seed = 0;
    int workers = 1;
};

// Everything a game spec references, loaded and pinned at a stable address
// (policies keep pointers into the models and rosters).
struct LoadedGameSpec {
    Roster away;
    Roster home;
    MatchupModel away_model;
    MatchupModel home_model;
    std::unique_ptr<MatchupModel> away_belief;  // only when distinct
    std::unique_ptr<MatchupModel> home_belief;
    GameRules rules;
    EquilibriumConfig eq;
    std::unique_ptr<DecisionPolicy> away_policy;
    std::unique_ptr<DecisionPolicy> home_policy;
    std::string digest;
};

std::unique_ptr<LoadedGameSpec> load_game_spec(const std::string& path) {
    std::string text = read_file(path);
    ordered_json j = ordered_json::parse(text, nullptr, false);
    if (j.is_discarded() || !j.is_object())
        throw SchemaError("game spec: not a json object: " + path);
    namespace fs = std::filesystem;
    fs::path base = fs::path(path).parent_path();
    auto resolve = [&](const std::string& p) {
        fs::path q(p);
        return q.is_absolute() ? q.string() : (base / q).string();
    };
    auto s = std::make_unique<LoadedGameSpec>();
    try {
        s->away = load_roster(resolve(j.at("away_roster").get<std::string>()));
        s->home = load_roster(resolve(j.at("home_roster").get<std::string>()));
        s->away_model =
            load_model(resolve(j.at("away_model").get<std::string>()));
        s->home_model =
            load_model(resolve(j.at("home_model").get<std::string>()));
        if (j.contains("batters_faced_cap"))
            s->rules.batters_faced_cap = j["batters_faced_cap"].get<int>();
        if (j.contains("tournament_mode"))
            s->rules.tournament_mode = j["tournament_mode"].get<bool>();
        if (j.contains("rollouts")) s->eq.rollouts = j["rollouts"].get<int>();
        if (j.contains("tie_epsilon"))
            s->eq.tie_epsilon = j["tie_epsilon"].get<double>();

        auto make_policy =
            [&](const char* policy_key, const char* belief_key,
                const MatchupModel& own_model,
                std::unique_ptr<MatchupModel>& belief_store)
            -> std::unique_ptr<DecisionPolicy> {
            std::string name = "passive";
            if (j.contains(policy_key)) name = j[policy_key].get<std::string>();
            if (name == "passive") return std::make_unique<PassivePolicy>();
            if (name == "equilibrium") {
                const MatchupModel* belief = &own_model;
                if (j.contains(belief_key)) {
                    belief_store = std::make_unique<MatchupModel>(
                        load_model(resolve(j[belief_key].get<std::string>())));
                    belief = belief_store.get();
                }
                return std::make_unique<EquilibriumPolicy>(
                    s->away, s->home, *belief, s->eq, s->rules);
            }
            throw SchemaError("game spec: unknown policy '" + name +
                              "' (expected passive or equilibrium)");
        };
        s->away_policy = make_policy("away_policy", "away_belief",
                                     s->away_model, s->away_belief);
        s->home_policy = make_policy("home_policy", "home_belief",
                                     s->home_model, s->home_belief);
    } catch (const ordered_json::exception& e) {
        throw SchemaError(std::string("game spec: ") + e.what());
    }
    s->digest = hex64(fnv1a64(text));
    return s;
}

int cmd_simulate(const SimulateOpts& o) {
    std::unique_ptr<LoadedGameSpec> s = load_game_spec(o.spec);
    MatchSpec ms;
    ms.away = &s->away;
    ms.home = &s->home;
    ms.away_model = &s->away_model;
    ms.home_model = &s->home_model;
    ms.away_policy = s->away_policy.get();
    ms.home_policy = s->home_policy.get();
    ms.rules = s->rules;
    bool keep_full = !o.decisions.empty();
    ManyResult res =
        play_policy_match(ms, o.n, o.seed, o.workers, keep_full);
    // The worker count is scheduling only and is deliberately left out of
    // the header so it cannot break byte-identity.
    std::string prov = provenance_header({{"tool", kToolVersion},
                                          {"subcommand", "simulate"},
                                          {"spec_digest", s->digest},
                                          {"n", std::to_string(o.n)},
                                          {"seed", std::to_string(o.seed)}});
    write_file(o.out, prov + serialize_game_summaries(res.games));
    if (keep_full)
        write_file(o.decisions, prov + serialize_decision_log(res.full));
    std::cout << "games: " << o.n << "\n";
    std::cout << "away_wins: " << res.wins[kAway] << "\n";
    std::cout << "home_wins: " << res.wins[kHome] << "\n";
    return 0;
}

// -------------------------------------------------------------- evaluate

struct EvaluateOpts {
    std::vector<std::string> models;
    std::string data;
    std::string truth;
    std::string out;
};

int cmd_evaluate(const EvaluateOpts& o) {
    std::string data_text = read_file(o.data);
    std::istringstream in(data_text);
    ParseResult pr = parse_event_log(in);
    if (!pr.errors.empty()) {
        std::cerr << "evaluate: " << pr.errors.size() << " invalid rows in "
                  << o.data << "\n";
        return 1;
    }
    if (pr.records.empty()) {
        std::cerr << "evaluate: no records in " << o.data << "\n";
        return 1;
    }
    std::unique_ptr<MatchupModel> truth;
    if (!o.truth.empty())
        truth = std::make_unique<MatchupModel>(load_model(o.truth));

    KeyValues prov{{"tool", kToolVersion},
                   {"subcommand", "evaluate"},
                   {"data_digest", hex64(fnv1a64(data_text))}};
    if (!o.truth.empty()) prov.emplace_back("truth_model", o.truth);

    ordered_json out;
    out["provenance"] = provenance_json(prov);
    ordered_json models = ordered_json::object();
    for (const auto& mp : o.models) {
        MatchupModel model = load_model(mp);
        MetricReport rep = evaluate_model(model, pr.records, truth.get());
        models[mp] = ordered_json::parse(metrics_to_json(rep));
    }
    out["models"] = std::move(models);
    std::string text = out.dump(2) + "\n";
    if (o.out.empty())
        std::cout << text;
    else
        write_file(o.out, text);
    return 0;
}

// ------------------------------------------------------------------- bet

struct BetOpts {
    std::string odds;
    std::string predictions;
    std::string roi_out;
    std::string plot_out;
    std::string cushions = "0,0.015,0.03";
    double stake = 1000.0;
    int mc_samples = 10000;
    std::uint64_t seed = 0;
};

std::map<std::string, double> parse_predictions_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line))
        throw SchemaError("predictions csv: empty input");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "game_id,model_home_prob")
        throw SchemaError("predictions csv: unexpected header '" + line + "'");
    std::map<std::string, double> out;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::size_t comma = line.rfind(',');
        if (comma == std::string::npos)
            throw SchemaError("predictions csv line " +
                              std::to_string(line_no) + ": expected 2 fields");
        std::string id = line.substr(0, comma);
        std::string val = line.substr(comma + 1);
        double p = 0.0;
        auto res = std::from_chars(val.data(), val.data() + val.size(), p);
        if (res.ec != std::errc() || res.ptr != val.data() + val.size())
            throw SchemaError("predictions csv line " +
                              std::to_string(line_no) +
                              ": bad probability '" + val + "'");
        if (!out.emplace(id, p).second)
            throw SchemaError("predictions csv line " +
                              std::to_string(line_no) +
                              ": duplicate game_id '" + id + "'");
    }
    return out;
}

std::vector<double> parse_cushion_list(const std::string& text) {
    std::vector<double> out;
    std::size_t start = 0;
    while (start <= text.size()) {
        std::size_t pos = text.find(',', start);
        std::string tok = pos == std::string::npos
                              ? text.substr(start)
                              : text.substr(start, pos - start);
        double c = 0.0;
        auto res = std::from_chars(tok.data(), tok.data() + tok.size(), c);
        if (res.ec != std::errc() || res.ptr != tok.data() + tok.size() ||
            c < 0.0)
            throw std::invalid_argument("bad cushion value '" + tok + "'");
        out.push_back(c);
        if (pos == std::string::npos) break;
        start = pos + 1;
    }
    if (out.empty()) throw std::invalid_argument("empty cushion list");
    return out;
}

int cmd_bet(const BetOpts& o) {
    std::string odds_text = read_file(o.odds);
    std::vector<OddsRow> odds = parse_odds_csv(odds_text);
    if (odds.empty()) {
        std::cerr << "bet: odds file has no games: " << o.odds << "\n";
        return 1;
    }
    std::string pred_text = read_file(o.predictions);
    std::map<std::string, double> probs = parse_predictions_csv(pred_text);
    std::vector<double> aligned;
    aligned.reserve(odds.size());
    for (const auto& row : odds) {
        auto it = probs.find(row.game_id);
        if (it == probs.end()) {
            std::cerr << "bet: no prediction for game " << row.game_id << "\n";
            return 1;
        }
        if (!(it->second >= 0.0 && it->second <= 1.0)) {
            std::cerr << "bet: probability outside [0,1] for game "
                      << row.game_id << "\n";
            return 1;
        }
        aligned.push_back(it->second);
    }
    std::vector<double> cushions = parse_cushion_list(o.cushions);
    std::vector<CushionReport> reports =
        roi_report(odds, aligned, cushions, o.stake);
    roi_confidence(reports, odds, aligned, o.stake, o.mc_samples, o.seed);
    std::string prov =
        provenance_header({{"tool", kToolVersion},
                           {"subcommand", "bet"},
                           {"odds_digest", hex64(fnv1a64(odds_text))},
                           {"predictions_digest", hex64(fnv1a64(pred_text))},
                           {"stake", format_double(o.stake)},
                           {"mc_samples", std::to_string(o.mc_samples)},
                           {"seed", std::to_string(o.seed)}});
    std::string roi_csv = prov + serialize_roi_csv(reports);
    if (o.roi_out.empty())
        std::cout << roi_csv;
    else
        write_file(o.roi_out, roi_csv);
    if (!o.plot_out.empty())
        write_file(o.plot_out, prov + serialize_plot_csv(reports.front()));
    return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
    CLI::App app{"matchup: hierarchical matchup models, game simulation, and "
                 "betting evaluation"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(kToolVersion));
    // Flags beat the file, the file beats built-in defaults.
    app.set_config("--config", "",
                   "INI config file; a [subcommand] section supplies that "
                   "subcommand's options");

    IngestOpts ingest_opts;
    CLI::App* ingest = app.add_subcommand(
        "ingest", "Validate a plate-appearance CSV and report bad rows");
    ingest->fallthrough();
    ingest->add_option("--input", ingest_opts.input, "event CSV path")
        ->required();
    ingest->add_option("--output", ingest_opts.output,
                       "write the canonical serialization of valid rows here");

    FitOpts fit_opts;
    CLI::App* fit =
        app.add_subcommand("fit", "Fit a model variant to an event CSV");
    fit->fallthrough();
    fit->add_option("--variant", fit_opts.variant, "P, PB, PBR, or BR")
        ->required()
        ->check(CLI::IsMember({"P", "PB", "PBR", "BR"}));
    fit->add_option("--data", fit_opts.data, "training event CSV")->required();
    fit->add_option("--steals", fit_opts.steals,
                    "steal-chance CSV (required for BR)");
    fit->add_option("--out", fit_opts.out, "output model JSON path")
        ->required();
    fit->add_option("--seed", fit_opts.seed, "sampler seed")->required();
    fit->add_option("--steps", fit_opts.steps, "sampler sweeps")
        ->check(CLI::PositiveNumber);
    fit->add_option("--burn-in", fit_opts.burn_in, "adaptation sweeps")
        ->check(CLI::NonNegativeNumber);
    fit->add_option("--chains", fit_opts.chains, "recency chains (PBR/BR)")
        ->check(CLI::Range(1, 4));
    fit->add_option("--min-pa", fit_opts.min_pa,
                    "plate appearances needed to inform the priors");
    fit->add_option("--min-steal-opps", fit_opts.min_steal_opps,
                    "opportunities needed to inform the steal prior");
    fit->add_option("--steal-groups", fit_opts.steal_groups,
                    "steal-tendency groups")
        ->check(CLI::PositiveNumber);
    fit->add_option("--smoothing", fit_opts.smoothing,
                    "transition-table pseudo-count");

    SimulateOpts sim_opts;
    CLI::App* simulate = app.add_subcommand(
        "simulate", "Simulate games described by a game-spec JSON");
    simulate->fallthrough();
    simulate->add_option("--spec", sim_opts.spec, "game-spec JSON path")
        ->required();
    simulate->add_option("--out", sim_opts.out, "summary CSV path")
        ->required();
    simulate->add_option("--decisions", sim_opts.decisions,
                         "decision-log CSV path");
    simulate->add_option("--n", sim_opts.n, "number of games")
        ->check(CLI::PositiveNumber);
    simulate->add_option("--seed", sim_opts.seed, "simulation seed")
        ->required();
    simulate->add_option("--workers", sim_opts.workers, "thread count")
        ->check(CLI::PositiveNumber);

    EvaluateOpts eval_opts;
    CLI::App* evaluate = app.add_subcommand(
        "evaluate", "Score fitted models on a validation event CSV");
    evaluate->fallthrough();
    evaluate
        ->add_option("--model", eval_opts.models,
                     "model JSON path (repeatable)")
        ->required();
    evaluate->add_option("--data", eval_opts.data, "validation event CSV")
        ->required();
    evaluate->add_option("--truth", eval_opts.truth,
                         "reference model for expected cross entropy");
    evaluate->add_option("--out", eval_opts.out,
                         "metrics JSON path (default stdout)");

    BetOpts bet_opts;
    CLI::App* bet = app.add_subcommand(
        "bet", "Backtest moneyline betting from model predictions");
    bet->fallthrough();
    bet->add_option("--odds", bet_opts.odds, "odds CSV path")->required();
    bet->add_option("--predictions", bet_opts.predictions,
                    "per-game home win probability CSV")
        ->required();
    bet->add_option("--cushions", bet_opts.cushions,
                    "comma-separated cushion list");
    bet->add_option("--stake", bet_opts.stake, "flat stake per bet")
        ->check(CLI::PositiveNumber);
    bet->add_option("--mc-samples", bet_opts.mc_samples,
                    "Monte Carlo samples for the ROI interval");
    bet->add_option("--seed", bet_opts.seed, "resampling seed");
    bet->add_option("--roi-out", bet_opts.roi_out,
                    "ROI table CSV path (default stdout)");
    bet->add_option("--plot-out", bet_opts.plot_out,
                    "per-game plot-data CSV path (first cushion)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (app.got_subcommand(ingest)) return cmd_ingest(ingest_opts);
        if (app.got_subcommand(fit)) return cmd_fit(fit_opts);
        if (app.got_subcommand(simulate)) return cmd_simulate(sim_opts);
        if (app.got_subcommand(evaluate)) return cmd_evaluate(eval_opts);
        if (app.got_subcommand(bet)) return cmd_bet(bet_opts);
    } catch (const SchemaError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const InsufficientDataError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const SamplerError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const GameProtocolError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const GameCapError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;  // unreachable with require_subcommand(1)
}

}  // namespace matchup
