#include "matchup/evaluation.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace matchup {

using ordered_json = nlohmann::ordered_json;

namespace {

constexpr std::uint64_t kPoolStream = 0xADDED817ULL;
constexpr std::uint64_t kRoiStream = 0xB377C1ULL;

std::string format_double(double x) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

LossGmp from_loss(double total, std::size_t n, bool infinite) {
    LossGmp out;
    out.infinite = infinite;
    if (infinite) {
        out.log_loss = std::numeric_limits<double>::infinity();
        out.gmp = 0.0;
    } else {
        out.log_loss = total / static_cast<double>(n);
        out.gmp = std::exp(-out.log_loss);
    }
    return out;
}

}  // namespace

LossGmp log_loss_and_gmp(const std::vector<Simplex9>& predictions,
                         const std::vector<int>& actuals) {
    if (predictions.empty() || predictions.size() != actuals.size())
        throw std::invalid_argument(
            "log_loss_and_gmp: need aligned nonempty inputs");
    double total = 0.0;
    bool infinite = false;
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        int a = actuals[i];
        if (a < 0 || a >= kNumOutcomes)
            throw std::invalid_argument("log_loss_and_gmp: bad outcome index");
        double p = predictions[i][a];
        if (p <= 0.0)
            infinite = true;
        else
            total -= std::log(p);
    }
    return from_loss(total, predictions.size(), infinite);
}

LossGmp cross_model_gmp(const std::vector<Simplex9>& evaluated,
                        const std::vector<Simplex9>& truth) {
    if (evaluated.empty() || evaluated.size() != truth.size())
        throw std::invalid_argument(
            "cross_model_gmp: need aligned nonempty inputs");
    double total = 0.0;
    bool infinite = false;
    for (std::size_t i = 0; i < evaluated.size(); ++i) {
        for (int k = 0; k < kNumOutcomes; ++k) {
            double q = truth[i][k];
            if (q <= 0.0) continue;  // 0 * ln 0 = 0
            double p = evaluated[i][k];
            if (p <= 0.0)
                infinite = true;
            else
                total -= q * std::log(p);
        }
    }
    return from_loss(total, evaluated.size(), infinite);
}

std::vector<Simplex9> model_predictions(
    const MatchupModel& model,
    const std::vector<PlateAppearanceRecord>& records) {
    std::vector<Simplex9> out;
    out.reserve(records.size());
    for (const auto& r : records)
        out.push_back(model.predict(r.pitcher_id, r.batter_id, r.batting_order,
                                    r.handedness()));
    return out;
}

MetricReport evaluate_model(const MatchupModel& model,
                            const std::vector<PlateAppearanceRecord>& records,
                            const MatchupModel* truth) {
    if (records.empty())
        throw std::invalid_argument("evaluate_model: no records");
    MetricReport rep;

    std::vector<Simplex9> preds = model_predictions(model, records);
    std::vector<int> actuals;
    actuals.reserve(records.size());
    for (const auto& r : records)
        actuals.push_back(static_cast<int>(r.outcome));
    rep.outcome = log_loss_and_gmp(preds, actuals);

    double total = 0.0;
    bool infinite = false;
    for (const auto& r : records) {
        const TransitionTable& tt = model.transition_table(r.batter_id);
        double p = tt.cell(r.pre_state.index(), r.outcome,
                           r.post_state.index(), r.runs_scored);
        if (p <= 0.0)
            infinite = true;
        else
            total -= std::log(p);
    }
    rep.transition = from_loss(total, records.size(), infinite);

    if (truth) {
        std::vector<Simplex9> truth_preds = model_predictions(*truth, records);
        rep.vs_truth = cross_model_gmp(preds, truth_preds);
    }
    return rep;
}

namespace {

ordered_json loss_json(const LossGmp& l) {
    ordered_json j;
    if (l.infinite)
        j["log_loss"] = nullptr;
    else
        j["log_loss"] = l.log_loss;
    j["gmp"] = l.gmp;
    j["infinite"] = l.infinite;
    return j;
}

}  // namespace

std::string metrics_to_json(const MetricReport& report) {
    ordered_json j;
    j["outcome"] = loss_json(report.outcome);
    j["transition"] = loss_json(report.transition);
    if (report.vs_truth) j["vs_truth"] = loss_json(*report.vs_truth);
    return j.dump(2) + "\n";
}

BetaParams win_rate_posterior(long long wins, long long games) {
    if (games < 0 || wins < 0 || wins > games)
        throw std::invalid_argument("win_rate_posterior: need 0 <= wins <= games");
    return BetaParams{1.0 + static_cast<double>(wins),
                      1.0 + static_cast<double>(games - wins)};
}

AddedWinsPosterior added_wins_posterior(
    const std::vector<WinComparison>& comparisons, int samples,
    std::uint64_t seed) {
    if (comparisons.empty())
        throw std::invalid_argument("added_wins_posterior: no comparisons");
    if (samples < 1)
        throw std::invalid_argument("added_wins_posterior: samples must be >= 1");
    AddedWinsPosterior out;
    out.per_game_mean.reserve(comparisons.size());
    out.per_game_sd.reserve(comparisons.size());
    for (const auto& c : comparisons) {
        BetaParams base = win_rate_posterior(c.baseline_wins, c.baseline_games);
        BetaParams chal =
            win_rate_posterior(c.challenger_wins, c.challenger_games);
        double mean = (chal.mean() - base.mean()) * 162.0;
        double var = (chal.variance() + base.variance()) * 162.0 * 162.0;
        out.per_game_mean.push_back(mean);
        out.per_game_sd.push_back(std::sqrt(var));
    }
    Engine eng = make_engine(seed, kPoolStream);
    out.pooled_samples.reserve(static_cast<std::size_t>(samples));
    int n = static_cast<int>(comparisons.size());
    for (int s = 0; s < samples; ++s) {
        int g = rnd_below(eng, n);
        double z = rnd_norm(eng);
        out.pooled_samples.push_back(out.per_game_mean[g] +
                                     out.per_game_sd[g] * z);
    }
    out.pooled_mean = mean_of(out.pooled_samples);
    out.pooled_sd = std::sqrt(variance_of(out.pooled_samples));
    return out;
}

double implied_probability(int moneyline) {
    int m = std::abs(moneyline);
    if (m < 100)
        throw std::invalid_argument("implied_probability: |moneyline| must be >= 100");
    if (moneyline < 0) return static_cast<double>(m) / (m + 100.0);
    return 100.0 / (m + 100.0);
}

std::string_view bet_side_name(BetSide s) {
    switch (s) {
        case BetSide::None: return "none";
        case BetSide::Home: return "home";
        case BetSide::Away: return "away";
    }
    throw std::logic_error("bet_side_name: bad side");
}

BetSide betting_decision(double model_home_prob, int home_line, int away_line,
                         double cushion) {
    if (!(model_home_prob >= 0.0 && model_home_prob <= 1.0))
        throw std::invalid_argument("betting_decision: probability outside [0,1]");
    if (!(cushion >= 0.0))
        throw std::invalid_argument("betting_decision: cushion must be >= 0");
    double ih = implied_probability(home_line);
    double ia = implied_probability(away_line);
    bool home = model_home_prob > ih + cushion;
    bool away = (1.0 - model_home_prob) > ia + cushion;
    if (home && away)
        throw std::invalid_argument(
            "betting_decision: both sides have an edge; lines imply a negative "
            "overround");
    if (home) return BetSide::Home;
    if (away) return BetSide::Away;
    return BetSide::None;
}

double settle_profit(int line, double stake, bool won) {
    if (!won) return -stake;
    if (line < 0) return stake * 100.0 / static_cast<double>(-line);
    return stake * static_cast<double>(line) / 100.0;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (;;) {
        std::size_t pos = line.find(',', start);
        if (pos == std::string::npos) {
            out.push_back(line.substr(start));
            return out;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
}

int parse_int_field(const std::string& s, int line_no, const char* field) {
    int v = 0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
        throw SchemaError("odds csv line " + std::to_string(line_no) + ": bad " +
                          field + " '" + s + "'");
    return v;
}

}  // namespace

std::vector<OddsRow> parse_odds_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line))
        throw SchemaError("odds csv: empty input");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "game_id,home_team,away_team,home_ml,away_ml,home_won")
        throw SchemaError("odds csv: unexpected header '" + line + "'");
    std::vector<OddsRow> out;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> f = split_csv_line(line);
        if (f.size() != 6)
            throw SchemaError("odds csv line " + std::to_string(line_no) +
                              ": expected 6 fields, got " +
                              std::to_string(f.size()));
        OddsRow r;
        r.game_id = f[0];
        r.home_team = f[1];
        r.away_team = f[2];
        r.home_ml = parse_int_field(f[3], line_no, "home_ml");
        r.away_ml = parse_int_field(f[4], line_no, "away_ml");
        if (std::abs(r.home_ml) < 100 || std::abs(r.away_ml) < 100)
            throw SchemaError("odds csv line " + std::to_string(line_no) +
                              ": |moneyline| must be >= 100");
        if (f[5] == "1")
            r.home_won = true;
        else if (f[5] == "0")
            r.home_won = false;
        else
            throw SchemaError("odds csv line " + std::to_string(line_no) +
                              ": home_won must be 0 or 1");
        out.push_back(std::move(r));
    }
    return out;
}

std::vector<CushionReport> roi_report(
    const std::vector<OddsRow>& odds,
    const std::vector<double>& model_home_probs,
    const std::vector<double>& cushions, double stake) {
    if (odds.size() != model_home_probs.size())
        throw std::invalid_argument(
            "roi_report: odds and probabilities misaligned");
    if (!(stake > 0.0))
        throw std::invalid_argument("roi_report: stake must be positive");
    std::vector<CushionReport> out;
    out.reserve(cushions.size());
    for (double c : cushions) {
        CushionReport rep;
        rep.cushion = c;
        double profit = 0.0;
        for (std::size_t g = 0; g < odds.size(); ++g) {
            const OddsRow& row = odds[g];
            BetRecord b;
            b.game_id = row.game_id;
            b.model_home_prob = model_home_probs[g];
            b.implied_home = implied_probability(row.home_ml);
            b.implied_away = implied_probability(row.away_ml);
            b.overround = b.implied_home + b.implied_away - 1.0;
            b.side = betting_decision(model_home_probs[g], row.home_ml,
                                      row.away_ml, c);
            if (b.side != BetSide::None) {
                b.line = b.side == BetSide::Home ? row.home_ml : row.away_ml;
                b.stake = stake;
                b.won = b.side == BetSide::Home ? row.home_won : !row.home_won;
                b.profit = settle_profit(b.line, stake, b.won);
                rep.bets_placed += 1;
                rep.total_staked += stake;
                profit += b.profit;
            }
            rep.ledger.push_back(std::move(b));
        }
        if (rep.bets_placed > 0) rep.roi = profit / rep.total_staked;
        out.push_back(std::move(rep));
    }
    return out;
}

void roi_confidence(std::vector<CushionReport>& reports,
                    const std::vector<OddsRow>& odds,
                    const std::vector<double>& model_home_probs, double stake,
                    int mc_samples, std::uint64_t seed) {
    if (mc_samples < 1000)
        throw std::invalid_argument("roi_confidence: mc_samples must be >= 1000");
    if (odds.size() != model_home_probs.size())
        throw std::invalid_argument(
            "roi_confidence: odds and probabilities misaligned");
    for (std::size_t rix = 0; rix < reports.size(); ++rix) {
        CushionReport& rep = reports[rix];
        std::vector<std::size_t> placed;
        for (std::size_t g = 0; g < rep.ledger.size(); ++g)
            if (rep.ledger[g].side != BetSide::None) placed.push_back(g);
        if (placed.empty()) {
            rep.roi_lower = 0.0;
            rep.roi_upper = 0.0;
            continue;
        }
        Engine eng = make_engine(seed, kRoiStream, rix);
        double staked = stake * static_cast<double>(placed.size());
        std::vector<double> rois;
        rois.reserve(static_cast<std::size_t>(mc_samples));
        for (int s = 0; s < mc_samples; ++s) {
            double profit = 0.0;
            for (std::size_t g : placed) {
                const BetRecord& b = rep.ledger[g];
                bool home_wins = rnd_uniform(eng) < model_home_probs[g];
                bool won = b.side == BetSide::Home ? home_wins : !home_wins;
                profit += settle_profit(b.line, stake, won);
            }
            rois.push_back(profit / staked);
        }
        rep.roi_lower = percentile_of(rois, 0.05);
        rep.roi_upper = percentile_of(rois, 0.95);
    }
}

std::string serialize_roi_csv(const std::vector<CushionReport>& reports) {
    std::string out =
        "cushion,bets_placed,total_staked,roi_lower,roi_upper,roi_actual\n";
    auto opt = [](const std::optional<double>& v) {
        return v ? format_double(*v) : std::string("na");
    };
    for (const auto& r : reports) {
        out += format_double(r.cushion);
        out += ',';
        out += std::to_string(r.bets_placed);
        out += ',';
        out += format_double(r.total_staked);
        out += ',';
        out += opt(r.roi_lower);
        out += ',';
        out += opt(r.roi_upper);
        out += ',';
        out += opt(r.roi);
        out += '\n';
    }
    return out;
}

std::string serialize_plot_csv(const CushionReport& report) {
    std::string out =
        "game_id,model_home_prob,implied_home,implied_away,bet_side,result\n";
    for (const auto& b : report.ledger) {
        out += b.game_id;
        out += ',';
        out += format_double(b.model_home_prob);
        out += ',';
        out += format_double(b.implied_home);
        out += ',';
        out += format_double(b.implied_away);
        out += ',';
        out += bet_side_name(b.side);
        out += ',';
        if (b.side == BetSide::None)
            out += "none";
        else
            out += b.won ? "win" : "loss";
        out += '\n';
    }
    return out;
}

}  // namespace matchup
