// Scoring and money: log loss / geometric mean probability, cross-model
// scoring against a reference model, added-wins posteriors, and the
// moneyline betting backtest.
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "matchup/model.hpp"
#include "matchup/rng.hpp"
#include "matchup/stats.hpp"

namespace matchup {

// gmp is exp(-log_loss) by construction. `infinite` marks a realized outcome
// that was assigned zero probability: loss becomes +inf and gmp 0 instead of
// crashing.
struct LossGmp {
    double log_loss = 0.0;
    double gmp = 1.0;
    bool infinite = false;
};

LossGmp log_loss_and_gmp(const std::vector<Simplex9>& predictions,
                         const std::vector<int>& actuals);

// exp(-mean over rows of sum_i truth[i] * (-ln evaluated[i])): expected
// cross entropy instead of realized-outcome cross entropy.
LossGmp cross_model_gmp(const std::vector<Simplex9>& evaluated,
                        const std::vector<Simplex9>& truth);

struct MetricReport {
    LossGmp outcome;
    LossGmp transition;  // probability of the observed (successor, runs)
    std::optional<LossGmp> vs_truth;  // present when a reference model given
};

// Per-record outcome simplices under a model.
std::vector<Simplex9> model_predictions(
    const MatchupModel& model,
    const std::vector<PlateAppearanceRecord>& records);

MetricReport evaluate_model(const MatchupModel& model,
                            const std::vector<PlateAppearanceRecord>& records,
                            const MatchupModel* truth = nullptr);

std::string metrics_to_json(const MetricReport& report);

// Beta(1 + wins, 1 + games - wins): binomial likelihood, uniform prior.
BetaParams win_rate_posterior(long long wins, long long games);

// One head-to-head comparison cell: baseline and challenger win counts over
// their own game sets.
struct WinComparison {
    long long baseline_wins = 0;
    long long baseline_games = 0;
    long long challenger_wins = 0;
    long long challenger_games = 0;
};

// Challenger-minus-baseline win-rate difference per comparison,
// normal-approximated from the two beta posteriors (mean difference,
// summed variance), scaled to a 162-game season. The pooled posterior
// samples uniformly across comparisons.
struct AddedWinsPosterior {
    std::vector<double> per_game_mean;  // per 162 games
    std::vector<double> per_game_sd;    // per 162 games
    std::vector<double> pooled_samples;
    double pooled_mean = 0.0;
    double pooled_sd = 0.0;
};

AddedWinsPosterior added_wins_posterior(
    const std::vector<WinComparison>& comparisons, int samples = 100000,
    std::uint64_t seed = 0);

// American odds to probability: -m -> m/(m+100); +m -> 100/(m+100).
// |moneyline| must be >= 100.
double implied_probability(int moneyline);

enum class BetSide : std::uint8_t { None = 0, Home = 1, Away = 2 };

std::string_view bet_side_name(BetSide s);

// Bet home iff model_home_prob > implied_home + cushion; away iff
// (1 - model_home_prob) > implied_away + cushion. Both firing at once is
// impossible while the overround is nonnegative and is rejected.
BetSide betting_decision(double model_home_prob, int home_line, int away_line,
                         double cushion);

// Net profit of a settled bet: a win pays stake*100/|line| on a negative
// line and stake*line/100 on a positive one; a loss costs the stake.
double settle_profit(int line, double stake, bool won);

struct OddsRow {
    std::string game_id;
    std::string home_team;
    std::string away_team;
    int home_ml = 0;
    int away_ml = 0;
    bool home_won = false;
};

// Strict header `game_id,home_team,away_team,home_ml,away_ml,home_won`.
std::vector<OddsRow> parse_odds_csv(const std::string& text);

struct BetRecord {
    std::string game_id;
    double model_home_prob = 0.0;
    double implied_home = 0.0;
    double implied_away = 0.0;
    double overround = 0.0;
    BetSide side = BetSide::None;
    int line = 0;        // the taken side's moneyline
    double stake = 0.0;  // 0 when no bet
    double profit = 0.0;
    bool won = false;
};

struct CushionReport {
    double cushion = 0.0;
    int bets_placed = 0;
    double total_staked = 0.0;
    std::optional<double> roi;  // empty when no bets placed
    std::optional<double> roi_lower;  // 5th/95th percentile when computed
    std::optional<double> roi_upper;
    std::vector<BetRecord> ledger;  // one row per game
};

// Settles every game at each cushion with a flat stake per bet.
std::vector<CushionReport> roi_report(
    const std::vector<OddsRow>& odds,
    const std::vector<double>& model_home_probs,
    const std::vector<double>& cushions, double stake);

// 90% interval (5th-95th percentile) of ROI when outcomes are resampled as
// independent Bernoulli draws from the model's own probabilities; the bet
// set stays fixed. Fills roi_lower/roi_upper on the given reports.
void roi_confidence(std::vector<CushionReport>& reports,
                    const std::vector<OddsRow>& odds,
                    const std::vector<double>& model_home_probs, double stake,
                    int mc_samples, std::uint64_t seed);

// `cushion,bets_placed,total_staked,roi_lower,roi_upper,roi_actual`.
std::string serialize_roi_csv(const std::vector<CushionReport>& reports);

// `game_id,model_home_prob,implied_home,implied_away,bet_side,result` for
// one cushion's ledger; result in {win,loss,none}.
std::string serialize_plot_csv(const CushionReport& report);

}  // namespace matchup
