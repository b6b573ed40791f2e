// Base-running transition tables: league-average estimation, beta-binomial
// steal-rate posteriors, the five steal-tendency groups, and per-batter
// mixture tables.
#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "matchup/events.hpp"
#include "matchup/outcome.hpp"
#include "matchup/rng.hpp"
#include "matchup/stats.hpp"

namespace matchup {

// For each of the 24 base-out states and 9 outcomes, a distribution over
// (successor state or terminal, runs scored 0..4). Stored dense for
// construction and arithmetic; finalize() additionally builds a sparse
// support list per row for fast sampling.
class TransitionTable {
public:
    static constexpr int kRows = BaseOutState::kStates * kNumOutcomes;  // 216
    static constexpr int kSucc = BaseOutState::kStates + 1;             // incl. terminal
    static constexpr int kRuns = kMaxRunsPerPa + 1;
    static constexpr int kCellsPerRow = kSucc * kRuns;

    struct Entry {
        std::uint8_t succ_index;  // 0..23 in play, 24 terminal
        std::uint8_t runs;
        double prob;
    };
    struct Transition {
        BaseOutState state;
        int runs;
    };

    TransitionTable();

    double& cell(int state_index, Outcome o, int succ_index, int runs);
    double cell(int state_index, Outcome o, int succ_index, int runs) const;

    // Normalizes nothing; verifies each row is a simplex, builds the sparse
    // support. Must be called after construction edits and before sampling.
    void finalize();
    bool finalized() const { return finalized_; }

    const std::vector<Entry>& row_support(int state_index, Outcome o) const;

    Transition sample(const BaseOutState& state, Outcome o, Engine& rng) const;

    // Empty string when every row is a simplex within 1e-12, every supported
    // successor satisfies runs conservation, and the deterministic outcomes
    // (K/BB/HBP/HR) put probability 1 on their forced successor.
    std::string validate() const;

    bool operator==(const TransitionTable& other) const {
        return cells_ == other.cells_;
    }

private:
    std::vector<double> cells_;                  // kRows * kCellsPerRow
    std::vector<std::vector<Entry>> support_;    // per row
    bool finalized_ = false;
};

// Deterministic baseline row used when a (state, outcome) cell has no
// observations anywhere: forced successors for K/BB/HBP/HR, batter out with
// runners holding for GO/FO, station-to-station advancement for hits.
TransitionTable::Transition canonical_transition(const BaseOutState& pre,
                                                 Outcome o);

// Empirical table over all records; cells with no observations fall back to
// the canonical row. This is the k=1 grouping case.
TransitionTable league_transition_table(
    const std::vector<PlateAppearanceRecord>& records);

struct StealProfile {
    long long opportunities = 0;  // n
    long long steals = 0;         // x
    BetaParams prior;             // (alpha, beta)

    // (alpha + x) / (alpha + beta + n), exactly.
    double posterior_rate() const;
    BetaParams posterior() const;
};

double steal_rate_posterior(long long steals, long long opportunities,
                            double alpha, double beta);

struct StealCounts {
    std::string batter_id;
    long long opportunities = 0;
    long long steals = 0;
};

// Auxiliary per-player CSV: header `batter_id,opportunities,steals`.
std::vector<StealCounts> parse_steal_csv(const std::string& path);

// Beta prior moment-matched to the empirical rates x/n of players with at
// least min_opportunities.
BetaParams fit_steal_prior(const std::vector<StealCounts>& players,
                           long long min_opportunities = 200);

// Nonnegative weights over the steal-rate groups, summing to 1.
using GroupWeights = std::vector<double>;

struct GroupedTables {
    std::vector<TransitionTable> tables;  // one per group, ascending steal rate
    std::vector<double> boundaries;       // k-1 rate boundaries between groups
};

// Records sorted by their batter's posterior steal rate and split into k
// equal-count groups (remainder to the lowest groups). Group rows are
// smoothed toward the all-records league row with an additive pseudo-count;
// boundaries are the 1/k..(k-1)/k percentiles of the per-record rates.
GroupedTables build_group_tables(
    const std::vector<PlateAppearanceRecord>& records,
    const std::map<std::string, double>& batter_rates, int k = 5,
    double smoothing_pseudo_count = 5.0);

// Posterior mass of Beta(alpha+x, beta+n-x) falling inside each group's rate
// interval, evaluated with the regularized incomplete beta.
GroupWeights batter_mixture_weights(const StealProfile& profile,
                                    const std::vector<double>& boundaries);

// Rowwise convex combination of the group tables.
TransitionTable batter_transition_table(
    const GroupWeights& weights, const std::vector<TransitionTable>& tables);

TransitionTable::Transition apply_transition(const BaseOutState& state,
                                             Outcome o,
                                             const TransitionTable& table,
                                             Engine& rng);

}  // namespace matchup
