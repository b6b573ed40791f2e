// Parameter estimation: empirical prior fitting, the adaptive
// random-walk Metropolis-within-Gibbs sampler for player parameters and
// league weights, and the four-chain recency splits.
#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "matchup/events.hpp"
#include "matchup/log5.hpp"
#include "matchup/outcome.hpp"
#include "matchup/stats.hpp"

namespace matchup {

struct SamplerError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Empirical per-player summary used for prior fitting. Offsets are recovered
// from the per-hand rate split: r_opp = base^offset and r_same =
// base^(1/offset) give offset = sqrt(ln r_opp / ln r_same). Per-hand rates
// are add-half smoothed so the logs stay finite; players with PAs against
// only one hand get offset 1.
struct PlayerSummary {
    std::string player_id;
    long long pa = 0;
    Simplex9 rates{};    // pooled outcome frequencies
    Simplex9 offsets{};  // empirical handedness offsets, clamped to [0.25, 4]
};

std::vector<PlayerSummary> summarize_pitchers(
    const std::vector<PlateAppearanceRecord>& records);
std::vector<PlayerSummary> summarize_batters(
    const std::vector<PlateAppearanceRecord>& records);

// Per-outcome beta hyperparameters for base probabilities and gamma
// hyperparameters for offsets. Weight priors are uniform on
// [0.25, 1.75]^2 intersected with 1 <= P+B <= 2 and carry no free
// hyperparameters.
struct PriorSpec {
    std::array<BetaParams, kNumOutcomes> base{};
    std::array<GammaParams, kNumOutcomes> offset{};

    void validate() const;  // throws std::invalid_argument
};

// Moment-matched to the empirical rates and offsets of players with at least
// min_pa plate appearances.
PriorSpec fit_priors(const std::vector<PlayerSummary>& summaries,
                     long long min_pa = 100);

// Whether batters carry sampled parameters or are represented by the
// batting-order rate table.
enum class ModelStructure { PitcherOnly, PitcherBatter };

// Everything the likelihood needs besides the parameters themselves.
struct LikelihoodContext {
    LeagueRates league;
    OrderRates order;
    bool parametric_batters = false;
};

LikelihoodContext make_likelihood_context(
    const std::vector<PlateAppearanceRecord>& records, ModelStructure s);

struct ModelParams {
    std::map<std::string, PlayerParams> pitchers;
    std::map<std::string, PlayerParams> batters;  // unused when batter side
                                                  // comes from the order table
    Log5Weights weights;
};

// Sum of per-record log categorical probabilities under the matchup pipeline.
// Every player referenced by the data must be present in params.
double log_likelihood(const ModelParams& params,
                      const std::vector<PlateAppearanceRecord>& data,
                      const LikelihoodContext& ctx);

// Log prior density of all player parameters plus the weight constraint
// indicator. Out-of-domain parameters give -infinity (the rejected-state
// convention), never NaN.
double log_prior(const ModelParams& params, const PriorSpec& priors,
                 const PriorSpec& batter_priors, bool parametric_batters);

double log_posterior(const ModelParams& params,
                     const std::vector<PlateAppearanceRecord>& data,
                     const PriorSpec& priors, const LikelihoodContext& ctx,
                     const PriorSpec* batter_priors = nullptr);

struct SamplerConfig {
    int steps = 5000;
    int burn_in = 2000;
    double prob_scale = 0.2;    // initial proposal sd, logit scale
    double offset_scale = 0.2;  // initial proposal sd, log scale
    double weight_scale = 0.1;  // initial proposal sd, (P+B, P-B) coords
    std::uint64_t seed = 0;     // callers must set this deliberately

    void validate() const;
};

struct PlayerPosterior {
    Simplex9 base_mean{};
    Simplex9 base_sd{};
    Simplex9 offset_mean{};
    Simplex9 offset_sd{};

    PlayerParams params() const;  // the posterior means
};

struct PosteriorSummary {
    std::map<std::string, PlayerPosterior> pitchers;
    std::map<std::string, PlayerPosterior> batters;
    Log5Weights weights;        // posterior means
    double acceptance_rate = 0.0;  // post burn-in, all blocks pooled
    double effective_samples = 0.0;
};

// Adaptive random-walk Metropolis-within-Gibbs. Blocks: per-player base
// probabilities (logit scale), per-player offsets (log scale), per-outcome
// weight pairs in (P+B, P-B) coordinates with infeasible proposals rejected
// outright. Proposal scales adapt toward ~30% acceptance during burn-in and
// are frozen afterwards. Deterministic given config.seed. extra_* players
// carry no likelihood terms and are sampled from their priors.
PosteriorSummary sample_posterior(
    const std::vector<PlateAppearanceRecord>& data, const PriorSpec& priors,
    const SamplerConfig& config,
    ModelStructure structure = ModelStructure::PitcherOnly,
    const std::vector<std::string>& extra_pitchers = {},
    const std::vector<std::string>& extra_batters = {},
    const PriorSpec* batter_priors = nullptr);

// One player's records split into the four recency chains. Blocks of 500
// counted back from the most recent record: block 1 is in all four chains,
// block 2 in three, block 3 in two, block 4 in one; anything older than
// 2000 PAs is dropped. chains[0] is the widest chain (blocks 1-4),
// chains[3] the narrowest (block 1 only).
struct RecencyChains {
    std::array<std::vector<PlateAppearanceRecord>, 4> chains;
};

RecencyChains build_recency_chains(
    std::vector<PlateAppearanceRecord> player_records);

// Global chain datasets: a record's block is the better (more recent) of its
// pitcher's and its batter's block ranks, so each player's own recent
// appearances satisfy the per-player membership rule. Records are kept in
// date order within each chain.
std::array<std::vector<PlateAppearanceRecord>, 4> chain_datasets(
    const std::vector<PlateAppearanceRecord>& records);

}  // namespace matchup
