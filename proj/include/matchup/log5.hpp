// log5 matchup math: handedness adjustment, log-ratio combination, logistic
// squash, and categorical renormalization over the nine outcomes.
#pragma once

#include <array>

#include "matchup/outcome.hpp"
#include "matchup/stats.hpp"

namespace matchup {

// Base probability and handedness offset per outcome for one player.
// Pitchers and batters share the structure; the offset mechanism is applied
// symmetrically to both sides of a matchup.
struct PlayerParams {
    Simplex9 base{};    // each strictly inside (0,1)
    Simplex9 offset{};  // each strictly positive

    void validate() const;  // throws std::invalid_argument
};

constexpr double kWeightLo = 0.25;
constexpr double kWeightHi = 1.75;

// One (pitcher, batter) weight pair per outcome, shared league-wide. The
// implied league weight is -(P+B-1), so the three weights sum to 1.
struct Log5Weights {
    Simplex9 pitcher{};  // P_i
    Simplex9 batter{};   // B_i

    bool valid() const;
    void validate() const;
};

Log5Weights default_weights();  // P=B=0.75 everywhere

// base^offset against opposite-handed opponents, base^(1/offset) against
// same-handed ones; offset 1 collapses both to the base probability.
double handedness_adjust(double base, double offset, Handedness h);

// S = P*logit(a) + B*logit(b) - (P+B-1)*logit(c).
double log5_combine(double a, double b, double c, double P, double B);

// Inverse logit back to an unnormalized probability.
double squash(double s);

// Full per-outcome pipeline with the batter side given directly as a rate
// vector (already handedness-specific, e.g. a batting-order table row).
Simplex9 outcome_distribution(const PlayerParams& pitcher,
                              const Simplex9& batter_rates,
                              const Simplex9& league, const Log5Weights& w,
                              Handedness h);

// Batter modeled with his own base/offset parameters, adjusted by the same
// handedness flag as the pitcher.
Simplex9 outcome_distribution(const PlayerParams& pitcher,
                              const PlayerParams& batter,
                              const Simplex9& league, const Log5Weights& w,
                              Handedness h);

}  // namespace matchup
