#include "matchup/log5.hpp"

#include <cmath>
#include <stdexcept>

namespace matchup {

void PlayerParams::validate() const {
    for (int i = 0; i < kNumOutcomes; ++i) {
        if (!(base[i] > 0.0 && base[i] < 1.0))
            throw std::invalid_argument("PlayerParams: base prob outside (0,1)");
        if (!(offset[i] > 0.0))
            throw std::invalid_argument("PlayerParams: offset not positive");
    }
}

bool Log5Weights::valid() const {
    for (int i = 0; i < kNumOutcomes; ++i) {
        double p = pitcher[i], b = batter[i];
        if (p < kWeightLo || p > kWeightHi || b < kWeightLo || b > kWeightHi)
            return false;
        if (p + b < 1.0 || p + b > 2.0) return false;
    }
    return true;
}

void Log5Weights::validate() const {
    if (!valid())
        throw std::invalid_argument(
            "Log5Weights: components must lie in [0.25,1.75] with 1 <= P+B <= 2");
}

Log5Weights default_weights() {
    Log5Weights w;
    w.pitcher.fill(0.75);
    w.batter.fill(0.75);
    return w;
}

double handedness_adjust(double base, double offset, Handedness h) {
    if (!(base > 0.0 && base < 1.0))
        throw std::invalid_argument("handedness_adjust: base outside (0,1)");
    if (!(offset > 0.0))
        throw std::invalid_argument("handedness_adjust: offset not positive");
    double e = (h == Handedness::Opposite) ? offset : 1.0 / offset;
    return std::pow(base, e);
}

double log5_combine(double a, double b, double c, double P, double B) {
    for (double p : {a, b, c})
        if (!(p > 0.0 && p < 1.0))
            throw std::invalid_argument("log5_combine: probability outside (0,1)");
    return P * logit(a) + B * logit(b) - (P + B - 1.0) * logit(c);
}

double squash(double s) { return sigmoid(s); }

namespace {

Simplex9 combine_and_normalize(const Simplex9& a, const Simplex9& b,
                               const Simplex9& league, const Log5Weights& w) {
    Simplex9 x;
    double total = 0.0;
    for (int i = 0; i < kNumOutcomes; ++i) {
        double s = w.pitcher[i] * logit(a[i]) + w.batter[i] * logit(b[i]) -
                   (w.pitcher[i] + w.batter[i] - 1.0) * logit(league[i]);
        x[i] = sigmoid(s);
        total += x[i];
    }
    for (int i = 0; i < kNumOutcomes; ++i) x[i] /= total;
    return x;
}

}  // namespace

Simplex9 outcome_distribution(const PlayerParams& pitcher,
                              const Simplex9& batter_rates,
                              const Simplex9& league, const Log5Weights& w,
                              Handedness h) {
    pitcher.validate();
    w.validate();
    Simplex9 a;
    for (int i = 0; i < kNumOutcomes; ++i)
        a[i] = handedness_adjust(pitcher.base[i], pitcher.offset[i], h);
    return combine_and_normalize(a, batter_rates, league, w);
}

Simplex9 outcome_distribution(const PlayerParams& pitcher,
                              const PlayerParams& batter,
                              const Simplex9& league, const Log5Weights& w,
                              Handedness h) {
    pitcher.validate();
    batter.validate();
    w.validate();
    Simplex9 a, b;
    for (int i = 0; i < kNumOutcomes; ++i) {
        a[i] = handedness_adjust(pitcher.base[i], pitcher.offset[i], h);
        b[i] = handedness_adjust(batter.base[i], batter.offset[i], h);
    }
    return combine_and_normalize(a, b, league, w);
}

}  // namespace matchup
