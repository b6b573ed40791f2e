// Small numerical toolbox: logit/sigmoid with domain guards, beta/gamma
// densities and moment matching, regularized incomplete beta.
#pragma once

#include <array>
#include <cstddef>
#include <vector>

namespace matchup {

// Probabilities are clamped to this band before any logit so boundary
// parameters cannot produce infinities. The perturbation is far below every
// test tolerance in the suite.
constexpr double kProbEps = 1e-9;

double clamp_prob(double p);

// ln(p / (1-p)) on the clamped band.
double logit(double p);

// 1 / (1 + exp(-s)); stable for large |s|.
double sigmoid(double s);

struct BetaParams {
    double alpha = 1.0;
    double beta = 1.0;
    double mean() const { return alpha / (alpha + beta); }
    double variance() const {
        double s = alpha + beta;
        return alpha * beta / (s * s * (s + 1.0));
    }
};

struct GammaParams {
    double shape = 1.0;
    double rate = 1.0;
    double mean() const { return shape / rate; }
    double variance() const { return shape / (rate * rate); }
};

double log_beta_pdf(double x, const BetaParams& p);
double log_gamma_pdf(double x, const GammaParams& p);

// Moment matching with a variance floor: degenerate samples (all equal) are
// given a tiny spread instead of producing infinite concentration, and
// variances too large for a beta are capped just inside the feasible region.
BetaParams beta_moment_match(double mean, double var);
GammaParams gamma_moment_match(double mean, double var);

// Regularized incomplete beta I_x(a, b) via the standard continued fraction.
double reg_incomplete_beta(double x, double a, double b);

// P(X <= x) for X ~ Beta(p).
double beta_cdf(double x, const BetaParams& p);

double mean_of(const std::vector<double>& v);
double variance_of(const std::vector<double>& v);  // population variance

// q in [0,1]; linear interpolation between order statistics.
double percentile_of(std::vector<double> v, double q);

}  // namespace matchup
