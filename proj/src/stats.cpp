#include "matchup/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace matchup {

double clamp_prob(double p) {
    return std::min(1.0 - kProbEps, std::max(kProbEps, p));
}

double logit(double p) {
    p = clamp_prob(p);
    return std::log(p / (1.0 - p));
}

double sigmoid(double s) {
    if (s >= 0.0) {
        double e = std::exp(-s);
        return 1.0 / (1.0 + e);
    }
    double e = std::exp(s);
    return e / (1.0 + e);
}

static double log_beta_fn(double a, double b) {
    return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
}

double log_beta_pdf(double x, const BetaParams& p) {
    if (x <= 0.0 || x >= 1.0) return -std::numeric_limits<double>::infinity();
    return (p.alpha - 1.0) * std::log(x) + (p.beta - 1.0) * std::log1p(-x) -
           log_beta_fn(p.alpha, p.beta);
}

double log_gamma_pdf(double x, const GammaParams& p) {
    if (x <= 0.0) return -std::numeric_limits<double>::infinity();
    return p.shape * std::log(p.rate) + (p.shape - 1.0) * std::log(x) -
           p.rate * x - std::lgamma(p.shape);
}

BetaParams beta_moment_match(double mean, double var) {
    if (!(mean > 0.0 && mean < 1.0))
        throw std::invalid_argument("beta_moment_match: mean outside (0,1)");
    const double feasible = mean * (1.0 - mean);
    const double floor = 1e-7;
    double v = std::min(std::max(var, floor), 0.95 * feasible);
    double nu = feasible / v - 1.0;  // alpha + beta
    return BetaParams{mean * nu, (1.0 - mean) * nu};
}

GammaParams gamma_moment_match(double mean, double var) {
    if (!(mean > 0.0))
        throw std::invalid_argument("gamma_moment_match: mean must be positive");
    double v = std::max(var, 1e-7);
    return GammaParams{mean * mean / v, mean / v};
}

// Continued fraction for the incomplete beta (Lentz's algorithm).
static double ibeta_cf(double x, double a, double b) {
    const double tiny = 1e-300;
    const double eps = 1e-15;
    double qab = a + b, qap = a + 1.0, qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < tiny) d = tiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= 300; ++m) {
        double m2 = 2.0 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < eps) break;
    }
    return h;
}

double reg_incomplete_beta(double x, double a, double b) {
    if (!(a > 0.0 && b > 0.0))
        throw std::invalid_argument("reg_incomplete_beta: parameters must be positive");
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    double lfront = a * std::log(x) + b * std::log1p(-x) - log_beta_fn(a, b);
    double front = std::exp(lfront);
    if (x < (a + 1.0) / (a + b + 2.0)) {
        return front * ibeta_cf(x, a, b) / a;
    }
    return 1.0 - front * ibeta_cf(1.0 - x, b, a) / b;
}

double beta_cdf(double x, const BetaParams& p) {
    return reg_incomplete_beta(x, p.alpha, p.beta);
}

double mean_of(const std::vector<double>& v) {
    if (v.empty()) throw std::invalid_argument("mean_of: empty");
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

double variance_of(const std::vector<double>& v) {
    double m = mean_of(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return s / static_cast<double>(v.size());
}

double percentile_of(std::vector<double> v, double q) {
    if (v.empty()) throw std::invalid_argument("percentile_of: empty");
    std::sort(v.begin(), v.end());
    double pos = q * (static_cast<double>(v.size()) - 1.0);
    std::size_t lo = static_cast<std::size_t>(pos);
    if (lo + 1 >= v.size()) return v.back();
    double frac = pos - static_cast<double>(lo);
    return v[lo] * (1.0 - frac) + v[lo + 1] * frac;
}

}  // namespace matchup
