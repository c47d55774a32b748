#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "kcm/errors.hpp"
#include "kcm/numeric.hpp"

namespace kcm {

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

/// Two-sided Kolmogorov-Smirnov distance between the empirical CDF of the
/// samples and the standard normal CDF.
inline double ks_distance_to_normal(std::vector<double> samples) {
    if (samples.empty()) throw config_error("KS distance needs at least one sample");
    std::sort(samples.begin(), samples.end());
    const auto n = static_cast<double>(samples.size());
    double d = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double f = normal_cdf(samples[i]);
        d = std::max(d, std::abs(static_cast<double>(i + 1) / n - f));
        d = std::max(d, std::abs(static_cast<double>(i) / n - f));
    }
    return d;
}

/// Regularized lower incomplete gamma P(a, x), by series expansion for
/// x < a+1 and by the continued fraction for Q(a, x) otherwise.
inline double regularized_gamma_p(double a, double x) {
    if (a <= 0.0 || x < 0.0) throw config_error("gamma_p requires a > 0, x >= 0");
    if (x == 0.0) return 0.0;
    const double log_prefactor = -x + a * std::log(x) - std::lgamma(a);
    if (x < a + 1.0) {
        double ap = a;
        double term = 1.0 / a;
        double sum = term;
        for (int i = 0; i < 1000; ++i) {
            ap += 1.0;
            term *= x / ap;
            sum += term;
            if (std::abs(term) < std::abs(sum) * 1e-16) break;
        }
        return sum * std::exp(log_prefactor);
    }
    double b = x + 1.0 - a;
    double c = 1e308;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < 1000; ++i) {
        const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < 1e-300) d = 1e-300;
        c = b + an / c;
        if (std::abs(c) < 1e-300) c = 1e-300;
        d = 1.0 / d;
        const double delta = d * c;
        h *= delta;
        if (std::abs(delta - 1.0) < 1e-16) break;
    }
    return 1.0 - std::exp(log_prefactor) * h;
}

inline double chi2_cdf(double x, double dof) { return regularized_gamma_p(dof / 2.0, x / 2.0); }

/// Quantile of the chi-square distribution by bisection on the CDF.
inline double chi2_quantile(double p, double dof) {
    if (p <= 0.0 || p >= 1.0) throw config_error("chi2 quantile requires p in (0, 1)");
    double lo = 0.0;
    double hi = dof + 20.0 * std::sqrt(2.0 * dof) + 100.0;
    while (chi2_cdf(hi, dof) < p) hi *= 2.0;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (chi2_cdf(mid, dof) < p) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

struct chi_square_result {
    double statistic = 0.0;
    double dof = 0.0;
    double threshold = 0.0; // quantile at 1 - significance
    bool pass = false;
};

/// Pearson goodness-of-fit against given cell probabilities.
inline chi_square_result chi_square_gof(std::span<const std::int64_t> observed,
                                        std::span<const double> expected_probs,
                                        std::int64_t total, double significance) {
    if (observed.size() != expected_probs.size() || observed.empty()) {
        throw config_error("chi-square cells mismatch");
    }
    chi_square_result r;
    for (std::size_t i = 0; i < observed.size(); ++i) {
        const double expect = expected_probs[i] * static_cast<double>(total);
        if (expect <= 0.0) throw config_error("chi-square expected count must be positive");
        const double d = static_cast<double>(observed[i]) - expect;
        r.statistic += d * d / expect;
    }
    r.dof = static_cast<double>(observed.size() - 1);
    r.threshold = chi2_quantile(1.0 - significance, r.dof);
    r.pass = r.statistic <= r.threshold;
    return r;
}

struct linear_fit_result {
    double slope = 0.0;
    double intercept = 0.0;
};

inline linear_fit_result fit_line(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2) throw config_error("line fit needs >= 2 points");
    const auto n = static_cast<double>(x.size());
    kahan_sum sx, sy, sxx, sxy;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx.add(x[i]);
        sy.add(y[i]);
        sxx.add(x[i] * x[i]);
        sxy.add(x[i] * y[i]);
    }
    const double mx = sx.value() / n;
    const double my = sy.value() / n;
    const double denom = sxx.value() - n * mx * mx;
    linear_fit_result r;
    r.slope = (sxy.value() - n * mx * my) / denom;
    r.intercept = my - r.slope * mx;
    return r;
}

/// Empirical quantile (linear interpolation between order statistics).
inline double quantile_of_sorted(const std::vector<double>& sorted, double q) {
    if (sorted.empty()) throw config_error("quantile of empty sample");
    if (sorted.size() == 1) return sorted[0];
    const double h = q * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const auto hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = h - std::floor(h);
    return sorted[lo] * (1.0 - frac) + sorted[hi] * frac;
}

} // namespace kcm
