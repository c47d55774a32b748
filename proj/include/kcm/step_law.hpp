#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "kcm/core.hpp"
#include "kcm/errors.hpp"
#include "kcm/numeric.hpp"

namespace kcm {

/// Tail of the relative position when m cards remain and the minimum of k
/// uniform draws is taken: P(rank > j) = ((m-j)/m)^k for j in [0, m].
inline double relative_tail(std::int64_t m, std::int64_t k, std::int64_t j) {
    if (j <= 0) return 1.0;
    if (j >= m) return 0.0;
    return ipow(static_cast<double>(m - j) / static_cast<double>(m), static_cast<std::uint64_t>(k));
}

/// Tail of the per-step inversion count I with m cards remaining:
/// P(I > j) = ((m-1-j)/m)^k for j in [0, m-1]. I = rank - 1.
inline double inversion_tail(std::int64_t m, std::int64_t k, std::int64_t j) {
    return relative_tail(m, k, j + 1);
}

/// P(rank = j) for j = 1..m.
inline std::vector<double> relative_pmf(std::int64_t m, std::int64_t k) {
    std::vector<double> pmf(static_cast<std::size_t>(m));
    for (std::int64_t j = 1; j <= m; ++j) {
        pmf[static_cast<std::size_t>(j - 1)] = relative_tail(m, k, j - 1) - relative_tail(m, k, j);
    }
    return pmf;
}

/// Smallest j >= 1 with ((m-j)/m)^k < u, i.e. the inverse transform of the
/// relative-position law. Uses the closed form j = m - floor(m * u^(1/k)),
/// clamped to [1, m]; the result is verified against the tail inequality and
/// corrected by binary search in the rare case the closed form lands on a
/// floating-point boundary.
inline card_t inverse_cdf_rank(std::int64_t m, std::int64_t k, double u) {
    if (m == 1) return 1;
    const double root = std::pow(u, 1.0 / static_cast<double>(k));
    auto j = static_cast<std::int64_t>(static_cast<double>(m) -
                                       std::floor(static_cast<double>(m) * root));
    j = std::clamp<std::int64_t>(j, 1, m);
    if (relative_tail(m, k, j) < u && relative_tail(m, k, j - 1) >= u) {
        return static_cast<card_t>(j);
    }
    std::int64_t lo = 1, hi = m;
    while (lo < hi) {
        const std::int64_t mid = lo + (hi - lo) / 2;
        if (relative_tail(m, k, mid) < u) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    return static_cast<card_t>(lo);
}

} // namespace kcm
