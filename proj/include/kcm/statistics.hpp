#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

#include "kcm/core.hpp"
#include "kcm/errors.hpp"
#include "kcm/fenwick.hpp"
#include "kcm/numeric.hpp"
#include "kcm/step_law.hpp"

namespace kcm {

/// Exact inversion count (pairs i < j with sigma(i) > sigma(j)) by iterative
/// merge counting, O(n log n). Equals the adjacent-transposition distance to
/// the identity.
inline std::int64_t count_inversions(const permutation& perm) {
    std::vector<card_t> a = perm.cards();
    std::vector<card_t> buf(a.size());
    std::int64_t inversions = 0;
    const std::size_t n = a.size();
    for (std::size_t width = 1; width < n; width *= 2) {
        for (std::size_t lo = 0; lo + width < n; lo += 2 * width) {
            const std::size_t mid = lo + width;
            const std::size_t hi = std::min(lo + 2 * width, n);
            std::size_t i = lo, j = mid, out = lo;
            while (i < mid && j < hi) {
                if (a[i] <= a[j]) {
                    buf[out++] = a[i++];
                } else {
                    inversions += static_cast<std::int64_t>(mid - i);
                    buf[out++] = a[j++];
                }
            }
            while (i < mid) buf[out++] = a[i++];
            while (j < hi) buf[out++] = a[j++];
            std::copy(buf.begin() + static_cast<std::ptrdiff_t>(lo),
                      buf.begin() + static_cast<std::ptrdiff_t>(hi),
                      a.begin() + static_cast<std::ptrdiff_t>(lo));
        }
    }
    return inversions;
}

/// Per-step inversion contributions I_t = |{tau > t : C_t > C_tau}| for
/// t = 1..n-1, computed by scanning from the right with a prefix-count
/// structure (independently of the relative-position bookkeeping).
inline std::vector<std::int64_t> inversion_profile(const permutation& perm) {
    const card_t n = perm.size();
    if (n == 1) return {};
    rank_select_set later(n);
    later.clear();
    std::vector<std::int64_t> profile(static_cast<std::size_t>(n - 1), 0);
    for (card_t t = n; t >= 1; --t) {
        const card_t c = perm.at(t);
        if (t <= n - 1) {
            profile[static_cast<std::size_t>(t - 1)] = later.rank_of(c - 1);
        }
        later.insert(c);
    }
    return profile;
}

/// Length of the longest strictly increasing subsequence via patience
/// sorting, O(n log n). Equals n minus the reinsertion distance to identity.
inline card_t lis_length(const permutation& perm) {
    std::vector<card_t> tails;
    tails.reserve(64);
    for (card_t c : perm.cards()) {
        auto it = std::lower_bound(tails.begin(), tails.end(), c);
        if (it == tails.end()) {
            tails.push_back(c);
        } else {
            *it = c;
        }
    }
    return static_cast<card_t>(tails.size());
}

/// Fixed-k coefficients of the inversion asymptotics, as exact rationals:
/// mean coefficient 1/(2(k+1)) of n^2, variance coefficient
/// k/(3(k+1)^2(k+2)) of n^3.
struct asymptotic_constants {
    std::int64_t mean_num;
    std::int64_t mean_den;
    std::int64_t var_num;
    std::int64_t var_den;

    double mean_coeff() const {
        return static_cast<double>(mean_num) / static_cast<double>(mean_den);
    }
    double var_coeff() const {
        return static_cast<double>(var_num) / static_cast<double>(var_den);
    }
};

inline asymptotic_constants inversion_constants(std::int64_t k) {
    if (k < 1) throw config_error("k must be >= 1");
    const auto g = std::gcd<std::int64_t>(k, 6);
    const __int128 den128 = static_cast<__int128>(3) * (k + 1) * (k + 1) * (k + 2) / g;
    if (den128 > INT64_MAX) throw config_error("k too large for exact rational constants");
    return asymptotic_constants{1, 2 * (k + 1), k / g, static_cast<std::int64_t>(den128)};
}

struct moments {
    double mean = 0.0;
    double variance = 0.0;
};

/// Exact mean and variance of the step inversion count I_t, by direct
/// summation of the tail probabilities E(X) = sum P(X > j) and
/// E(X^2) = E(X) + sum 2j P(X > j). Terms below 1e-18 are dropped; they
/// decay geometrically there, so the truncation is far below double
/// round-off in the totals.
inline moments step_inversion_moments(std::int64_t n, std::int64_t k, std::int64_t t) {
    if (k < 1) throw config_error("k must be >= 1");
    if (t < 1 || t > n) throw config_error("t must be in [1, n]");
    const std::int64_t m = n - t + 1;
    if (m <= 1) return {};
    const auto inv_m = 1.0 / static_cast<double>(m);
    kahan_sum mean_acc;
    kahan_sum cross_acc;
    for (std::int64_t tau = m - 1; tau >= 1; --tau) {
        const double p = ipow(static_cast<double>(tau) * inv_m, static_cast<std::uint64_t>(k));
        if (p < 1e-18) break;
        mean_acc.add(p);
        cross_acc.add(static_cast<double>(m - 1 - tau) * p);
    }
    const double mean = mean_acc.value();
    const double second = mean + 2.0 * cross_acc.value();
    return {mean, second - mean * mean};
}

/// Exact mean and variance of the total inversion count I = sum_t I_t,
/// using independence of the per-step contributions.
inline moments total_inversion_moments(std::int64_t n, std::int64_t k) {
    if (n < 1) throw config_error("n must be >= 1");
    kahan_sum mean_acc;
    kahan_sum var_acc;
    for (std::int64_t t = 1; t < n; ++t) {
        const moments m = step_inversion_moments(n, k, t);
        mean_acc.add(m.mean);
        var_acc.add(m.variance);
    }
    return {mean_acc.value(), var_acc.value()};
}

/// Record of the greedy increasing-subsequence construction replayed on a
/// realized permutation: repeatedly target the lowest ceil(sqrt(n/k)) cards
/// above the last pick, stop at the first time one of them is removed.
struct greedy_record {
    card_t target_size = 0;
    std::vector<card_t> stop_times;     // T_1 < ... < T_M
    std::vector<card_t> picked_cards;   // C_{T_1} < ... < C_{T_M}
    std::vector<card_t> rank_in_target; // A_m, 1-based rank of the pick in its target set
    std::vector<std::int64_t> skipped_larger; // B_m, larger cards removed between stops

    std::int64_t count() const { return static_cast<std::int64_t>(picked_cards.size()); }
};

inline greedy_record greedy_lower_bound(const permutation& perm, std::int64_t k) {
    if (k < 1) throw config_error("k must be >= 1");
    const card_t n = perm.size();
    greedy_record rec;
    rec.target_size = static_cast<card_t>(
        std::ceil(std::sqrt(static_cast<double>(n) / static_cast<double>(k))));
    if (rec.target_size < 1) rec.target_size = 1;

    std::vector<card_t> removal_time(static_cast<std::size_t>(n) + 1, 0);
    for (card_t t = 1; t <= n; ++t) removal_time[static_cast<std::size_t>(perm.at(t))] = t;

    // candidates = R_{m-1}^+, the cards still in the deck after the previous
    // stop that are larger than the previous pick.
    rank_select_set candidates(n);
    card_t prev_time = 0;
    card_t prev_card = 0;
    std::vector<card_t> target;
    while (!candidates.empty()) {
        const card_t take = std::min<card_t>(rec.target_size, candidates.size());
        target.clear();
        for (card_t r = 1; r <= take; ++r) target.push_back(candidates.select(r));

        card_t stop_time = 0;
        card_t pick = 0;
        card_t pick_rank = 0;
        for (card_t r = 0; r < take; ++r) {
            const card_t c = target[static_cast<std::size_t>(r)];
            const card_t when = removal_time[static_cast<std::size_t>(c)];
            if (stop_time == 0 || when < stop_time) {
                stop_time = when;
                pick = c;
                pick_rank = r + 1;
            }
        }

        std::int64_t skipped = 0;
        for (card_t t = prev_time + 1; t <= stop_time; ++t) {
            const card_t c = perm.at(t);
            if (c > prev_card) {
                if (t < stop_time) ++skipped;
                candidates.erase(c);
            }
        }
        for (card_t c : target) {
            if (c < pick) candidates.erase(c);
        }

        rec.stop_times.push_back(stop_time);
        rec.picked_cards.push_back(pick);
        rec.rank_in_target.push_back(pick_rank);
        rec.skipped_larger.push_back(skipped);
        prev_time = stop_time;
        prev_card = pick;

        if (candidates.size() < rec.target_size) break;
    }
    return rec;
}

/// Copy of a relative sequence with coordinate t replaced by new_rank.
inline relative_seq perturb_relative(const relative_seq& rel, card_t t, card_t new_rank) {
    const card_t n = rel.size();
    if (t < 1 || t > n) {
        throw validation_error("perturbation time " + std::to_string(t) + " out of range [1, " +
                               std::to_string(n) + "]");
    }
    if (new_rank < 1 || new_rank > n - t + 1) {
        throw validation_error("perturbation rank " + std::to_string(new_rank) +
                               " out of range [1, " + std::to_string(n - t + 1) + "] at index " +
                               std::to_string(t));
    }
    std::vector<card_t> values = rel.values();
    values[static_cast<std::size_t>(t - 1)] = new_rank;
    return relative_seq(std::move(values));
}

} // namespace kcm
