#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <map>
#include <mutex>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <fftw3.h>

#include "kcm/core.hpp"
#include "kcm/errors.hpp"
#include "kcm/numeric.hpp"
#include "kcm/statistics.hpp"
#include "kcm/step_law.hpp"
#include "kcm/strategies.hpp"

namespace kcm {

/// A finite probability vector: probs[i] is the probability of the value
/// support_offset + i.
struct exact_pmf {
    std::int64_t support_offset = 0;
    std::vector<double> probs;

    double mean() const {
        kahan_sum s;
        for (std::size_t i = 0; i < probs.size(); ++i) {
            s.add(static_cast<double>(support_offset + static_cast<std::int64_t>(i)) * probs[i]);
        }
        return s.value();
    }

    double variance() const {
        const double m = mean();
        kahan_sum s;
        for (std::size_t i = 0; i < probs.size(); ++i) {
            const double d = static_cast<double>(support_offset + static_cast<std::int64_t>(i)) - m;
            s.add(d * d * probs[i]);
        }
        return s.value();
    }

    double total_mass() const {
        kahan_sum s;
        for (double p : probs) s.add(p);
        return s.value();
    }
};

/// Exact integer-numerator pmf over {0, 1, ...}: value i has probability
/// numerators[i] / denominator.
struct rational_pmf {
    std::int64_t denominator = 1;
    std::vector<std::int64_t> numerators;

    double mean() const {
        kahan_sum s;
        for (std::size_t i = 0; i < numerators.size(); ++i) {
            s.add(static_cast<double>(i) * static_cast<double>(numerators[i]));
        }
        return s.value() / static_cast<double>(denominator);
    }
};

namespace detail {

inline std::vector<double> convolve_direct(const std::vector<double>& a,
                                           const std::vector<double>& b) {
    std::vector<double> out(a.size() + b.size() - 1, 0.0);
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double ai = a[i];
        if (ai == 0.0) continue;
        for (std::size_t j = 0; j < b.size(); ++j) {
            out[i + j] += ai * b[j];
        }
    }
    return out;
}

/// Smallest 5-smooth integer >= x; FFTW is fast at these sizes.
inline std::size_t next_fast_size(std::size_t x) {
    for (std::size_t n = x;; ++n) {
        std::size_t r = n;
        for (std::size_t f : {2, 3, 5}) {
            while (r % f == 0) r /= f;
        }
        if (r == 1) return n;
    }
}

inline std::vector<double> convolve_fft(const std::vector<double>& a,
                                        const std::vector<double>& b) {
    const std::size_t out_size = a.size() + b.size() - 1;
    const std::size_t n = next_fast_size(out_size);
    std::vector<double> ta(n, 0.0), tb(n, 0.0);
    std::copy(a.begin(), a.end(), ta.begin());
    std::copy(b.begin(), b.end(), tb.begin());
    std::vector<std::complex<double>> fa(n / 2 + 1), fb(n / 2 + 1);

    // FFTW plan creation is not thread-safe; execution is.
    static std::mutex plan_mutex;
    fftw_plan fwd_a, fwd_b, bwd;
    {
        std::lock_guard<std::mutex> lock(plan_mutex);
        fwd_a = fftw_plan_dft_r2c_1d(static_cast<int>(n), ta.data(),
                                     reinterpret_cast<fftw_complex*>(fa.data()), FFTW_ESTIMATE);
        fwd_b = fftw_plan_dft_r2c_1d(static_cast<int>(n), tb.data(),
                                     reinterpret_cast<fftw_complex*>(fb.data()), FFTW_ESTIMATE);
        bwd = fftw_plan_dft_c2r_1d(static_cast<int>(n),
                                   reinterpret_cast<fftw_complex*>(fa.data()), ta.data(),
                                   FFTW_ESTIMATE);
    }
    fftw_execute(fwd_a);
    fftw_execute(fwd_b);
    for (std::size_t i = 0; i < fa.size(); ++i) fa[i] *= fb[i];
    fftw_execute(bwd);
    {
        std::lock_guard<std::mutex> lock(plan_mutex);
        fftw_destroy_plan(fwd_a);
        fftw_destroy_plan(fwd_b);
        fftw_destroy_plan(bwd);
    }

    std::vector<double> out(out_size);
    const double scale = 1.0 / static_cast<double>(n);
    for (std::size_t i = 0; i < out_size; ++i) {
        out[i] = std::max(0.0, ta[i] * scale);
    }
    return out;
}

constexpr std::size_t kDirectCostLimit = std::size_t{1} << 22;

/// Drop negligible leading/trailing entries, shifting the offset.
inline void trim(std::vector<double>& probs, std::int64_t& offset, double rel_floor) {
    double peak = 0.0;
    for (double p : probs) peak = std::max(peak, p);
    const double floor = peak * rel_floor;
    std::size_t lo = 0;
    while (lo + 1 < probs.size() && probs[lo] < floor) ++lo;
    std::size_t hi = probs.size();
    while (hi > lo + 1 && probs[hi - 1] < floor) --hi;
    if (lo > 0 || hi < probs.size()) {
        probs = std::vector<double>(probs.begin() + static_cast<std::ptrdiff_t>(lo),
                                    probs.begin() + static_cast<std::ptrdiff_t>(hi));
        offset += static_cast<std::int64_t>(lo);
    }
}

/// Convolve the step pmfs for t in [t_lo, t_hi] (deck sizes n-t+1) by
/// balanced divide and conquer, switching to FFT on large products and
/// trimming numerically irrelevant tails.
inline std::pair<std::vector<double>, std::int64_t> convolve_steps(card_t n, std::int64_t k,
                                                                   card_t t_lo, card_t t_hi) {
    if (t_lo == t_hi) {
        std::vector<double> step(static_cast<std::size_t>(n - t_lo + 1));
        const std::int64_t m = n - t_lo + 1;
        for (std::int64_t j = 0; j < m; ++j) {
            step[static_cast<std::size_t>(j)] =
                inversion_tail(m, k, j - 1) - inversion_tail(m, k, j);
        }
        std::int64_t offset = 0;
        trim(step, offset, 1e-20);
        return {std::move(step), offset};
    }
    const card_t mid = t_lo + (t_hi - t_lo) / 2;
    auto [left, left_off] = convolve_steps(n, k, t_lo, mid);
    auto [right, right_off] = convolve_steps(n, k, mid + 1, t_hi);
    std::vector<double> combined;
    if (left.size() * right.size() <= kDirectCostLimit) {
        combined = convolve_direct(left, right);
    } else {
        combined = convolve_fft(left, right);
    }
    std::int64_t offset = left_off + right_off;
    trim(combined, offset, 1e-20);
    return {std::move(combined), offset};
}

} // namespace detail

/// Exact law of the total inversion count, as the convolution of the n-1
/// independent per-step laws. Full support (no trimming) up to n = 320;
/// beyond that a divide-and-conquer/FFT path is used and entries below
/// 1e-20 of the peak are dropped. Guarded at n <= 2000.
inline exact_pmf inversion_pmf(card_t n, std::int64_t k) {
    if (n < 1) throw config_error("n must be >= 1");
    if (k < 1) throw config_error("k must be >= 1");
    if (n > 2000) {
        throw size_error("inversion pmf support n(n-1)/2 is infeasible beyond n = 2000");
    }
    exact_pmf result;
    result.support_offset = 0;
    if (n == 1) {
        result.probs = {1.0};
        return result;
    }
    if (n <= 320) {
        std::vector<double> acc{1.0};
        for (card_t t = 1; t <= n - 1; ++t) {
            const std::int64_t m = n - t + 1;
            std::vector<double> step(static_cast<std::size_t>(m));
            for (std::int64_t j = 0; j < m; ++j) {
                step[static_cast<std::size_t>(j)] =
                    inversion_tail(m, k, j - 1) - inversion_tail(m, k, j);
            }
            acc = detail::convolve_direct(acc, step);
        }
        result.probs = std::move(acc);
        return result;
    }
    auto [probs, offset] = detail::convolve_steps(n, k, 1, n - 1);
    result.probs = std::move(probs);
    result.support_offset = offset;
    return result;
}

/// Exact rational law of the total inversion count with common denominator
/// (n!)^k. Guarded so the denominator fits in 62 bits.
inline rational_pmf inversion_pmf_rational(card_t n, std::int64_t k) {
    if (n < 1) throw config_error("n must be >= 1");
    if (k < 1) throw config_error("k must be >= 1");
    double log2_den = 0.0;
    for (card_t m = 2; m <= n; ++m) {
        log2_den += static_cast<double>(k) * std::log2(static_cast<double>(m));
    }
    if (log2_den > 62.0) {
        throw size_error("rational pmf denominator (n!)^k exceeds 62 bits");
    }
    rational_pmf result;
    result.denominator = 1;
    result.numerators = {1};
    for (card_t t = 1; t + 1 <= n; ++t) {
        const std::int64_t m = n - t + 1;
        std::int64_t mk = 1;
        for (std::int64_t i = 0; i < k; ++i) mk *= m;
        std::vector<std::int64_t> step(static_cast<std::size_t>(m));
        std::int64_t prev = mk; // (m - j)^k at j = 0 is m^k
        for (std::int64_t j = 1; j <= m; ++j) {
            std::int64_t cur = 1;
            for (std::int64_t i = 0; i < k; ++i) cur *= (m - j);
            step[static_cast<std::size_t>(j - 1)] = prev - cur;
            prev = cur;
        }
        std::vector<std::int64_t> next(result.numerators.size() + step.size() - 1, 0);
        for (std::size_t i = 0; i < result.numerators.size(); ++i) {
            if (result.numerators[i] == 0) continue;
            for (std::size_t j = 0; j < step.size(); ++j) {
                next[i + j] += result.numerators[i] * step[j];
            }
        }
        result.numerators = std::move(next);
        result.denominator *= mk;
    }
    return result;
}

/// Exhaustive joint law of (inversions, LIS length) for a strategy, walking
/// every ordered draw tuple of the process. All leaves are equiprobable, so
/// counts over the (n!)^k leaves give the law exactly.
struct enumeration_result {
    card_t n = 0;
    std::int64_t k = 0;
    std::string strategy_name;
    std::int64_t total = 0;                       // (n!)^k
    std::int64_t max_inversions = 0;              // n(n-1)/2
    std::vector<std::int64_t> joint;              // [(max_inv+1) x n], count of (I = i, L = l)
    std::vector<std::int64_t> inversion_marginal; // index i
    std::vector<std::int64_t> lis_marginal;       // index l-1

    std::int64_t joint_count(std::int64_t inversions, card_t lis) const {
        return joint[static_cast<std::size_t>(inversions) * static_cast<std::size_t>(n) +
                     static_cast<std::size_t>(lis - 1)];
    }

    double mean_inversions() const { return marginal_mean(inversion_marginal, 0); }
    double mean_lis() const { return marginal_mean(lis_marginal, 1); }

    double var_inversions() const { return marginal_var(inversion_marginal, 0); }
    double var_lis() const { return marginal_var(lis_marginal, 1); }

private:
    double marginal_mean(const std::vector<std::int64_t>& counts, std::int64_t base) const {
        kahan_sum s;
        for (std::size_t i = 0; i < counts.size(); ++i) {
            s.add(static_cast<double>(base + static_cast<std::int64_t>(i)) *
                  static_cast<double>(counts[i]));
        }
        return s.value() / static_cast<double>(total);
    }
    double marginal_var(const std::vector<std::int64_t>& counts, std::int64_t base) const {
        const double m = marginal_mean(counts, base);
        kahan_sum s;
        for (std::size_t i = 0; i < counts.size(); ++i) {
            const double d = static_cast<double>(base + static_cast<std::int64_t>(i)) - m;
            s.add(d * d * static_cast<double>(counts[i]));
        }
        return s.value() / static_cast<double>(total);
    }
};

namespace detail {

inline std::int64_t enumeration_leaf_count(card_t n, std::int64_t k) {
    double leaves = 1.0;
    for (card_t m = 2; m <= n; ++m) {
        leaves *= std::pow(static_cast<double>(m), static_cast<double>(k));
        if (leaves > 2e7) return -1;
    }
    std::int64_t exact = 1;
    for (card_t m = 2; m <= n; ++m) {
        for (std::int64_t i = 0; i < k; ++i) exact *= m;
    }
    return exact;
}

class enumeration_walker {
public:
    enumeration_walker(card_t n, std::int64_t k, const choice_strategy& strategy,
                       std::vector<std::int64_t>& joint)
        : n_(n), k_(k), strategy_(&strategy), joint_(&joint) {
        deck_.resize(static_cast<std::size_t>(n));
        for (card_t c = 1; c <= n; ++c) deck_[static_cast<std::size_t>(c - 1)] = c;
        history_.reserve(static_cast<std::size_t>(n));
        draws_stack_.assign(static_cast<std::size_t>(n),
                            std::vector<card_t>(static_cast<std::size_t>(k)));
        tails_.reserve(static_cast<std::size_t>(n));
    }

    /// Walk the subtree of first-step tuples with linear indices in
    /// [first_lo, first_hi). The first-step tuple index is decoded in base n.
    void walk_range(std::int64_t first_lo, std::int64_t first_hi) {
        for (std::int64_t idx = first_lo; idx < first_hi; ++idx) {
            std::int64_t rem = idx;
            auto& draws = draws_stack_[0];
            for (std::int64_t i = 0; i < k_; ++i) {
                draws[static_cast<std::size_t>(i)] = deck_[static_cast<std::size_t>(rem % n_)];
                rem /= n_;
            }
            descend();
        }
    }

private:
    void descend() {
        const auto& draws = draws_stack_[history_.size()];
        const strategy_context ctx{n_, k_, history_, draws};
        const card_t chosen = strategy_->select(ctx);
        if (std::find(draws.begin(), draws.end(), chosen) == draws.end()) {
            throw contract_violation("strategy '" + std::string(strategy_->name()) +
                                     "' returned a card not among its draws at t=" +
                                     std::to_string(ctx.time()));
        }
        const auto it = std::lower_bound(deck_.begin(), deck_.end(), chosen);
        const auto rank0 = static_cast<std::int64_t>(it - deck_.begin());
        inversions_ += rank0;
        deck_.erase(it);
        history_.push_back(chosen);

        if (deck_.empty()) {
            record_leaf();
        } else {
            const auto m = static_cast<std::int64_t>(deck_.size());
            std::int64_t tuples = 1;
            for (std::int64_t i = 0; i < k_; ++i) tuples *= m;
            auto& next_draws = draws_stack_[history_.size()];
            for (std::int64_t idx = 0; idx < tuples; ++idx) {
                std::int64_t rem = idx;
                for (std::int64_t i = 0; i < k_; ++i) {
                    next_draws[static_cast<std::size_t>(i)] =
                        deck_[static_cast<std::size_t>(rem % m)];
                    rem /= m;
                }
                descend();
            }
        }

        history_.pop_back();
        deck_.insert(std::lower_bound(deck_.begin(), deck_.end(), chosen), chosen);
        inversions_ -= rank0;
    }

    void record_leaf() {
        tails_.clear();
        for (card_t c : history_) {
            auto it = std::lower_bound(tails_.begin(), tails_.end(), c);
            if (it == tails_.end()) {
                tails_.push_back(c);
            } else {
                *it = c;
            }
        }
        const auto lis = static_cast<std::int64_t>(tails_.size());
        (*joint_)[static_cast<std::size_t>(inversions_) * static_cast<std::size_t>(n_) +
                  static_cast<std::size_t>(lis - 1)] += 1;
    }

    card_t n_;
    std::int64_t k_;
    const choice_strategy* strategy_;
    std::vector<std::int64_t>* joint_;
    std::vector<card_t> deck_;
    std::vector<card_t> history_;
    std::vector<std::vector<card_t>> draws_stack_; // one draw buffer per depth
    std::vector<card_t> tails_;
    std::int64_t inversions_ = 0;
};

} // namespace detail

inline enumeration_result enumerate_strategy(card_t n, std::int64_t k,
                                             const choice_strategy& strategy, int workers = 1) {
    if (n < 1) throw config_error("n must be >= 1");
    if (k < 1) throw config_error("k must be >= 1");
    const std::int64_t total = detail::enumeration_leaf_count(n, k);
    if (total < 0) {
        throw size_error("enumeration leaf count (n!)^k exceeds the feasibility guard");
    }

    enumeration_result result;
    result.n = n;
    result.k = k;
    result.strategy_name = std::string(strategy.name());
    result.total = total;
    result.max_inversions = static_cast<std::int64_t>(n) * (n - 1) / 2;
    const std::size_t joint_size =
        static_cast<std::size_t>(result.max_inversions + 1) * static_cast<std::size_t>(n);

    std::int64_t first_tuples = 1;
    for (std::int64_t i = 0; i < k; ++i) first_tuples *= n;
    const int used = std::max(1, std::min<int>(workers, static_cast<int>(first_tuples)));

    std::vector<std::vector<std::int64_t>> partials(
        static_cast<std::size_t>(used), std::vector<std::int64_t>(joint_size, 0));
    {
        std::vector<std::thread> pool;
        for (int w = 0; w < used; ++w) {
            const std::int64_t lo = first_tuples * w / used;
            const std::int64_t hi = first_tuples * (w + 1) / used;
            pool.emplace_back([&, w, lo, hi] {
                detail::enumeration_walker walker(n, k, strategy,
                                                  partials[static_cast<std::size_t>(w)]);
                walker.walk_range(lo, hi);
            });
        }
        for (auto& th : pool) th.join();
    }

    result.joint.assign(joint_size, 0);
    for (const auto& part : partials) {
        for (std::size_t i = 0; i < joint_size; ++i) result.joint[i] += part[i];
    }

    result.inversion_marginal.assign(static_cast<std::size_t>(result.max_inversions + 1), 0);
    result.lis_marginal.assign(static_cast<std::size_t>(n), 0);
    for (std::int64_t i = 0; i <= result.max_inversions; ++i) {
        for (card_t l = 1; l <= n; ++l) {
            const std::int64_t c = result.joint_count(i, l);
            result.inversion_marginal[static_cast<std::size_t>(i)] += c;
            result.lis_marginal[static_cast<std::size_t>(l - 1)] += c;
        }
    }

    // For the minimum strategy the inversion marginal has an independent
    // exact description; insist the two agree.
    if (result.strategy_name == "min") {
        const rational_pmf pmf = inversion_pmf_rational(n, k);
        for (std::int64_t i = 0; i <= result.max_inversions; ++i) {
            const std::int64_t expect =
                i < static_cast<std::int64_t>(pmf.numerators.size())
                    ? pmf.numerators[static_cast<std::size_t>(i)]
                    : 0;
            if (result.inversion_marginal[static_cast<std::size_t>(i)] != expect) {
                throw error("enumeration and convolution disagree on P(I = " +
                            std::to_string(i) + ") at n=" + std::to_string(n) +
                            ", k=" + std::to_string(k));
            }
        }
    }
    return result;
}

/// Exact expected LIS length under the minimum strategy, by enumerating all
/// relative-position sequences with their product probabilities. Feasible to
/// n = 9; an independent route from enumerate_strategy.
inline double exact_expected_lis(card_t n, std::int64_t k) {
    if (n < 1) throw config_error("n must be >= 1");
    if (k < 1) throw config_error("k must be >= 1");
    if (n > 9) throw size_error("relative-sequence enumeration is guarded at n <= 9");

    std::vector<std::vector<double>> step_pmfs(static_cast<std::size_t>(n) + 1);
    for (card_t m = 1; m <= n; ++m) {
        step_pmfs[static_cast<std::size_t>(m)] = relative_pmf(m, k);
    }

    std::vector<card_t> deck(static_cast<std::size_t>(n));
    for (card_t c = 1; c <= n; ++c) deck[static_cast<std::size_t>(c - 1)] = c;
    std::vector<card_t> history;
    history.reserve(static_cast<std::size_t>(n));
    std::vector<card_t> tails;
    kahan_sum expectation;

    auto lis_of_history = [&]() {
        tails.clear();
        for (card_t c : history) {
            auto it = std::lower_bound(tails.begin(), tails.end(), c);
            if (it == tails.end()) {
                tails.push_back(c);
            } else {
                *it = c;
            }
        }
        return static_cast<double>(tails.size());
    };

    auto walk = [&](auto&& self, double weight) -> void {
        if (deck.empty()) {
            expectation.add(weight * lis_of_history());
            return;
        }
        const auto m = static_cast<card_t>(deck.size());
        const auto& pmf = step_pmfs[static_cast<std::size_t>(m)];
        for (card_t j = 1; j <= m; ++j) {
            const card_t c = deck[static_cast<std::size_t>(j - 1)];
            deck.erase(deck.begin() + (j - 1));
            history.push_back(c);
            self(self, weight * pmf[static_cast<std::size_t>(j - 1)]);
            history.pop_back();
            deck.insert(deck.begin() + (j - 1), c);
        }
    };
    walk(walk, 1.0);
    return expectation.value();
}

} // namespace kcm
