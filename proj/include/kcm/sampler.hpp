#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "kcm/core.hpp"
#include "kcm/errors.hpp"
#include "kcm/rng.hpp"
#include "kcm/step_law.hpp"

namespace kcm {

/// How the per-step relative position is sampled. Both modes realize the same
/// law; direct_draws costs k random numbers per step, inverse_cdf costs one.
enum class sample_mode {
    direct_draws,
    inverse_cdf,
};

/// inverse_cdf wins once k dwarfs the per-draw cost.
inline sample_mode default_mode(std::int64_t k) {
    return k > 64 ? sample_mode::inverse_cdf : sample_mode::direct_draws;
}

inline const char* to_string(sample_mode m) {
    return m == sample_mode::direct_draws ? "direct" : "inverse";
}

struct sampler_config {
    card_t n = 1;
    std::int64_t k = 1;
    sample_mode mode = sample_mode::direct_draws;
    std::uint64_t seed = 0;

    void validate() const {
        if (n < 1) throw config_error("deck size n must be >= 1");
        if (k < 1) throw config_error("choice count k must be >= 1");
    }
};

/// The raw randomness of one run: for each time t, the k draw positions
/// within the remaining deck (values in [1, n-t+1], repeats allowed).
/// Replaying these ranks under different strategies is the coupling used
/// for dominance comparisons.
struct draw_trace {
    card_t n = 0;
    std::int64_t k = 0;
    std::vector<card_t> ranks; // t-major, n*k entries

    const card_t* row(card_t t) const {
        return ranks.data() + static_cast<std::size_t>(t - 1) * static_cast<std::size_t>(k);
    }

    void validate() const {
        if (n < 1 || k < 1) throw validation_error("trace must have n >= 1 and k >= 1");
        if (ranks.size() != static_cast<std::size_t>(n) * static_cast<std::size_t>(k)) {
            throw validation_error("trace has wrong number of ranks");
        }
        for (card_t t = 1; t <= n; ++t) {
            const card_t* r = row(t);
            for (std::int64_t i = 0; i < k; ++i) {
                if (r[i] < 1 || r[i] > n - t + 1) {
                    throw validation_error("trace rank out of range at t=" + std::to_string(t));
                }
            }
        }
    }
};

/// Sample the relative-position sequence of a k-card-minimum run directly,
/// using the independence of the coordinates. O(n k) in direct mode,
/// O(n log n) worst case in inverse mode.
inline relative_seq sample_relative(const sampler_config& cfg) {
    cfg.validate();
    xoshiro256pp rng(cfg.seed);
    std::vector<card_t> rel(static_cast<std::size_t>(cfg.n));
    for (card_t t = 1; t <= cfg.n; ++t) {
        const std::int64_t m = cfg.n - t + 1;
        card_t pos;
        if (cfg.mode == sample_mode::direct_draws) {
            std::uint64_t best = rng.next_below(static_cast<std::uint64_t>(m));
            for (std::int64_t i = 1; i < cfg.k; ++i) {
                const std::uint64_t draw = rng.next_below(static_cast<std::uint64_t>(m));
                if (draw < best) best = draw;
            }
            pos = static_cast<card_t>(best + 1);
        } else {
            pos = inverse_cdf_rank(m, cfg.k, rng.next_unit());
        }
        rel[static_cast<std::size_t>(t - 1)] = pos;
    }
    return relative_seq(std::move(rel));
}

/// One permutation with the k-card-minimum law. Deterministic in
/// (seed, mode, n, k); in direct mode it consumes randomness exactly like
/// sample_trace, so replaying that trace under the minimum strategy
/// reproduces this output.
inline permutation sample_kcm(const sampler_config& cfg) {
    return relative_to_permutation(sample_relative(cfg));
}

/// The full k draw ranks per step, for later replay under any strategy.
inline draw_trace sample_trace(const sampler_config& cfg) {
    cfg.validate();
    xoshiro256pp rng(cfg.seed);
    draw_trace trace;
    trace.n = cfg.n;
    trace.k = cfg.k;
    trace.ranks.resize(static_cast<std::size_t>(cfg.n) * static_cast<std::size_t>(cfg.k));
    std::size_t out = 0;
    for (card_t t = 1; t <= cfg.n; ++t) {
        const auto m = static_cast<std::uint64_t>(cfg.n - t + 1);
        for (std::int64_t i = 0; i < cfg.k; ++i) {
            trace.ranks[out++] = static_cast<card_t>(rng.next_below(m) + 1);
        }
    }
    return trace;
}

} // namespace kcm
