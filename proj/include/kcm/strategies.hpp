#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "kcm/core.hpp"
#include "kcm/errors.hpp"
#include "kcm/fenwick.hpp"
#include "kcm/sampler.hpp"

namespace kcm {

/// What a choice rule sees at time t: the removal history and the k offered
/// cards (actual card values, repeats possible).
struct strategy_context {
    card_t n = 0;
    std::int64_t k = 0;
    std::span<const card_t> history; // c_1, ..., c_{t-1}
    std::span<const card_t> draws;   // c_{t,1}, ..., c_{t,k}

    card_t time() const { return static_cast<card_t>(history.size()) + 1; }
};

/// An online selection rule: given the context, pick one of the offered
/// draws. Strategies are deterministic and stateless.
class choice_strategy {
public:
    virtual ~choice_strategy() = default;
    virtual card_t select(const strategy_context& ctx) const = 0;
    virtual std::string_view name() const = 0;
};

/// Always take the lowest offered card.
class min_strategy final : public choice_strategy {
public:
    card_t select(const strategy_context& ctx) const override {
        return *std::min_element(ctx.draws.begin(), ctx.draws.end());
    }
    std::string_view name() const override { return "min"; }
};

/// Always take the highest offered card (antipode baseline).
class max_strategy final : public choice_strategy {
public:
    card_t select(const strategy_context& ctx) const override {
        return *std::max_element(ctx.draws.begin(), ctx.draws.end());
    }
    std::string_view name() const override { return "max"; }
};

/// Always take the first draw. Since each draw is uniform on the remaining
/// deck, this reproduces the uniform permutation law for every k.
class uniform_strategy final : public choice_strategy {
public:
    card_t select(const strategy_context& ctx) const override { return ctx.draws.front(); }
    std::string_view name() const override { return "uniform"; }
};

/// Mimics the minimum strategy except in one hand-picked situation: the
/// history is exactly (2, 3, ..., n-2) and the offered cards are copies of
/// 1 and n-1 with both values present. Then it takes n-1, locking in the
/// increasing run (2, ..., n-1, n) instead of gambling on card 1. Defined
/// only for n >= 4, k >= 2.
class copy_strategy final : public choice_strategy {
public:
    card_t select(const strategy_context& ctx) const override {
        if (ctx.n < 4 || ctx.k < 2) {
            throw config_error("copy strategy requires n >= 4 and k >= 2");
        }
        if (triggered(ctx)) return ctx.n - 1;
        return *std::min_element(ctx.draws.begin(), ctx.draws.end());
    }
    std::string_view name() const override { return "copy"; }

private:
    static bool triggered(const strategy_context& ctx) {
        if (static_cast<card_t>(ctx.history.size()) != ctx.n - 3) return false;
        for (std::size_t i = 0; i < ctx.history.size(); ++i) {
            if (ctx.history[i] != static_cast<card_t>(i) + 2) return false;
        }
        bool saw_low = false;
        bool saw_high = false;
        for (card_t c : ctx.draws) {
            if (c == 1) {
                saw_low = true;
            } else if (c == ctx.n - 1) {
                saw_high = true;
            } else {
                return false;
            }
        }
        return saw_low && saw_high;
    }
};

/// Adapter for ad-hoc selection rules.
class function_strategy final : public choice_strategy {
public:
    using select_fn = std::function<card_t(const strategy_context&)>;

    function_strategy(std::string name, select_fn fn)
        : name_(std::move(name)), fn_(std::move(fn)) {}

    card_t select(const strategy_context& ctx) const override { return fn_(ctx); }
    std::string_view name() const override { return name_; }

private:
    std::string name_;
    select_fn fn_;
};

inline const choice_strategy& strategy_by_name(std::string_view id) {
    static const min_strategy min_s;
    static const max_strategy max_s;
    static const uniform_strategy uniform_s;
    static const copy_strategy copy_s;
    if (id == "min") return min_s;
    if (id == "max") return max_s;
    if (id == "uniform") return uniform_s;
    if (id == "copy") return copy_s;
    throw config_error("unknown strategy: " + std::string(id));
}

/// Replay one trace under several strategies at once, resolving each shared
/// draw rank to the j-th lowest card of each strategy's own remaining deck.
/// This is the coupling under which the minimum strategy is pointwise best
/// for inversions.
inline std::vector<permutation> coupled_replay(std::span<const choice_strategy* const> strategies,
                                               const draw_trace& trace) {
    trace.validate();
    const card_t n = trace.n;
    const std::int64_t k = trace.k;
    const std::size_t count = strategies.size();

    std::vector<rank_select_set> decks;
    decks.reserve(count);
    for (std::size_t s = 0; s < count; ++s) decks.emplace_back(n);
    std::vector<std::vector<card_t>> histories(count);
    for (auto& h : histories) h.reserve(static_cast<std::size_t>(n));
    std::vector<card_t> draws(static_cast<std::size_t>(k));

    for (card_t t = 1; t <= n; ++t) {
        const card_t* ranks = trace.row(t);
        for (std::size_t s = 0; s < count; ++s) {
            for (std::int64_t i = 0; i < k; ++i) {
                draws[static_cast<std::size_t>(i)] = decks[s].select(ranks[i]);
            }
            const strategy_context ctx{n, k, histories[s], draws};
            const card_t chosen = strategies[s]->select(ctx);
            if (std::find(draws.begin(), draws.end(), chosen) == draws.end()) {
                throw contract_violation("strategy '" + std::string(strategies[s]->name()) +
                                         "' returned a card not among its draws at t=" +
                                         std::to_string(t));
            }
            decks[s].erase(chosen);
            histories[s].push_back(chosen);
        }
    }

    std::vector<permutation> out;
    out.reserve(count);
    for (auto& h : histories) out.emplace_back(std::move(h));
    return out;
}

/// Replay a trace under a single strategy.
inline permutation replay_trace(const choice_strategy& strategy, const draw_trace& trace) {
    const choice_strategy* ptr = &strategy;
    return std::move(coupled_replay(std::span(&ptr, 1), trace).front());
}

/// Replay the same draw ranks under two strategies, returning both outcomes.
inline std::pair<permutation, permutation> coupled_run(const choice_strategy& a,
                                                       const choice_strategy& b,
                                                       const draw_trace& trace) {
    const choice_strategy* ptrs[2] = {&a, &b};
    auto results = coupled_replay(std::span<const choice_strategy* const>(ptrs, 2), trace);
    return {std::move(results[0]), std::move(results[1])};
}

} // namespace kcm
