#include <catch2/catch_amalgamated.hpp>

#include <vector>

#include "kcm/statistics.hpp"
#include "kcm/strategies.hpp"

using namespace kcm;

namespace {

card_t select(const choice_strategy& s, card_t n, std::int64_t k,
              std::vector<card_t> history, std::vector<card_t> draws) {
    const strategy_context ctx{n, k, history, draws};
    return s.select(ctx);
}

/// Deliberately broken rule for exercising the runtime contract check.
class rogue_strategy final : public choice_strategy {
public:
    card_t select(const strategy_context& ctx) const override {
        return ctx.n + 1; // never a legal draw
    }
    std::string_view name() const override { return "rogue"; }
};

} // namespace

TEST_CASE("min, max and uniform selections", "[strategies]") {
    const auto& min_s = strategy_by_name("min");
    const auto& max_s = strategy_by_name("max");
    const auto& uni_s = strategy_by_name("uniform");
    CHECK(select(min_s, 9, 3, {}, {4, 2, 7}) == 2);
    CHECK(select(min_s, 9, 2, {1}, {5, 5}) == 5);
    CHECK(select(min_s, 9, 1, {}, {9}) == 9);
    CHECK(select(max_s, 9, 3, {}, {4, 2, 7}) == 7);
    CHECK(select(uni_s, 9, 3, {}, {4, 2, 7}) == 4);
    // With one draw every strategy must agree.
    for (const char* id : {"min", "max", "uniform"}) {
        CHECK(select(strategy_by_name(id), 9, 1, {3}, {6}) == 6);
    }
    CHECK_THROWS_AS(strategy_by_name("nope"), config_error);
}

TEST_CASE("copy strategy trigger and fallbacks", "[strategies]") {
    const auto& copy_s = strategy_by_name("copy");
    CHECK(select(copy_s, 4, 2, {2}, {1, 3}) == 3);
    CHECK(select(copy_s, 4, 2, {2}, {3, 1}) == 3);
    CHECK(select(copy_s, 4, 2, {2}, {1, 1}) == 1);
    CHECK(select(copy_s, 4, 2, {2}, {3, 3}) == 3); // value set is {3} alone: falls back to min
    CHECK(select(copy_s, 5, 2, {2, 4}, {1, 4}) == 1);   // history is not (2, 3)
    CHECK(select(copy_s, 5, 2, {2, 3}, {1, 4}) == 4);
    CHECK(select(copy_s, 5, 3, {2, 3}, {1, 4, 4}) == 4); // repeats allowed in the trigger
    CHECK(select(copy_s, 5, 3, {2, 3}, {1, 5, 4}) == 1); // a third value breaks the trigger
    CHECK_THROWS_AS(select(copy_s, 3, 2, {}, {1, 2}), config_error);
    CHECK_THROWS_AS(select(copy_s, 6, 1, {}, {1}), config_error);
}

TEST_CASE("coupled run of a strategy against itself is an identity", "[strategies]") {
    const sampler_config cfg{30, 3, sample_mode::direct_draws, 2024};
    const draw_trace trace = sample_trace(cfg);
    const auto [a, b] = coupled_run(strategy_by_name("min"), strategy_by_name("min"), trace);
    CHECK(a == b);

    const sampler_config tiny{2, 1, sample_mode::direct_draws, 5};
    draw_trace manual;
    manual.n = 2;
    manual.k = 1;
    manual.ranks = {1, 1};
    const auto [x, y] = coupled_run(strategy_by_name("min"), strategy_by_name("max"), manual);
    CHECK(x == permutation::identity(2));
    CHECK(y == permutation::identity(2));
    (void)tiny;
}

TEST_CASE("contract violations name the strategy and the time", "[strategies][errors]") {
    const rogue_strategy rogue;
    const sampler_config cfg{5, 2, sample_mode::direct_draws, 1};
    const draw_trace trace = sample_trace(cfg);
    CHECK_THROWS_WITH(coupled_run(strategy_by_name("min"), rogue, trace),
                      Catch::Matchers::ContainsSubstring("rogue") &&
                          Catch::Matchers::ContainsSubstring("t=1"));
}

TEST_CASE("coupled minimum dominates every baseline pointwise", "[strategies][property]") {
    std::uint64_t seed = 0;
    for (const card_t n : {5, 20, 100}) {
        for (const std::int64_t k : {2, 3, 8}) {
            const auto& min_s = strategy_by_name("min");
            std::vector<const choice_strategy*> all{&min_s, &strategy_by_name("uniform"),
                                                    &strategy_by_name("max")};
            if (n >= 4) all.push_back(&strategy_by_name("copy"));
            for (int rep = 0; rep < 1200; ++rep) {
                const sampler_config cfg{n, k, sample_mode::direct_draws,
                                         derive_seed(0xD00D, seed++)};
                const draw_trace trace = sample_trace(cfg);
                const auto perms = coupled_replay(all, trace);
                const std::int64_t base = count_inversions(perms[0]);
                for (std::size_t s = 1; s < perms.size(); ++s) {
                    REQUIRE(base <= count_inversions(perms[s]));
                }
            }
        }
    }
}

TEST_CASE("copy deviates from min only on trigger traces and then fixes C_{n-2}",
          "[strategies][property]") {
    std::int64_t deviations = 0;
    for (const card_t n : {4, 5, 6}) {
        for (int rep = 0; rep < 4000; ++rep) {
            const sampler_config cfg{n, 2, sample_mode::direct_draws,
                                     derive_seed(0xF00D + n, static_cast<std::uint64_t>(rep))};
            const draw_trace trace = sample_trace(cfg);
            const auto [with_min, with_copy] =
                coupled_run(strategy_by_name("min"), strategy_by_name("copy"), trace);
            if (with_min == with_copy) continue;
            ++deviations;
            // Identical prefix (2, 3, ..., n-2), then 1 under min and n-1 under copy.
            for (card_t t = 1; t <= n - 3; ++t) {
                REQUIRE(with_min.at(t) == t + 1);
                REQUIRE(with_copy.at(t) == t + 1);
            }
            REQUIRE(with_min.at(n - 2) == 1);
            REQUIRE(with_copy.at(n - 2) == n - 1);
            REQUIRE(lis_length(with_copy) >= lis_length(with_min));
        }
    }
    // The trigger is rare but must actually occur at n=4 with 4000 traces.
    CHECK(deviations > 0);
}

TEST_CASE("coupled copy never shortens the increasing subsequence", "[strategies][property]") {
    for (int rep = 0; rep < 2000; ++rep) {
        const sampler_config cfg{8, 2, sample_mode::direct_draws,
                                 derive_seed(0xBEEF, static_cast<std::uint64_t>(rep))};
        const auto [with_min, with_copy] =
            coupled_run(strategy_by_name("min"), strategy_by_name("copy"), sample_trace(cfg));
        REQUIRE(lis_length(with_copy) >= lis_length(with_min));
    }
}

TEST_CASE("custom strategies plug into the replayer", "[strategies]") {
    // Take the second-lowest draw when there are at least two distinct
    // values, else the minimum.
    const function_strategy second_lowest("second-lowest", [](const strategy_context& ctx) {
        std::vector<card_t> sorted(ctx.draws.begin(), ctx.draws.end());
        std::sort(sorted.begin(), sorted.end());
        sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
        return sorted.size() > 1 ? sorted[1] : sorted[0];
    });
    const sampler_config cfg{25, 3, sample_mode::direct_draws, 777};
    const draw_trace trace = sample_trace(cfg);
    const auto [with_min, with_custom] =
        coupled_run(strategy_by_name("min"), second_lowest, trace);
    CHECK(count_inversions(with_min) <= count_inversions(with_custom));
    CHECK(with_custom.size() == 25);
}
