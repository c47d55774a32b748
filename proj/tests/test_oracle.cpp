#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <map>
#include <vector>

#include "kcm/oracle.hpp"
#include "kcm/sampler.hpp"
#include "kcm/statistics.hpp"

using namespace kcm;

namespace {

// Mahonian counts of inversions over all uniform permutations, n = 4.
const std::vector<std::int64_t> mahonian4{1, 3, 5, 6, 5, 3, 1};

} // namespace

TEST_CASE("rational inversion law on tiny decks", "[oracle]") {
    const rational_pmf two_one = inversion_pmf_rational(2, 1);
    CHECK(two_one.denominator == 2);
    CHECK(two_one.numerators == std::vector<std::int64_t>{1, 1});

    const rational_pmf three_one = inversion_pmf_rational(3, 1);
    CHECK(three_one.denominator == 6);
    CHECK(three_one.numerators == std::vector<std::int64_t>{1, 2, 2, 1});

    const rational_pmf two_two = inversion_pmf_rational(2, 2);
    CHECK(two_two.denominator == 4);
    CHECK(two_two.numerators == std::vector<std::int64_t>{3, 1});
}

TEST_CASE("double and rational laws agree", "[oracle]") {
    for (const auto& [n, k] : std::vector<std::pair<card_t, std::int64_t>>{
             {2, 1}, {5, 2}, {8, 3}, {12, 1}}) {
        const exact_pmf d = inversion_pmf(n, k);
        const rational_pmf q = inversion_pmf_rational(n, k);
        REQUIRE(d.probs.size() == q.numerators.size());
        CHECK(d.support_offset == 0);
        for (std::size_t i = 0; i < d.probs.size(); ++i) {
            CHECK(d.probs[i] == Catch::Approx(static_cast<double>(q.numerators[i]) /
                                              static_cast<double>(q.denominator))
                                    .margin(1e-14));
        }
    }
}

TEST_CASE("pmf is a probability vector", "[oracle][property]") {
    for (const auto& [n, k] : std::vector<std::pair<card_t, std::int64_t>>{
             {1, 1}, {2, 2}, {40, 5}, {200, 1}}) {
        const exact_pmf pmf = inversion_pmf(n, k);
        CHECK(std::abs(pmf.total_mass() - 1.0) < 1e-12);
        for (double p : pmf.probs) CHECK(p >= 0.0);
    }
}

TEST_CASE("pmf moments match the summation route to 1e-9 relative", "[oracle][property]") {
    for (const card_t n : {2, 3, 10, 40, 120, 300}) {
        for (const std::int64_t k : {1, 2, 5, 50}) {
            const exact_pmf pmf = inversion_pmf(n, k);
            const moments m = total_inversion_moments(n, k);
            INFO("n=" << n << " k=" << k);
            CHECK(std::abs(pmf.mean() - m.mean) <= 1e-9 * std::max(1.0, std::abs(m.mean)));
            CHECK(std::abs(pmf.variance() - m.variance) <=
                  1e-9 * std::max(1.0, std::abs(m.variance)));
        }
    }
}

TEST_CASE("large-n convolution path stays consistent", "[oracle]") {
    // n=400 exercises the divide-and-conquer/FFT route.
    const exact_pmf pmf = inversion_pmf(400, 2);
    const moments m = total_inversion_moments(400, 2);
    CHECK(std::abs(pmf.total_mass() - 1.0) < 1e-10);
    CHECK(std::abs(pmf.mean() - m.mean) <= 1e-9 * m.mean);
    CHECK(std::abs(pmf.variance() - m.variance) <= 1e-9 * m.variance);

    // The two convolution kernels agree coefficient by coefficient.
    xoshiro256pp rng(51);
    std::vector<double> a(700), b(1300);
    for (auto& x : a) x = rng.next_unit();
    for (auto& x : b) x = rng.next_unit();
    const auto direct = detail::convolve_direct(a, b);
    const auto fft = detail::convolve_fft(a, b);
    REQUIRE(direct.size() == fft.size());
    for (std::size_t i = 0; i < direct.size(); ++i) {
        REQUIRE(fft[i] == Catch::Approx(direct[i]).margin(1e-9).epsilon(1e-12));
    }
}

TEST_CASE("feasibility guards", "[oracle][errors]") {
    CHECK_THROWS_AS(inversion_pmf(2001, 1), size_error);
    CHECK_THROWS_AS(inversion_pmf_rational(100, 50), size_error);
    CHECK_THROWS_AS(enumerate_strategy(7, 2, strategy_by_name("min")), size_error);
    CHECK_THROWS_AS(enumerate_strategy(6, 3, strategy_by_name("min")), size_error);
    CHECK_THROWS_AS(exact_expected_lis(10, 1), size_error);
}

TEST_CASE("enumeration of the minimum strategy on tiny decks", "[oracle]") {
    const enumeration_result r = enumerate_strategy(3, 1, strategy_by_name("min"));
    CHECK(r.total == 6);
    CHECK(r.mean_lis() == Catch::Approx(2.0).epsilon(1e-14));
    CHECK(r.inversion_marginal == std::vector<std::int64_t>{1, 2, 2, 1});

    const enumeration_result two = enumerate_strategy(2, 2, strategy_by_name("min"));
    CHECK(two.total == 4);
    // P(identity) = P(I = 0) = 3/4.
    CHECK(two.inversion_marginal == std::vector<std::int64_t>{3, 1});
    CHECK(two.mean_inversions() == Catch::Approx(0.25).epsilon(1e-14));
}

TEST_CASE("enumeration marginal equals the rational convolution", "[oracle][acceptance-adjacent]") {
    for (const auto& [n, k] : std::vector<std::pair<card_t, std::int64_t>>{
             {4, 2}, {5, 2}, {4, 3}}) {
        const enumeration_result r = enumerate_strategy(n, k, strategy_by_name("min"));
        const rational_pmf pmf = inversion_pmf_rational(n, k);
        CHECK(r.total == pmf.denominator);
        CHECK(r.inversion_marginal == pmf.numerators);
    }
}

TEST_CASE("any strategy at k=1 yields the uniform law", "[oracle]") {
    for (const char* id : {"min", "max", "uniform"}) {
        const enumeration_result r = enumerate_strategy(4, 1, strategy_by_name(id));
        CHECK(r.total == 24);
        CHECK(r.inversion_marginal == mahonian4);
    }
}

TEST_CASE("first-draw strategy is uniform for every k", "[oracle]") {
    const enumeration_result r = enumerate_strategy(4, 2, strategy_by_name("uniform"));
    REQUIRE(r.total == 576);
    std::vector<std::int64_t> scaled(mahonian4);
    for (auto& c : scaled) c *= 24; // 576 / 24 leaves per permutation
    CHECK(r.inversion_marginal == scaled);
}

TEST_CASE("minimum strategy stochastically dominates uniform for inversions", "[oracle]") {
    const enumeration_result with_min = enumerate_strategy(4, 2, strategy_by_name("min"));
    const enumeration_result with_uniform =
        enumerate_strategy(4, 2, strategy_by_name("uniform"));
    REQUIRE(with_min.total == with_uniform.total);
    // P_min(I <= x) >= P_uniform(I <= x) for every x, exactly.
    std::int64_t cum_min = 0, cum_uniform = 0;
    for (std::size_t i = 0; i < with_min.inversion_marginal.size(); ++i) {
        cum_min += with_min.inversion_marginal[i];
        cum_uniform += with_uniform.inversion_marginal[i];
        CHECK(cum_min >= cum_uniform);
    }
}

TEST_CASE("enumeration is worker-count invariant", "[oracle][concurrency]") {
    const enumeration_result one = enumerate_strategy(4, 3, strategy_by_name("min"), 1);
    const enumeration_result four = enumerate_strategy(4, 3, strategy_by_name("min"), 4);
    CHECK(one.joint == four.joint);
    CHECK(one.total == four.total);
}

TEST_CASE("exact expected LIS via both enumeration routes", "[oracle]") {
    CHECK(exact_expected_lis(1, 3) == Catch::Approx(1.0));
    CHECK(exact_expected_lis(3, 1) == Catch::Approx(2.0).epsilon(1e-13));
    for (const auto& [n, k] : std::vector<std::pair<card_t, std::int64_t>>{
             {3, 2}, {4, 2}, {5, 2}}) {
        const double via_relative = exact_expected_lis(n, k);
        const double via_tree = enumerate_strategy(n, k, strategy_by_name("min")).mean_lis();
        CHECK(std::abs(via_relative - via_tree) <= 1e-12);
    }
}

TEST_CASE("Monte Carlo inversion law converges to the exact pmf", "[oracle][statistical]") {
    const card_t n = 8;
    const std::int64_t k = 2;
    const std::int64_t trials = 100000;
    const exact_pmf pmf = inversion_pmf(n, k);
    std::vector<std::int64_t> observed(pmf.probs.size(), 0);
    for (std::int64_t i = 0; i < trials; ++i) {
        const sampler_config cfg{n, k, sample_mode::direct_draws,
                                 derive_seed(0xE0, static_cast<std::uint64_t>(i))};
        const relative_seq rel = sample_relative(cfg);
        std::int64_t inv = 0;
        for (card_t v : rel.values()) inv += v - 1;
        observed[static_cast<std::size_t>(inv)] += 1;
    }
    double tv = 0.0;
    for (std::size_t i = 0; i < pmf.probs.size(); ++i) {
        tv += std::abs(static_cast<double>(observed[i]) / static_cast<double>(trials) -
                       pmf.probs[i]);
    }
    tv *= 0.5;
    INFO("total variation = " << tv);
    CHECK(tv < 0.02);
}
