#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <vector>

#include "kcm/rng.hpp"
#include "kcm/statistics.hpp"
#include "kcm/step_law.hpp"

using namespace kcm;

namespace {

std::int64_t brute_inversions(const permutation& p) {
    std::int64_t count = 0;
    const auto& c = p.cards();
    for (std::size_t i = 0; i < c.size(); ++i) {
        for (std::size_t j = i + 1; j < c.size(); ++j) {
            if (c[i] > c[j]) ++count;
        }
    }
    return count;
}

// Exhaustive LIS over all index subsets; independent of patience sorting.
card_t brute_lis(const permutation& p) {
    const auto& c = p.cards();
    const auto n = static_cast<std::size_t>(p.size());
    card_t best = 0;
    for (std::uint32_t mask = 1; mask < (1u << n); ++mask) {
        card_t prev = 0;
        card_t len = 0;
        bool increasing = true;
        for (std::size_t i = 0; i < n && increasing; ++i) {
            if (mask & (1u << i)) {
                if (c[i] <= prev) {
                    increasing = false;
                } else {
                    prev = c[i];
                    ++len;
                }
            }
        }
        if (increasing) best = std::max(best, len);
    }
    return best;
}

permutation random_permutation(card_t n, xoshiro256pp& rng) {
    std::vector<card_t> cards(static_cast<std::size_t>(n));
    for (card_t i = 0; i < n; ++i) cards[static_cast<std::size_t>(i)] = i + 1;
    for (std::size_t i = cards.size(); i > 1; --i) {
        std::swap(cards[i - 1], cards[rng.next_below(i)]);
    }
    return permutation(std::move(cards));
}

// Moments of I_t straight from its tail law, summed ascending (independent
// route from the descending compensated implementation).
moments step_moments_from_pmf(std::int64_t n, std::int64_t k, std::int64_t t) {
    const std::int64_t m = n - t + 1;
    double mean = 0.0, second = 0.0;
    for (std::int64_t j = 0; j < m; ++j) {
        const double p = inversion_tail(m, k, j - 1) - inversion_tail(m, k, j);
        mean += static_cast<double>(j) * p;
        second += static_cast<double>(j) * static_cast<double>(j) * p;
    }
    return {mean, second - mean * mean};
}

} // namespace

TEST_CASE("inversion counts on known permutations", "[statistics]") {
    CHECK(count_inversions(permutation::identity(7)) == 0);
    CHECK(count_inversions(permutation::reversal(5)) == 10);
    CHECK(count_inversions(permutation({2, 1, 4, 3})) == 2);
}

TEST_CASE("merge counting equals the quadratic pair count", "[statistics][property]") {
    xoshiro256pp rng(303);
    for (int rep = 0; rep < 40; ++rep) {
        const auto n = static_cast<card_t>(rng.next_below(200) + 1);
        const permutation p = random_permutation(n, rng);
        CHECK(count_inversions(p) == brute_inversions(p));
    }
}

TEST_CASE("inversion profile matches hand traces and identities", "[statistics]") {
    CHECK(inversion_profile(permutation::identity(5)) ==
          std::vector<std::int64_t>{0, 0, 0, 0});
    CHECK(inversion_profile(permutation({2, 1, 4, 3})) == std::vector<std::int64_t>{1, 0, 1});
}

TEST_CASE("profile equals relative positions minus one and sums to I", "[statistics][property]") {
    xoshiro256pp rng(404);
    for (int rep = 0; rep < 50; ++rep) {
        const auto n = static_cast<card_t>(rng.next_below(120) + 1);
        const permutation p = random_permutation(n, rng);
        const auto profile = inversion_profile(p);
        const relative_seq rel = permutation_to_relative(p);
        std::int64_t sum = 0;
        for (card_t t = 1; t < n; ++t) {
            CHECK(profile[static_cast<std::size_t>(t - 1)] == rel.at(t) - 1);
            sum += profile[static_cast<std::size_t>(t - 1)];
        }
        CHECK(sum == count_inversions(p));
    }
}

TEST_CASE("LIS length on known permutations", "[statistics]") {
    CHECK(lis_length(permutation::identity(9)) == 9);
    CHECK(lis_length(permutation::reversal(9)) == 1);
    CHECK(lis_length(permutation({2, 1, 4, 3})) == 2);
}

TEST_CASE("patience sorting equals exhaustive search", "[statistics][property]") {
    xoshiro256pp rng(505);
    for (int rep = 0; rep < 60; ++rep) {
        const auto n = static_cast<card_t>(rng.next_below(12) + 1);
        const permutation p = random_permutation(n, rng);
        CHECK(lis_length(p) == brute_lis(p));
    }
}

TEST_CASE("asymptotic constants as exact rationals", "[statistics]") {
    const auto c1 = inversion_constants(1);
    CHECK(c1.mean_num == 1);
    CHECK(c1.mean_den == 4);
    CHECK(c1.var_num == 1);
    CHECK(c1.var_den == 36);
    const auto c2 = inversion_constants(2);
    CHECK(c2.mean_coeff() == Catch::Approx(1.0 / 6.0).epsilon(1e-15));
    CHECK(c2.var_coeff() == Catch::Approx(1.0 / 54.0).epsilon(1e-15));
    // Large-k limits: a_k * k -> 1/2, b_k * k^2 -> 1/3.
    const auto big = inversion_constants(100000);
    CHECK(big.mean_coeff() * 100000 == Catch::Approx(0.5).margin(1e-4));
    CHECK(big.var_coeff() * 1e10 == Catch::Approx(1.0 / 3.0).margin(1e-4));
}

TEST_CASE("step moments on two-card decks", "[statistics]") {
    const moments last = step_inversion_moments(6, 3, 6);
    CHECK(last.mean == 0.0);
    CHECK(last.variance == 0.0);
    const moments m1 = step_inversion_moments(2, 1, 1);
    CHECK(m1.mean == Catch::Approx(0.5).epsilon(1e-15));
    CHECK(m1.variance == Catch::Approx(0.25).epsilon(1e-15));
    const moments m2 = step_inversion_moments(2, 2, 1);
    CHECK(m2.mean == Catch::Approx(0.25).epsilon(1e-15));
    CHECK(m2.variance == Catch::Approx(3.0 / 16.0).epsilon(1e-15));
}

TEST_CASE("step moments agree with direct pmf summation", "[statistics][property]") {
    for (const std::int64_t n : {2, 7, 33, 150}) {
        for (const std::int64_t k : {1, 2, 9, 64}) {
            for (std::int64_t t = 1; t <= n; t += std::max<std::int64_t>(1, n / 5)) {
                const moments a = step_inversion_moments(n, k, t);
                const moments b = step_moments_from_pmf(n, k, t);
                CHECK(a.mean == Catch::Approx(b.mean).margin(1e-11));
                CHECK(a.variance == Catch::Approx(b.variance).margin(1e-11));
            }
        }
    }
}

TEST_CASE("total moments on enumerable decks", "[statistics]") {
    // Six uniform permutations of three cards have 0+1+1+2+2+3 inversions.
    CHECK(total_inversion_moments(3, 1).mean == Catch::Approx(1.5).epsilon(1e-14));
    CHECK(total_inversion_moments(2, 2).mean == Catch::Approx(0.25).epsilon(1e-14));
    CHECK(total_inversion_moments(1, 5).mean == 0.0);
}

TEST_CASE("total mean approaches a_k n^2 at rate O(n)", "[statistics]") {
    const moments m = total_inversion_moments(1000, 3);
    const double ratio = m.mean / 1e6;
    CHECK(std::abs(ratio - 0.125) <= 2.0 / 1000.0);
}

TEST_CASE("greedy construction on the identity and the reversal", "[statistics]") {
    const greedy_record rec = greedy_lower_bound(permutation::identity(4), 1);
    CHECK(rec.target_size == 2);
    CHECK(rec.count() == 3);
    CHECK(rec.stop_times == std::vector<card_t>{1, 2, 3});
    CHECK(rec.picked_cards == std::vector<card_t>{1, 2, 3});
    CHECK(lis_length(permutation::identity(4)) == 4);

    for (const card_t n : {3, 8, 30}) {
        for (const std::int64_t k : {1, 2, 6}) {
            const greedy_record rev = greedy_lower_bound(permutation::reversal(n), k);
            CHECK(rev.count() == 1);
        }
    }
}

TEST_CASE("greedy picks form an increasing subsequence bounded by L", "[statistics][property]") {
    xoshiro256pp rng(606);
    for (int rep = 0; rep < 60; ++rep) {
        const auto n = static_cast<card_t>(rng.next_below(300) + 1);
        const auto k = static_cast<std::int64_t>(rng.next_below(8) + 1);
        const permutation p = random_permutation(n, rng);
        const greedy_record rec = greedy_lower_bound(p, k);
        REQUIRE(rec.count() >= 1);
        CHECK(rec.count() <= lis_length(p));
        for (std::size_t i = 0; i + 1 < rec.picked_cards.size(); ++i) {
            CHECK(rec.picked_cards[i] < rec.picked_cards[i + 1]);
            CHECK(rec.stop_times[i] < rec.stop_times[i + 1]);
        }
        for (std::size_t i = 0; i < rec.picked_cards.size(); ++i) {
            CHECK(p.at(rec.stop_times[i]) == rec.picked_cards[i]);
        }
    }
}

namespace {

// Literal transcription of the greedy construction with naive bookkeeping:
// forward scans for the stop time, full rebuild of the candidate set each
// round. Independent of the Fenwick-based implementation.
greedy_record naive_greedy(const permutation& perm, std::int64_t k) {
    const card_t n = perm.size();
    greedy_record rec;
    rec.target_size = static_cast<card_t>(
        std::ceil(std::sqrt(static_cast<double>(n) / static_cast<double>(k))));
    if (rec.target_size < 1) rec.target_size = 1;

    std::vector<card_t> candidates(static_cast<std::size_t>(n));
    for (card_t c = 1; c <= n; ++c) candidates[static_cast<std::size_t>(c - 1)] = c;
    card_t prev_time = 0;
    card_t prev_card = 0;
    while (!candidates.empty()) {
        const auto take = std::min<std::size_t>(
            static_cast<std::size_t>(rec.target_size), candidates.size());
        const std::vector<card_t> target(candidates.begin(),
                                         candidates.begin() + static_cast<std::ptrdiff_t>(take));
        card_t stop_time = 0;
        for (card_t t = prev_time + 1; t <= n; ++t) {
            if (std::find(target.begin(), target.end(), perm.at(t)) != target.end()) {
                stop_time = t;
                break;
            }
        }
        REQUIRE(stop_time != 0);
        const card_t pick = perm.at(stop_time);
        std::int64_t skipped = 0;
        for (card_t t = prev_time + 1; t < stop_time; ++t) {
            if (perm.at(t) > prev_card) ++skipped;
        }
        rec.stop_times.push_back(stop_time);
        rec.picked_cards.push_back(pick);
        rec.rank_in_target.push_back(static_cast<card_t>(
            std::find(target.begin(), target.end(), pick) - target.begin() + 1));
        rec.skipped_larger.push_back(skipped);

        candidates.clear();
        for (card_t t = stop_time + 1; t <= n; ++t) {
            if (perm.at(t) > pick) candidates.push_back(perm.at(t));
        }
        std::sort(candidates.begin(), candidates.end());
        prev_time = stop_time;
        prev_card = pick;
        if (candidates.size() < static_cast<std::size_t>(rec.target_size)) break;
    }
    return rec;
}

} // namespace

TEST_CASE("greedy records match a naive reference implementation", "[statistics][property]") {
    xoshiro256pp rng(808);
    for (int rep = 0; rep < 80; ++rep) {
        const auto n = static_cast<card_t>(rng.next_below(400) + 1);
        const auto k = static_cast<std::int64_t>(rng.next_below(9) + 1);
        const permutation p = random_permutation(n, rng);
        const greedy_record fast = greedy_lower_bound(p, k);
        const greedy_record slow = naive_greedy(p, k);
        REQUIRE(fast.target_size == slow.target_size);
        REQUIRE(fast.stop_times == slow.stop_times);
        REQUIRE(fast.picked_cards == slow.picked_cards);
        REQUIRE(fast.rank_in_target == slow.rank_in_target);
        REQUIRE(fast.skipped_larger == slow.skipped_larger);
    }
}

TEST_CASE("degenerate greedy target larger than the deck", "[statistics][edge]") {
    // n=2, k=8 gives target ceil(sqrt(1/4)) = 1; n=1 gives a single stop.
    CHECK(greedy_lower_bound(permutation::identity(1), 3).count() == 1);
    const greedy_record tiny = greedy_lower_bound(permutation({2, 1}), 8);
    CHECK(tiny.count() >= 1);
    CHECK(tiny.count() <= lis_length(permutation({2, 1})));
}

TEST_CASE("perturbing one relative coordinate", "[statistics]") {
    const relative_seq base({1, 1, 1, 1});
    CHECK(perturb_relative(base, 2, 1) == base);
    const relative_seq moved = perturb_relative(base, 1, 4);
    CHECK(relative_to_permutation(moved) == permutation({4, 1, 2, 3}));
    CHECK(lis_length(relative_to_permutation(base)) == 4);
    CHECK(lis_length(relative_to_permutation(moved)) == 3);
    CHECK_THROWS_AS(perturb_relative(base, 2, 4), validation_error);
    CHECK_THROWS_AS(perturb_relative(base, 5, 1), validation_error);
}

TEST_CASE("single-coordinate changes move L by at most one", "[statistics][property]") {
    xoshiro256pp rng(707);
    for (int rep = 0; rep < 2000; ++rep) {
        const auto n = static_cast<card_t>(rng.next_below(40) + 1);
        std::vector<card_t> rel(static_cast<std::size_t>(n));
        for (card_t t = 1; t <= n; ++t) {
            rel[static_cast<std::size_t>(t - 1)] =
                static_cast<card_t>(rng.next_below(static_cast<std::uint64_t>(n - t + 1)) + 1);
        }
        const relative_seq base(std::move(rel));
        const auto t = static_cast<card_t>(rng.next_below(static_cast<std::uint64_t>(n)) + 1);
        const auto r = static_cast<card_t>(
            rng.next_below(static_cast<std::uint64_t>(n - t + 1)) + 1);
        const card_t l0 = lis_length(relative_to_permutation(base));
        const card_t l1 = lis_length(relative_to_permutation(perturb_relative(base, t, r)));
        REQUIRE(std::abs(l0 - l1) <= 1);
    }
}
