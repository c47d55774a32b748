#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <sstream>
#include <string>
#include <vector>

#include "kcm/experiments.hpp"
#include "kcm/oracle.hpp"
#include "kcm/sampler.hpp"
#include "kcm/statistics.hpp"
#include "kcm/stats_math.hpp"
#include "kcm/strategies.hpp"

namespace kcm {

struct check_result {
    std::string name;
    bool pass = false;
    std::string details;
    double seconds = 0.0;
};

namespace checks {

namespace detail {

template <typename Fn>
check_result timed(std::string name, Fn&& body) {
    check_result r;
    r.name = std::move(name);
    const auto start = std::chrono::steady_clock::now();
    std::ostringstream os;
    os.precision(6);
    r.pass = body(os);
    r.details = os.str();
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return r;
}

inline std::int64_t ceil_pow(std::int64_t n, double beta) {
    return static_cast<std::int64_t>(
        std::ceil(std::pow(static_cast<double>(n), beta) - 1e-12));
}

} // namespace detail

/// Exact agreement between full-tree enumeration under the minimum strategy
/// and the convolution law of the inversion count, at (4,2), (5,2), (4,3).
inline check_result oracle_agreement(int workers) {
    return detail::timed("oracle-agreement", [&](std::ostringstream& os) {
        bool ok = true;
        for (const auto& [n, k] : std::vector<std::pair<card_t, std::int64_t>>{
                 {4, 2}, {5, 2}, {4, 3}}) {
            const enumeration_result enumd = enumerate_strategy(n, k, strategy_by_name("min"), workers);
            const rational_pmf pmf = inversion_pmf_rational(n, k);
            bool equal = enumd.total == pmf.denominator &&
                         enumd.inversion_marginal.size() == pmf.numerators.size();
            if (equal) {
                for (std::size_t i = 0; i < pmf.numerators.size(); ++i) {
                    if (enumd.inversion_marginal[i] != pmf.numerators[i]) equal = false;
                }
            }
            os << "(" << n << "," << k << "): " << (equal ? "equal" : "MISMATCH") << "  ";
            ok = ok && equal;
        }
        return ok;
    });
}

/// Fixed-k exact moments against the n^2 / n^3 asymptotics: mean within 2n
/// of a_k n^2 at n = 1e3 and 1e4; the variance O(n^2) coefficient measured
/// at n = 1e3 (plus 5% headroom) must still cover n = 1e4.
inline check_result fixed_k_moments(int /*workers*/) {
    return detail::timed("fixed-k-moments", [&](std::ostringstream& os) {
        bool ok = true;
        for (const std::int64_t k : {1, 2, 5}) {
            const asymptotic_constants c = inversion_constants(k);
            const moments m3 = total_inversion_moments(1000, k);
            const moments m4 = total_inversion_moments(10000, k);
            const double mean_dev3 = std::abs(m3.mean - c.mean_coeff() * 1e6);
            const double mean_dev4 = std::abs(m4.mean - c.mean_coeff() * 1e8);
            const bool mean_ok = mean_dev3 <= 2.0 * 1000 && mean_dev4 <= 2.0 * 10000;
            const double ratio3 = std::abs(m3.variance - c.var_coeff() * 1e9) / 1e6;
            const double ratio4 = std::abs(m4.variance - c.var_coeff() * 1e12) / 1e8;
            const double calibrated = 1.05 * ratio3;
            const bool var_ok = ratio4 <= calibrated;
            os << "k=" << k << ": |E-an^2|/n={" << mean_dev3 / 1000 << "," << mean_dev4 / 10000
               << "} C=" << calibrated << " ratio(1e4)=" << ratio4 << "  ";
            ok = ok && mean_ok && var_ok;
        }
        return ok;
    });
}

/// Growing-k moment scaling at n = 1e5 with k_n = ceil(sqrt(n)):
/// E(I) k/n^2 in [0.45, 0.55], Var(I) k^2/n^3 in [0.28, 0.38].
inline check_result growing_k_moments(int /*workers*/) {
    return detail::timed("growing-k-moments", [&](std::ostringstream& os) {
        const std::int64_t n = 100000;
        const std::int64_t k = detail::ceil_pow(n, 0.5);
        const moments m = total_inversion_moments(n, k);
        const double n2 = static_cast<double>(n) * static_cast<double>(n);
        const double mean_ratio = m.mean * static_cast<double>(k) / n2;
        const double var_ratio =
            m.variance * static_cast<double>(k) * static_cast<double>(k) / (n2 * static_cast<double>(n));
        os << "n=" << n << " k=" << k << ": E*k/n^2=" << mean_ratio
           << " (in [0.45,0.55]) Var*k^2/n^3=" << var_ratio << " (in [0.28,0.38])";
        return mean_ratio >= 0.45 && mean_ratio <= 0.55 && var_ratio >= 0.28 &&
               var_ratio <= 0.38;
    });
}

/// Central limit theorem proxies: KS distance of exactly standardized
/// inversion samples to the standard normal below 0.03, 5000 trials,
/// at (n=2000, k=4) and (n=2000, k=ceil(n^0.4)).
inline check_result clt(int workers) {
    return detail::timed("clt", [&](std::ostringstream& os) {
        bool ok = true;
        const std::int64_t n = 2000;
        const std::int64_t trials = 5000;
        for (const std::int64_t k : {std::int64_t{4}, detail::ceil_pow(n, 0.4)}) {
            const moments exact = total_inversion_moments(n, k);
            std::vector<std::int64_t> inv(static_cast<std::size_t>(trials));
            const std::uint64_t seed = derive_seed(0x5EED0004, static_cast<std::uint64_t>(k));
            parallel_for_indexed(trials, workers, [&](std::int64_t i) {
                const sampler_config cfg{static_cast<card_t>(n), k, default_mode(k),
                                         derive_seed(seed, static_cast<std::uint64_t>(i))};
                const relative_seq rel = sample_relative(cfg);
                std::int64_t total = 0;
                for (card_t v : rel.values()) total += v - 1;
                inv[static_cast<std::size_t>(i)] = total;
            });
            std::vector<double> samples(inv.begin(), inv.end());
            const verdict v = clt_verdict(std::move(samples), exact.mean,
                                          std::sqrt(exact.variance), 0.03);
            os << "k=" << k << ": " << v.details << "  ";
            ok = ok && v.pass;
        }
        return ok;
    });
}

/// LIS scaling at n = 1e5, k_n = ceil(n^(1/3)), 200 trials: every sample of
/// L/sqrt(kn) in [0.4, 4e+0.1]; greedy M <= L on every replicate; mean
/// M/sqrt(kn) at least 0.4.
inline check_result lis_scaling(int workers) {
    return detail::timed("lis-scaling", [&](std::ostringstream& os) {
        const std::int64_t n = 100000;
        const std::int64_t k = detail::ceil_pow(n, 1.0 / 3.0);
        const std::int64_t trials = 200;
        const double root = std::sqrt(static_cast<double>(k) * static_cast<double>(n));
        const double lo = 0.4;
        const double hi = 4.0 * std::exp(1.0) + 0.1;

        std::vector<std::int64_t> lis(static_cast<std::size_t>(trials));
        std::vector<std::int64_t> greedy(static_cast<std::size_t>(trials));
        parallel_for_indexed(trials, workers, [&](std::int64_t i) {
            const sampler_config cfg{static_cast<card_t>(n), k, default_mode(k),
                                     derive_seed(0x5EED0005, static_cast<std::uint64_t>(i))};
            const permutation perm = relative_to_permutation(sample_relative(cfg));
            lis[static_cast<std::size_t>(i)] = lis_length(perm);
            greedy[static_cast<std::size_t>(i)] = greedy_lower_bound(perm, k).count();
        });

        double min_ratio = 1e300, max_ratio = 0.0;
        bool m_le_l = true;
        kahan_sum m_sum;
        for (std::int64_t i = 0; i < trials; ++i) {
            const double ratio = static_cast<double>(lis[static_cast<std::size_t>(i)]) / root;
            min_ratio = std::min(min_ratio, ratio);
            max_ratio = std::max(max_ratio, ratio);
            if (greedy[static_cast<std::size_t>(i)] > lis[static_cast<std::size_t>(i)]) {
                m_le_l = false;
            }
            m_sum.add(static_cast<double>(greedy[static_cast<std::size_t>(i)]));
        }
        const double mean_m_ratio = m_sum.value() / static_cast<double>(trials) / root;
        os << "L/sqrt(kn) in [" << min_ratio << "," << max_ratio << "] (need [" << lo << ","
           << hi << "]); M<=L " << (m_le_l ? "always" : "VIOLATED") << "; mean M/sqrt(kn)="
           << mean_m_ratio << " (need >= 0.4)";
        return min_ratio >= lo && max_ratio <= hi && m_le_l && mean_m_ratio >= 0.4;
    });
}

/// Var(L) <= n/4 with 0.999-confidence chi-square slack, n = 1000,
/// k in {1, 10}, 5000 trials.
inline check_result lis_variance(int workers) {
    return detail::timed("lis-variance", [&](std::ostringstream& os) {
        bool ok = true;
        for (const std::int64_t k : {1, 10}) {
            const verdict v = variance_L_verdict(1000, k, 5000,
                                                 derive_seed(0x5EED0006, static_cast<std::uint64_t>(k)),
                                                 workers);
            os << "k=" << k << ": " << v.details << "  ";
            ok = ok && v.pass;
        }
        return ok;
    });
}

/// Coupled dominance of the minimum strategy for inversions: zero violations
/// over 1e4 shared-rank traces at (20,2), (100,3), (1000,8) against the
/// uniform and max strategies.
inline check_result dominance(int workers) {
    return detail::timed("dominance", [&](std::ostringstream& os) {
        bool ok = true;
        for (const auto& [n, k] : std::vector<std::pair<std::int64_t, std::int64_t>>{
                 {20, 2}, {100, 3}, {1000, 8}}) {
            const verdict v =
                dominance_verdict(n, k, 10000,
                                  derive_seed(0x5EED0007, static_cast<std::uint64_t>(n * 31 + k)),
                                  {"uniform", "max"}, workers);
            os << v.details << "  ";
            ok = ok && v.pass;
        }
        return ok;
    });
}

/// Strict stochastic improvement of the copy strategy for L at (4,2):
/// P_copy(L >= x) >= P_min(L >= x) for all x, strictly greater somewhere,
/// by exact enumeration.
inline check_result copy_improvement(int workers) {
    return detail::timed("copy-improvement", [&](std::ostringstream& os) {
        const card_t n = 4;
        const std::int64_t k = 2;
        const enumeration_result with_min = enumerate_strategy(n, k, strategy_by_name("min"), workers);
        const enumeration_result with_copy =
            enumerate_strategy(n, k, strategy_by_name("copy"), workers);
        bool ge_everywhere = true;
        bool strict_somewhere = false;
        for (card_t x = 1; x <= n; ++x) {
            std::int64_t tail_min = 0, tail_copy = 0;
            for (card_t l = x; l <= n; ++l) {
                tail_min += with_min.lis_marginal[static_cast<std::size_t>(l - 1)];
                tail_copy += with_copy.lis_marginal[static_cast<std::size_t>(l - 1)];
            }
            if (tail_copy < tail_min) ge_everywhere = false;
            if (tail_copy > tail_min) strict_somewhere = true;
        }
        os << "tail comparison over " << with_min.total
           << " equiprobable leaves: dominates=" << (ge_everywhere ? "yes" : "NO")
           << " strict=" << (strict_somewhere ? "yes" : "NO");
        return ge_everywhere && strict_somewhere;
    });
}

/// Single-coordinate perturbations of the relative sequence change L by at
/// most 1: zero violations over 1e5 random perturbations at each of
/// n in {10, 100, 1000}.
inline check_result perturbation(int workers) {
    return detail::timed("perturbation", [&](std::ostringstream& os) {
        bool ok = true;
        for (const card_t n : {10, 100, 1000}) {
            const std::int64_t trials = 100000;
            std::vector<std::uint8_t> bad(static_cast<std::size_t>(trials), 0);
            parallel_for_indexed(trials, workers, [&](std::int64_t i) {
                xoshiro256pp rng(derive_seed(derive_seed(0x5EED0009, static_cast<std::uint64_t>(n)),
                                             static_cast<std::uint64_t>(i)));
                std::vector<card_t> rel(static_cast<std::size_t>(n));
                for (card_t t = 1; t <= n; ++t) {
                    rel[static_cast<std::size_t>(t - 1)] = static_cast<card_t>(
                        rng.next_below(static_cast<std::uint64_t>(n - t + 1)) + 1);
                }
                const relative_seq base(std::move(rel));
                const auto t = static_cast<card_t>(rng.next_below(static_cast<std::uint64_t>(n)) + 1);
                const auto new_rank = static_cast<card_t>(
                    rng.next_below(static_cast<std::uint64_t>(n - t + 1)) + 1);
                const card_t l0 = lis_length(relative_to_permutation(base));
                const card_t l1 =
                    lis_length(relative_to_permutation(perturb_relative(base, t, new_rank)));
                if (std::abs(l0 - l1) > 1) bad[static_cast<std::size_t>(i)] = 1;
            });
            std::int64_t violations = 0;
            for (auto b : bad) violations += b;
            os << "n=" << n << ": " << violations << " violations  ";
            ok = ok && violations == 0;
        }
        return ok;
    });
}

/// k=1 sampling is the uniform permutation law: chi-square over all 24
/// permutations of n=4, 1e5 samples, significance 1e-3.
inline check_result uniform_reduction(int workers) {
    return detail::timed("uniform-reduction", [&](std::ostringstream& os) {
        const card_t n = 4;
        const std::int64_t trials = 100000;
        std::vector<std::int64_t> cell(static_cast<std::size_t>(trials));
        parallel_for_indexed(trials, workers, [&](std::int64_t i) {
            const sampler_config cfg{n, 1, sample_mode::direct_draws,
                                     derive_seed(0x5EED000A, static_cast<std::uint64_t>(i))};
            const relative_seq rel = sample_relative(cfg);
            // Lexicographic index of the permutation in factorial base.
            std::int64_t index = 0;
            for (card_t t = 1; t <= n; ++t) {
                std::int64_t suffix = 1;
                for (card_t j = 1; j < n - t + 1; ++j) suffix *= j;
                index += (rel.at(t) - 1) * suffix;
            }
            cell[static_cast<std::size_t>(i)] = index;
        });
        std::vector<std::int64_t> observed(24, 0);
        for (std::int64_t c : cell) observed[static_cast<std::size_t>(c)] += 1;
        const std::vector<double> expected(24, 1.0 / 24.0);
        const chi_square_result r = chi_square_gof(observed, expected, trials, 1e-3);
        os << "chi2=" << r.statistic << " threshold=" << r.threshold << " (df=" << r.dof << ")";
        return r.pass;
    });
}

/// log-log slope of mean L against n for k_n = ceil(n^beta): within 0.05 of
/// (1+beta)/2 over n in {1e3, 1e4, 1e5}, beta in {1/3, 2/3}, 200 trials per
/// point.
inline check_result slope(int workers) {
    return detail::timed("lis-slope", [&](std::ostringstream& os) {
        bool ok = true;
        for (const double beta : {1.0 / 3.0, 2.0 / 3.0}) {
            std::vector<double> log_n, log_mean;
            for (const std::int64_t n : {1000, 10000, 100000}) {
                const std::int64_t k = detail::ceil_pow(n, beta);
                const std::int64_t trials = 200;
                std::vector<std::int64_t> lis(static_cast<std::size_t>(trials));
                const std::uint64_t seed =
                    derive_seed(0x5EED000B, static_cast<std::uint64_t>(n) * 7 +
                                                static_cast<std::uint64_t>(beta * 100));
                parallel_for_indexed(trials, workers, [&](std::int64_t i) {
                    const sampler_config cfg{static_cast<card_t>(n), k, default_mode(k),
                                             derive_seed(seed, static_cast<std::uint64_t>(i))};
                    lis[static_cast<std::size_t>(i)] =
                        lis_length(relative_to_permutation(sample_relative(cfg)));
                });
                kahan_sum total;
                for (std::int64_t v : lis) total.add(static_cast<double>(v));
                log_n.push_back(std::log(static_cast<double>(n)));
                log_mean.push_back(std::log(total.value() / static_cast<double>(trials)));
            }
            const double fitted = fit_line(log_n, log_mean).slope;
            const double target = (1.0 + beta) / 2.0;
            os << "beta=" << beta << ": slope=" << fitted << " target=" << target << "+-0.05  ";
            ok = ok && std::abs(fitted - target) <= 0.05;
        }
        return ok;
    });
}

/// Tunables of the weak-law suite. Weak laws are limit statements, so these
/// finite-n choices are calibration; they are the only verification knobs
/// that may be overridden from a config file.
struct weak_law_params {
    std::vector<std::int64_t> n_values{1000, 10000, 100000};
    double epsilon_fixed = 0.02;   // |I/n^2 - a_k| tolerance, fixed k = 2
    double epsilon_growing = 0.05; // |I k_n/n^2 - 1/2| tolerance, k_n = ceil(sqrt(n))
    std::int64_t trials = 200;
    double threshold = 0.05; // allowed exceedance at the largest n
};

/// Weak laws over an increasing sweep (suite check): exceedance
/// nonincreasing and below threshold at the largest n, for both the fixed-k
/// and the growing-k scalings.
inline check_result weak_laws(int workers, const weak_law_params& params = {}) {
    return detail::timed("weak-laws", [&](std::ostringstream& os) {
        const weak_law_report fixed =
            weak_law_verdict(params.n_values, k_rule::fixed(2), params.epsilon_fixed,
                             params.trials, 0x5EED000C, params.threshold, workers);
        const weak_law_report growing =
            weak_law_verdict(params.n_values, k_rule::power(0.5), params.epsilon_growing,
                             params.trials, 0x5EED000D, params.threshold, workers);
        for (const auto* report : {&fixed, &growing}) {
            os << "target " << report->target << " (eps=" << report->epsilon
               << "): exceedance {";
            for (const auto& row : report->rows) os << row.exceedance << " ";
            os << "} ";
        }
        return fixed.pass && growing.pass;
    });
}

/// Calibration self-test for the KS machinery: exact-normal samples stay
/// under 0.02 at 5000 draws.
inline check_result clt_selftest(int /*workers*/) {
    return detail::timed("clt-selftest", [&](std::ostringstream& os) {
        xoshiro256pp rng(0x5EED000E);
        std::vector<double> z(5000);
        for (auto& x : z) {
            // Box-Muller from two uniforms.
            const double u1 = rng.next_unit();
            const double u2 = rng.next_unit();
            x = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
        }
        const double d = ks_distance_to_normal(std::move(z));
        os << "KS=" << d << " (need < 0.02)";
        return d < 0.02;
    });
}

} // namespace checks

/// The eleven acceptance checks, in order.
inline std::vector<check_result> acceptance_checks(int workers) {
    return {
        checks::oracle_agreement(workers), checks::fixed_k_moments(workers),
        checks::growing_k_moments(workers), checks::clt(workers),
        checks::lis_scaling(workers),       checks::lis_variance(workers),
        checks::dominance(workers),         checks::copy_improvement(workers),
        checks::perturbation(workers),      checks::uniform_reduction(workers),
        checks::slope(workers),
    };
}

inline const std::vector<std::string>& suite_names() {
    static const std::vector<std::string> names{"moments",  "clt",          "weaklaw",
                                                "varL",     "scalingL",     "dominance",
                                                "perturbation", "oracle"};
    return names;
}

inline std::vector<check_result> run_suite(const std::string& suite, int workers,
                                           const checks::weak_law_params& weaklaw = {}) {
    if (suite == "moments") return {checks::fixed_k_moments(workers), checks::growing_k_moments(workers)};
    if (suite == "clt") return {checks::clt_selftest(workers), checks::clt(workers)};
    if (suite == "weaklaw") return {checks::weak_laws(workers, weaklaw)};
    if (suite == "varL") return {checks::lis_variance(workers)};
    if (suite == "scalingL") return {checks::lis_scaling(workers), checks::slope(workers)};
    if (suite == "dominance") return {checks::dominance(workers), checks::copy_improvement(workers)};
    if (suite == "perturbation") return {checks::perturbation(workers)};
    if (suite == "oracle") return {checks::oracle_agreement(workers), checks::uniform_reduction(workers)};
    throw config_error("unknown verification suite: " + suite);
}

} // namespace kcm
