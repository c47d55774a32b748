#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "kcm/core.hpp"
#include "kcm/errors.hpp"
#include "kcm/numeric.hpp"
#include "kcm/rng.hpp"
#include "kcm/sampler.hpp"
#include "kcm/statistics.hpp"
#include "kcm/stats_math.hpp"
#include "kcm/strategies.hpp"

namespace kcm {

/// Run fn(i) for i in [0, count) across a worker pool. Each index owns its
/// output slot, so results cannot depend on scheduling.
template <typename Fn>
void parallel_for_indexed(std::int64_t count, int workers, Fn&& fn) {
    workers = std::max(1, workers);
    if (workers == 1 || count <= 1) {
        for (std::int64_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::int64_t> next{0};
    const std::int64_t chunk = std::max<std::int64_t>(1, count / (static_cast<std::int64_t>(workers) * 8));
    auto worker = [&] {
        for (;;) {
            const std::int64_t lo = next.fetch_add(chunk);
            if (lo >= count) return;
            const std::int64_t hi = std::min(lo + chunk, count);
            for (std::int64_t i = lo; i < hi; ++i) fn(i);
        }
    };
    std::vector<std::thread> pool;
    const int spawned = static_cast<int>(std::min<std::int64_t>(workers, count));
    pool.reserve(static_cast<std::size_t>(spawned));
    for (int w = 0; w < spawned; ++w) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
}

/// Rule producing k for each deck size in a sweep: a constant, the power law
/// ceil(n^beta), or an explicit table.
struct k_rule {
    enum class kind { fixed_k, power_law, table };

    kind type = kind::fixed_k;
    std::int64_t fixed_value = 1;
    double beta = 0.5;
    std::map<std::int64_t, std::int64_t> entries;

    static k_rule fixed(std::int64_t k) {
        k_rule r;
        r.type = kind::fixed_k;
        r.fixed_value = k;
        return r;
    }
    static k_rule power(double beta) {
        if (!(beta > 0.0 && beta < 1.0)) throw config_error("power rule needs beta in (0, 1)");
        k_rule r;
        r.type = kind::power_law;
        r.beta = beta;
        return r;
    }
    static k_rule lookup(std::map<std::int64_t, std::int64_t> entries) {
        k_rule r;
        r.type = kind::table;
        r.entries = std::move(entries);
        return r;
    }

    std::int64_t k_for(std::int64_t n) const {
        std::int64_t k = 0;
        switch (type) {
        case kind::fixed_k:
            k = fixed_value;
            break;
        case kind::power_law:
            k = static_cast<std::int64_t>(
                std::ceil(std::pow(static_cast<double>(n), beta) - 1e-12));
            break;
        case kind::table: {
            const auto it = entries.find(n);
            if (it == entries.end()) {
                throw config_error("k table has no entry for n = " + std::to_string(n));
            }
            k = it->second;
            break;
        }
        }
        if (k < 1 || k > n) {
            throw config_error("k rule yields k = " + std::to_string(k) +
                               " outside [1, n] at n = " + std::to_string(n));
        }
        return k;
    }
};

enum class statistic { inversions, lis, greedy_m, profile };

inline const char* statistic_id(statistic s) {
    switch (s) {
    case statistic::inversions: return "I";
    case statistic::lis: return "L";
    case statistic::greedy_m: return "M";
    case statistic::profile: return "profile";
    }
    return "?";
}

inline statistic statistic_from_id(std::string_view id) {
    if (id == "I") return statistic::inversions;
    if (id == "L") return statistic::lis;
    if (id == "M") return statistic::greedy_m;
    if (id == "profile") return statistic::profile;
    throw config_error("unknown statistic id: " + std::string(id));
}

struct experiment_config {
    std::vector<std::int64_t> n_values;
    k_rule k = k_rule::fixed(1);
    std::string strategy = "min";
    std::int64_t trials = 1;
    std::uint64_t seed = 0;
    std::vector<statistic> stats{statistic::inversions, statistic::lis};
    std::optional<sample_mode> mode; // defaulted per k when absent

    void validate() const {
        if (n_values.empty()) throw config_error("experiment needs at least one n");
        if (trials < 1) throw config_error("trials must be >= 1");
        if (stats.empty()) throw config_error("experiment needs at least one statistic");
        strategy_by_name(strategy);
        for (std::int64_t n : n_values) {
            if (n < 1) throw config_error("n must be >= 1");
            k.k_for(n);
        }
    }
};

struct point_summary {
    std::int64_t n = 0;
    std::int64_t k = 0;
    std::int64_t trials = 0;
    std::string stat;
    double mean = 0.0;
    double variance = 0.0;
    double std_error = 0.0;
    std::optional<double> ks; // exact-standardized KS to normal; inversions only
    std::map<std::string, double> quantiles;
};

struct profile_summary {
    std::int64_t n = 0;
    std::int64_t k = 0;
    std::int64_t trials = 0;
    std::vector<double> mean_by_time; // E-hat[I_t], t = 1..n-1
};

struct run_summary {
    std::vector<point_summary> points;
    std::vector<profile_summary> profiles;
};

namespace detail {

/// Aggregate integer-valued replicate outcomes in replicate order.
inline point_summary summarize_integers(const std::vector<std::int64_t>& values) {
    point_summary s;
    s.trials = static_cast<std::int64_t>(values.size());
    std::vector<double> xs(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) xs[i] = static_cast<double>(values[i]);
    s.mean = mean_of(xs);
    s.variance = sample_variance(xs);
    s.std_error = std::sqrt(s.variance / static_cast<double>(values.size()));
    std::sort(xs.begin(), xs.end());
    for (const auto& [label, q] :
         {std::pair<const char*, double>{"q05", 0.05}, {"q25", 0.25}, {"q50", 0.5},
          {"q75", 0.75}, {"q95", 0.95}}) {
        s.quantiles[label] = quantile_of_sorted(xs, q);
    }
    return s;
}

} // namespace detail

/// Run `trials` independent replicates for every n in the sweep and
/// aggregate the requested statistics. Per-replicate seeds are derived from
/// the master seed by index, and every aggregation path is either integer
/// or performed in replicate order, so the summary is byte-identical for
/// any worker count.
inline run_summary run_experiment(const experiment_config& cfg, int workers = 1) {
    cfg.validate();
    const choice_strategy& strategy = strategy_by_name(cfg.strategy);
    const bool is_min = cfg.strategy == "min";

    const bool want_i = std::find(cfg.stats.begin(), cfg.stats.end(), statistic::inversions) !=
                        cfg.stats.end();
    const bool want_l =
        std::find(cfg.stats.begin(), cfg.stats.end(), statistic::lis) != cfg.stats.end();
    const bool want_m =
        std::find(cfg.stats.begin(), cfg.stats.end(), statistic::greedy_m) != cfg.stats.end();
    const bool want_profile =
        std::find(cfg.stats.begin(), cfg.stats.end(), statistic::profile) != cfg.stats.end();

    run_summary summary;
    for (std::size_t point = 0; point < cfg.n_values.size(); ++point) {
        const std::int64_t n64 = cfg.n_values[point];
        const auto n = static_cast<card_t>(n64);
        const std::int64_t k = cfg.k.k_for(n64);
        const sample_mode mode = cfg.mode.value_or(default_mode(k));
        const std::uint64_t point_seed = derive_seed(cfg.seed, point);

        std::vector<std::int64_t> inv_values(want_i ? cfg.trials : 0);
        std::vector<std::int64_t> lis_values(want_l ? cfg.trials : 0);
        std::vector<std::int64_t> m_values(want_m ? cfg.trials : 0);
        std::vector<std::vector<std::int64_t>> profile_parts;
        std::atomic<int> profile_next{0};
        const int worker_cap = std::max(1, workers);
        if (want_profile) {
            profile_parts.assign(static_cast<std::size_t>(worker_cap),
                                 std::vector<std::int64_t>(static_cast<std::size_t>(n > 1 ? n - 1 : 0), 0));
        }
        // Each executing thread claims one integer accumulator; integer
        // merging keeps the result independent of which thread ran which
        // replicate. Pool threads live only for one parallel loop; the
        // calling thread's slot is reset after each point below.
        thread_local std::vector<std::int64_t>* profile_slot = nullptr;

        const bool need_perm = want_l || want_m || (want_profile && !is_min) || !is_min;

        parallel_for_indexed(cfg.trials, workers, [&](std::int64_t i) {
            const sampler_config scfg{n, k, mode, derive_seed(point_seed, static_cast<std::uint64_t>(i))};
            std::optional<relative_seq> rel;
            std::optional<permutation> perm;
            if (is_min) {
                rel.emplace(sample_relative(scfg));
                if (need_perm) perm.emplace(relative_to_permutation(*rel));
            } else {
                const sampler_config tcfg{n, k, sample_mode::direct_draws, scfg.seed};
                perm.emplace(replay_trace(strategy, sample_trace(tcfg)));
            }

            if (want_i) {
                std::int64_t inv = 0;
                if (rel) {
                    for (card_t v : rel->values()) inv += v - 1;
                } else {
                    inv = count_inversions(*perm);
                }
                inv_values[static_cast<std::size_t>(i)] = inv;
            }
            if (want_l) {
                lis_values[static_cast<std::size_t>(i)] = lis_length(*perm);
            }
            if (want_m) {
                m_values[static_cast<std::size_t>(i)] = greedy_lower_bound(*perm, k).count();
            }
            if (want_profile && n > 1) {
                if (profile_slot == nullptr) {
                    const int slot = profile_next.fetch_add(1);
                    profile_slot = &profile_parts[static_cast<std::size_t>(slot)];
                }
                if (rel) {
                    const auto& values = rel->values();
                    for (card_t t = 0; t < n - 1; ++t) {
                        (*profile_slot)[static_cast<std::size_t>(t)] += values[static_cast<std::size_t>(t)] - 1;
                    }
                } else {
                    const auto prof = inversion_profile(*perm);
                    for (std::size_t t = 0; t < prof.size(); ++t) (*profile_slot)[t] += prof[t];
                }
            }
        });
        profile_slot = nullptr;

        auto push_point = [&](statistic st, const std::vector<std::int64_t>& values) {
            point_summary s = detail::summarize_integers(values);
            s.n = n64;
            s.k = k;
            s.stat = statistic_id(st);
            if (st == statistic::inversions && n64 <= 20000 && s.variance > 0.0 &&
                cfg.trials >= 2) {
                const moments exact = total_inversion_moments(n64, k);
                if (exact.variance > 0.0) {
                    const double sd = std::sqrt(exact.variance);
                    std::vector<double> z(values.size());
                    for (std::size_t i = 0; i < values.size(); ++i) {
                        z[i] = (static_cast<double>(values[i]) - exact.mean) / sd;
                    }
                    s.ks = ks_distance_to_normal(std::move(z));
                }
            }
            summary.points.push_back(std::move(s));
        };
        if (want_i) push_point(statistic::inversions, inv_values);
        if (want_l) push_point(statistic::lis, lis_values);
        if (want_m) push_point(statistic::greedy_m, m_values);
        if (want_profile) {
            profile_summary ps;
            ps.n = n64;
            ps.k = k;
            ps.trials = cfg.trials;
            if (n > 1) {
                std::vector<std::int64_t> totals(static_cast<std::size_t>(n - 1), 0);
                for (const auto& part : profile_parts) {
                    for (std::size_t t = 0; t < totals.size(); ++t) totals[t] += part[t];
                }
                ps.mean_by_time.resize(totals.size());
                for (std::size_t t = 0; t < totals.size(); ++t) {
                    ps.mean_by_time[t] =
                        static_cast<double>(totals[t]) / static_cast<double>(cfg.trials);
                }
            }
            summary.profiles.push_back(std::move(ps));
        }
    }
    return summary;
}

struct verdict {
    std::string name;
    bool pass = false;
    double observed = 0.0;
    double threshold = 0.0;
    std::string details;
};

/// Standardize samples with externally supplied exact moments and measure
/// the KS distance to the standard normal.
inline verdict clt_verdict(std::vector<double> samples, double exact_mean, double exact_sd,
                           double threshold = 0.03) {
    if (samples.size() < 1000) throw config_error("CLT verdict needs >= 1000 samples");
    if (!(exact_sd > 0.0)) throw config_error("CLT verdict needs a positive exact sd");
    for (double& x : samples) x = (x - exact_mean) / exact_sd;
    verdict v;
    v.name = "clt-ks";
    v.observed = ks_distance_to_normal(std::move(samples));
    v.threshold = threshold;
    v.pass = v.observed < threshold;
    std::ostringstream os;
    os << "KS=" << v.observed << " threshold=" << threshold;
    v.details = os.str();
    return v;
}

struct weak_law_row {
    std::int64_t n = 0;
    std::int64_t k = 0;
    double exceedance = 0.0;
};

struct weak_law_report {
    std::vector<weak_law_row> rows;
    double epsilon = 0.0;
    double threshold = 0.0;
    std::string target; // "a_k" (fixed k) or "1/2" (growing k)
    bool pass = false;
};

/// Exceedance fractions of the weak-law events over an increasing n sweep.
/// Fixed k: |I/n^2 - a_k| > eps. Growing k: |I k_n / n^2 - 1/2| > eps.
/// Pass requires the fraction to be nonincreasing in n and at most
/// `threshold` at the largest n.
inline weak_law_report weak_law_verdict(const std::vector<std::int64_t>& ns, const k_rule& rule,
                                        double epsilon, std::int64_t trials, std::uint64_t seed,
                                        double threshold = 0.05, int workers = 1) {
    if (ns.size() < 3) throw config_error("weak-law verdict needs >= 3 deck sizes");
    for (std::size_t i = 1; i < ns.size(); ++i) {
        if (ns[i] <= ns[i - 1]) throw config_error("weak-law deck sizes must increase");
    }
    const bool fixed = rule.type == k_rule::kind::fixed_k;
    weak_law_report report;
    report.epsilon = epsilon;
    report.threshold = threshold;
    report.target = fixed ? "a_k" : "1/2";

    for (std::size_t pi = 0; pi < ns.size(); ++pi) {
        const std::int64_t n = ns[pi];
        const std::int64_t k = rule.k_for(n);
        const std::uint64_t point_seed = derive_seed(seed, pi);
        std::vector<std::uint8_t> exceeded(static_cast<std::size_t>(trials), 0);
        parallel_for_indexed(trials, workers, [&](std::int64_t i) {
            const sampler_config scfg{static_cast<card_t>(n), k, default_mode(k),
                                      derive_seed(point_seed, static_cast<std::uint64_t>(i))};
            const relative_seq rel = sample_relative(scfg);
            std::int64_t inv = 0;
            for (card_t v : rel.values()) inv += v - 1;
            const double n2 = static_cast<double>(n) * static_cast<double>(n);
            double deviation;
            if (fixed) {
                deviation = std::abs(static_cast<double>(inv) / n2 -
                                     inversion_constants(k).mean_coeff());
            } else {
                deviation =
                    std::abs(static_cast<double>(inv) * static_cast<double>(k) / n2 - 0.5);
            }
            exceeded[static_cast<std::size_t>(i)] = deviation > epsilon ? 1 : 0;
        });
        std::int64_t count = 0;
        for (std::uint8_t e : exceeded) count += e;
        report.rows.push_back(
            {n, k, static_cast<double>(count) / static_cast<double>(trials)});
    }

    report.pass = report.rows.back().exceedance <= threshold;
    for (std::size_t i = 1; i < report.rows.size(); ++i) {
        if (report.rows[i].exceedance > report.rows[i - 1].exceedance + 1e-12) {
            report.pass = false;
        }
    }
    return report;
}

/// Sample variance of the LIS length against the n/4 bound, with one-sided
/// chi-square slack at confidence 0.999.
inline verdict variance_L_verdict(std::int64_t n, std::int64_t k, std::int64_t trials,
                                  std::uint64_t seed, int workers = 1) {
    if (trials < 1000) throw config_error("variance verdict needs >= 1000 trials");
    std::vector<std::int64_t> lis_values(static_cast<std::size_t>(trials), 0);
    parallel_for_indexed(trials, workers, [&](std::int64_t i) {
        const sampler_config scfg{static_cast<card_t>(n), k, default_mode(k),
                                  derive_seed(seed, static_cast<std::uint64_t>(i))};
        lis_values[static_cast<std::size_t>(i)] =
            lis_length(relative_to_permutation(sample_relative(scfg)));
    });
    std::vector<double> xs(lis_values.begin(), lis_values.end());
    const double s2 = sample_variance(xs);
    const auto dof = static_cast<double>(trials - 1);
    const double slack = chi2_quantile(0.999, dof) / dof - 1.0;
    verdict v;
    v.name = "variance-L";
    v.observed = s2;
    v.threshold = static_cast<double>(n) / 4.0 * (1.0 + slack);
    v.pass = v.observed <= v.threshold;
    std::ostringstream os;
    os << "sample Var(L)=" << s2 << " bound=" << v.threshold << " (n/4 with slack " << slack
       << ")";
    v.details = os.str();
    return v;
}

namespace detail {

inline std::string trace_to_compact_json(const draw_trace& trace) {
    std::ostringstream os;
    os << "{\"n\":" << trace.n << ",\"k\":" << trace.k << ",\"ranks\":[";
    for (card_t t = 1; t <= trace.n; ++t) {
        if (t > 1) os << ',';
        os << '[';
        const card_t* row = trace.row(t);
        for (std::int64_t i = 0; i < trace.k; ++i) {
            if (i > 0) os << ',';
            os << row[i];
        }
        os << ']';
    }
    os << "]}";
    return os.str();
}

} // namespace detail

/// Coupled pointwise dominance of the minimum strategy: over `trials`
/// shared-rank traces, I(min) <= I(other) must hold on every trace for
/// every listed opponent. Any violating trace is serialized for replay.
inline verdict dominance_verdict(std::int64_t n, std::int64_t k, std::int64_t trials,
                                 std::uint64_t seed,
                                 const std::vector<std::string>& others = {"uniform", "max"},
                                 int workers = 1) {
    if (k < 2) throw config_error("dominance verdict needs k >= 2");
    const choice_strategy& min_s = strategy_by_name("min");
    std::vector<const choice_strategy*> strategies{&min_s};
    for (const auto& id : others) strategies.push_back(&strategy_by_name(id));

    std::vector<std::uint8_t> violated(static_cast<std::size_t>(trials), 0);
    parallel_for_indexed(trials, workers, [&](std::int64_t i) {
        const sampler_config scfg{static_cast<card_t>(n), k, sample_mode::direct_draws,
                                  derive_seed(seed, static_cast<std::uint64_t>(i))};
        const draw_trace trace = sample_trace(scfg);
        const auto perms = coupled_replay(strategies, trace);
        const std::int64_t inv_min = count_inversions(perms[0]);
        for (std::size_t s = 1; s < perms.size(); ++s) {
            if (inv_min > count_inversions(perms[s])) {
                violated[static_cast<std::size_t>(i)] = 1;
            }
        }
    });

    verdict v;
    v.name = "dominance";
    std::int64_t violations = 0;
    std::int64_t first = -1;
    for (std::int64_t i = 0; i < trials; ++i) {
        if (violated[static_cast<std::size_t>(i)]) {
            ++violations;
            if (first < 0) first = i;
        }
    }
    v.observed = static_cast<double>(violations);
    v.threshold = 0.0;
    v.pass = violations == 0;
    std::ostringstream os;
    os << violations << " violations over " << trials << " traces at n=" << n << ", k=" << k;
    if (first >= 0) {
        const sampler_config scfg{static_cast<card_t>(n), k, sample_mode::direct_draws,
                                  derive_seed(seed, static_cast<std::uint64_t>(first))};
        os << "; first offending trace: " << detail::trace_to_compact_json(sample_trace(scfg));
    }
    v.details = os.str();
    return v;
}

} // namespace kcm
