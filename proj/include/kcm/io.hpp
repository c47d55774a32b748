#pragma once

#include <cstdint>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "kcm/core.hpp"
#include "kcm/errors.hpp"
#include "kcm/experiments.hpp"
#include "kcm/oracle.hpp"
#include "kcm/sampler.hpp"

namespace kcm {

constexpr int schema_version = 1;

using json = nlohmann::json;

inline json to_json(const permutation& p) { return json(p.cards()); }
inline json to_json(const relative_seq& r) { return json(r.values()); }

inline permutation permutation_from_json(const json& j) {
    return permutation(j.get<std::vector<card_t>>());
}

inline json to_json(const draw_trace& trace) {
    json rows = json::array();
    for (card_t t = 1; t <= trace.n; ++t) {
        json row = json::array();
        const card_t* r = trace.row(t);
        for (std::int64_t i = 0; i < trace.k; ++i) row.push_back(r[i]);
        rows.push_back(std::move(row));
    }
    return json{{"schema_version", schema_version},
                {"n", trace.n},
                {"k", trace.k},
                {"ranks", std::move(rows)}};
}

inline draw_trace trace_from_json(const json& j) {
    draw_trace trace;
    trace.n = j.at("n").get<card_t>();
    trace.k = j.at("k").get<std::int64_t>();
    for (const auto& row : j.at("ranks")) {
        for (const auto& r : row) trace.ranks.push_back(r.get<card_t>());
    }
    trace.validate();
    return trace;
}

inline json to_json(const exact_pmf& pmf) {
    return json{{"offset", pmf.support_offset}, {"probs", pmf.probs}};
}

inline json to_json(const rational_pmf& pmf) {
    return json{{"offset", 0},
                {"numerators", pmf.numerators},
                {"denominator", pmf.denominator}};
}

inline json to_json(const enumeration_result& r) {
    json joint = json::array();
    for (std::int64_t i = 0; i <= r.max_inversions; ++i) {
        for (card_t l = 1; l <= r.n; ++l) {
            const std::int64_t c = r.joint_count(i, l);
            if (c != 0) joint.push_back(json::array({i, l, c, r.total}));
        }
    }
    return json{{"n", r.n},
                {"k", r.k},
                {"strategy", r.strategy_name},
                {"denominator", r.total},
                {"joint", std::move(joint)},
                {"inversion_marginal", r.inversion_marginal},
                {"lis_marginal", r.lis_marginal},
                {"mean_inversions", r.mean_inversions()},
                {"var_inversions", r.var_inversions()},
                {"mean_lis", r.mean_lis()},
                {"var_lis", r.var_lis()}};
}

inline json to_json(const point_summary& p) {
    json j{{"n", p.n},          {"k", p.k},
           {"trials", p.trials}, {"stat", p.stat},
           {"mean", p.mean},     {"variance", p.variance},
           {"std_error", p.std_error}, {"quantiles", p.quantiles}};
    if (p.ks) {
        j["ks"] = *p.ks;
    } else {
        j["ks"] = nullptr;
    }
    return j;
}

inline json to_json(const run_summary& s) {
    json points = json::array();
    for (const auto& p : s.points) points.push_back(to_json(p));
    json out{{"schema_version", schema_version}, {"points", std::move(points)}};
    if (!s.profiles.empty()) {
        json profiles = json::array();
        for (const auto& pr : s.profiles) {
            profiles.push_back(json{{"n", pr.n},
                                    {"k", pr.k},
                                    {"trials", pr.trials},
                                    {"mean_by_time", pr.mean_by_time}});
        }
        out["profiles"] = std::move(profiles);
    }
    return out;
}

inline std::string summary_to_csv(const run_summary& s) {
    std::string out = "n,k,stat,trials,mean,variance,std_error,ks,q05,q25,q50,q75,q95,verdict\n";
    for (const auto& p : s.points) {
        std::ostringstream row;
        row.precision(12);
        row << p.n << ',' << p.k << ',' << p.stat << ',' << p.trials << ',' << p.mean << ','
            << p.variance << ',' << p.std_error << ',';
        if (p.ks) row << *p.ks;
        for (const char* q : {"q05", "q25", "q50", "q75", "q95"}) {
            row << ',' << p.quantiles.at(q);
        }
        row << ",\n";
        out += row.str();
    }
    return out;
}

/// Declarative experiment description:
/// {"n": 1000 | [..], "k": 5 | {"beta": b} | {"table": {"1000": 10}},
///  "strategy": "min", "trials": T, "seed": S, "mode": "direct"|"inverse",
///  "statistics": ["I","L","M","profile"]}
inline experiment_config experiment_config_from_json(const json& j) {
    experiment_config cfg;
    const auto& n = j.at("n");
    if (n.is_array()) {
        cfg.n_values = n.get<std::vector<std::int64_t>>();
    } else {
        cfg.n_values = {n.get<std::int64_t>()};
    }
    if (j.contains("k")) {
        const auto& k = j.at("k");
        if (k.is_number()) {
            cfg.k = k_rule::fixed(k.get<std::int64_t>());
        } else if (k.is_object() && k.contains("beta")) {
            cfg.k = k_rule::power(k.at("beta").get<double>());
        } else if (k.is_object() && k.contains("table")) {
            std::map<std::int64_t, std::int64_t> table;
            for (const auto& [key, value] : k.at("table").items()) {
                table[std::stoll(key)] = value.get<std::int64_t>();
            }
            cfg.k = k_rule::lookup(std::move(table));
        } else {
            throw config_error("unrecognized k rule in experiment config");
        }
    }
    cfg.strategy = j.value("strategy", std::string("min"));
    cfg.trials = j.value("trials", std::int64_t{1});
    cfg.seed = j.value("seed", std::uint64_t{0});
    if (j.contains("mode")) {
        const auto mode = j.at("mode").get<std::string>();
        if (mode == "direct") {
            cfg.mode = sample_mode::direct_draws;
        } else if (mode == "inverse") {
            cfg.mode = sample_mode::inverse_cdf;
        } else {
            throw config_error("mode must be 'direct' or 'inverse'");
        }
    }
    if (j.contains("statistics")) {
        cfg.stats.clear();
        for (const auto& s : j.at("statistics")) {
            cfg.stats.push_back(statistic_from_id(s.get<std::string>()));
        }
    }
    cfg.validate();
    return cfg;
}

} // namespace kcm
