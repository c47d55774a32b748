// Command-line workbench for k-card-minimum random permutations: sampling,
// order statistics, exact laws, Monte Carlo experiments, and the built-in
// verification suites.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "kcm/io.hpp"
#include "kcm/kcm.hpp"

namespace {

constexpr int exit_ok = 0;
constexpr int exit_verification_failure = 1;
constexpr int exit_usage = 2;

int default_workers() {
    const unsigned hc = std::thread::hardware_concurrency();
    return hc == 0 ? 1 : static_cast<int>(hc);
}

kcm::sample_mode resolve_mode(const std::string& mode, std::int64_t k) {
    if (mode == "auto") return kcm::default_mode(k);
    if (mode == "direct") return kcm::sample_mode::direct_draws;
    if (mode == "inverse") return kcm::sample_mode::inverse_cdf;
    throw kcm::config_error("mode must be auto, direct or inverse");
}

std::ostream& open_output(std::ofstream& file, const std::string& path) {
    if (path.empty() || path == "-") return std::cout;
    file.open(path);
    if (!file) throw kcm::config_error("cannot open output file: " + path);
    return file;
}

struct sample_options {
    std::int64_t n = 1;
    std::int64_t k = 1;
    std::string mode = "auto";
    std::uint64_t seed = 0;
    std::int64_t count = 1;
    std::string format = "text";
    std::string strategy = "min";
    std::string out;
};

int run_sample(const sample_options& opt) {
    const auto mode = resolve_mode(opt.mode, opt.k);
    const kcm::choice_strategy& strategy = kcm::strategy_by_name(opt.strategy);
    std::vector<kcm::permutation> perms;
    perms.reserve(static_cast<std::size_t>(opt.count));
    for (std::int64_t i = 0; i < opt.count; ++i) {
        const std::uint64_t seed = kcm::derive_seed(opt.seed, static_cast<std::uint64_t>(i));
        const kcm::sampler_config cfg{static_cast<kcm::card_t>(opt.n), opt.k, mode, seed};
        if (opt.strategy == "min") {
            perms.push_back(kcm::sample_kcm(cfg));
        } else {
            const kcm::sampler_config tcfg{cfg.n, cfg.k, kcm::sample_mode::direct_draws, seed};
            perms.push_back(kcm::replay_trace(strategy, kcm::sample_trace(tcfg)));
        }
    }

    std::ofstream file;
    std::ostream& os = open_output(file, opt.out);
    if (opt.format == "json") {
        kcm::json arr = kcm::json::array();
        for (const auto& p : perms) arr.push_back(kcm::to_json(p));
        const kcm::json doc{{"schema_version", kcm::schema_version}, {"command", "sample"},
                            {"n", opt.n},       {"k", opt.k},
                            {"seed", opt.seed}, {"mode", kcm::to_string(mode)},
                            {"strategy", opt.strategy}, {"permutations", std::move(arr)}};
        os << doc.dump(2) << '\n';
    } else if (opt.format == "csv") {
        for (const auto& p : perms) {
            const auto& cards = p.cards();
            for (std::size_t i = 0; i < cards.size(); ++i) {
                if (i > 0) os << ',';
                os << cards[i];
            }
            os << '\n';
        }
    } else {
        for (const auto& p : perms) os << kcm::to_text(p);
    }
    return exit_ok;
}

struct stats_options {
    std::string in = "-";
    std::int64_t k = 1;
    std::string format = "csv";
    std::string out;
};

int run_stats(const stats_options& opt) {
    std::ifstream file_in;
    std::istream* is = &std::cin;
    if (opt.in != "-") {
        file_in.open(opt.in);
        if (!file_in) throw kcm::config_error("cannot open input file: " + opt.in);
        is = &file_in;
    }

    std::ofstream file_out;
    std::ostream& os = open_output(file_out, opt.out);
    kcm::json rows = kcm::json::array();
    if (opt.format == "csv") os << "n,I,L,M\n";

    std::string line;
    std::size_t line_number = 0;
    while (std::getline(*is, line)) {
        ++line_number;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        kcm::permutation perm = [&] {
            try {
                return kcm::parse_permutation_text(line);
            } catch (const kcm::validation_error& e) {
                throw kcm::validation_error("line " + std::to_string(line_number) + ": " +
                                            e.what());
            }
        }();
        const std::int64_t inv = kcm::count_inversions(perm);
        const kcm::card_t lis = kcm::lis_length(perm);
        const std::int64_t m = kcm::greedy_lower_bound(perm, opt.k).count();
        if (opt.format == "csv") {
            os << perm.size() << ',' << inv << ',' << lis << ',' << m << '\n';
        } else {
            rows.push_back(kcm::json{{"n", perm.size()}, {"I", inv}, {"L", lis}, {"M", m}});
        }
    }
    if (opt.format != "csv") {
        const kcm::json doc{{"schema_version", kcm::schema_version},
                            {"command", "stats"},
                            {"k", opt.k},
                            {"rows", std::move(rows)}};
        os << doc.dump(2) << '\n';
    }
    return exit_ok;
}

int run_moments(std::int64_t n, std::int64_t k, const std::string& format,
                const std::string& out) {
    const kcm::moments m = kcm::total_inversion_moments(n, k);
    const kcm::asymptotic_constants c = kcm::inversion_constants(k);
    const double n2 = static_cast<double>(n) * static_cast<double>(n);
    std::ofstream file;
    std::ostream& os = open_output(file, out);
    if (format == "csv") {
        os << "n,k,mean,variance,mean_coeff,var_coeff,asymptotic_mean,asymptotic_variance\n";
        os.precision(15);
        os << n << ',' << k << ',' << m.mean << ',' << m.variance << ',' << c.mean_coeff()
           << ',' << c.var_coeff() << ',' << c.mean_coeff() * n2 << ','
           << c.var_coeff() * n2 * static_cast<double>(n) << '\n';
    } else {
        const kcm::json doc{{"schema_version", kcm::schema_version},
                            {"command", "moments"},
                            {"n", n},
                            {"k", k},
                            {"mean", m.mean},
                            {"variance", m.variance},
                            {"mean_coeff", {{"num", c.mean_num}, {"den", c.mean_den}}},
                            {"var_coeff", {{"num", c.var_num}, {"den", c.var_den}}},
                            {"asymptotic_mean", c.mean_coeff() * n2},
                            {"asymptotic_variance", c.var_coeff() * n2 * static_cast<double>(n)}};
        os << doc.dump(2) << '\n';
    }
    return exit_ok;
}

int run_pmf(std::int64_t n, std::int64_t k, bool rational, const std::string& format,
            const std::string& out) {
    std::ofstream file;
    std::ostream& os = open_output(file, out);
    if (rational) {
        const kcm::rational_pmf pmf = kcm::inversion_pmf_rational(static_cast<kcm::card_t>(n), k);
        if (format == "csv") {
            os << "value,numerator,denominator\n";
            for (std::size_t i = 0; i < pmf.numerators.size(); ++i) {
                os << i << ',' << pmf.numerators[i] << ',' << pmf.denominator << '\n';
            }
        } else {
            kcm::json doc = kcm::to_json(pmf);
            doc["schema_version"] = kcm::schema_version;
            doc["command"] = "pmf";
            doc["n"] = n;
            doc["k"] = k;
            os << doc.dump(2) << '\n';
        }
    } else {
        const kcm::exact_pmf pmf = kcm::inversion_pmf(static_cast<kcm::card_t>(n), k);
        if (format == "csv") {
            os << "value,prob\n";
            os.precision(17);
            for (std::size_t i = 0; i < pmf.probs.size(); ++i) {
                os << pmf.support_offset + static_cast<std::int64_t>(i) << ',' << pmf.probs[i]
                   << '\n';
            }
        } else {
            kcm::json doc = kcm::to_json(pmf);
            doc["schema_version"] = kcm::schema_version;
            doc["command"] = "pmf";
            doc["n"] = n;
            doc["k"] = k;
            doc["mean"] = pmf.mean();
            doc["variance"] = pmf.variance();
            os << doc.dump(2) << '\n';
        }
    }
    return exit_ok;
}

int run_enumerate(std::int64_t n, std::int64_t k, const std::string& strategy, int workers,
                  const std::string& out) {
    const kcm::enumeration_result r = kcm::enumerate_strategy(
        static_cast<kcm::card_t>(n), k, kcm::strategy_by_name(strategy), workers);
    kcm::json doc = kcm::to_json(r);
    doc["schema_version"] = kcm::schema_version;
    doc["command"] = "enumerate";
    std::ofstream file;
    std::ostream& os = open_output(file, out);
    os << doc.dump(2) << '\n';
    return exit_ok;
}

int run_experiment_cmd(const std::string& config_path, int workers, const std::string& format,
                       const std::string& out) {
    std::ifstream in(config_path);
    if (!in) throw kcm::config_error("cannot open config file: " + config_path);
    kcm::json j;
    in >> j;
    const kcm::experiment_config cfg = kcm::experiment_config_from_json(j);
    const kcm::run_summary summary = kcm::run_experiment(cfg, workers);
    std::ofstream file;
    std::ostream& os = open_output(file, out);
    if (format == "csv") {
        os << kcm::summary_to_csv(summary);
    } else {
        kcm::json doc = kcm::to_json(summary);
        doc["command"] = "experiment";
        os << doc.dump(2) << '\n';
    }
    return exit_ok;
}

kcm::checks::weak_law_params load_verify_config(const std::string& path) {
    kcm::checks::weak_law_params params;
    if (path.empty()) return params;
    std::ifstream in(path);
    if (!in) throw kcm::config_error("cannot open config file: " + path);
    kcm::json j;
    in >> j;
    if (j.contains("weaklaw")) {
        const auto& w = j.at("weaklaw");
        if (w.contains("n")) params.n_values = w.at("n").get<std::vector<std::int64_t>>();
        params.epsilon_fixed = w.value("epsilon_fixed", params.epsilon_fixed);
        params.epsilon_growing = w.value("epsilon_growing", params.epsilon_growing);
        params.trials = w.value("trials", params.trials);
        params.threshold = w.value("threshold", params.threshold);
    }
    return params;
}

int run_verify(const std::string& suite, const std::string& config_path, int workers,
               const std::string& format, const std::string& out) {
    std::vector<kcm::check_result> results;
    if (suite == "all") {
        results = kcm::acceptance_checks(workers);
    } else {
        results = kcm::run_suite(suite, workers, load_verify_config(config_path));
    }
    bool all_pass = true;
    std::ofstream file;
    std::ostream& os = open_output(file, out);
    kcm::json checks = kcm::json::array();
    for (const auto& r : results) {
        all_pass = all_pass && r.pass;
        // No timing in the machine-readable form: JSON output is
        // byte-deterministic for fixed flags.
        checks.push_back(kcm::json{{"name", r.name}, {"pass", r.pass}, {"details", r.details}});
    }
    if (format == "json") {
        const kcm::json doc{{"schema_version", kcm::schema_version},
                            {"command", "verify"},
                            {"suite", suite},
                            {"pass", all_pass},
                            {"checks", std::move(checks)}};
        os << doc.dump(2) << '\n';
    } else {
        for (const auto& r : results) {
            std::ostringstream row;
            row.precision(1);
            row << std::fixed;
            row << (r.pass ? "[PASS] " : "[FAIL] ") << r.name << " (" << r.seconds << "s)\n"
                << "       " << r.details << '\n';
            os << row.str();
        }
        os << (all_pass ? "suite passed\n" : "suite FAILED\n");
    }
    return all_pass ? exit_ok : exit_verification_failure;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"k-card-minimum random permutation workbench"};
    app.require_subcommand(1);
    app.fallthrough(); // let subcommands use the global --workers
    int workers = default_workers();
    app.add_option("--workers", workers, "worker threads (results are worker-count invariant)")
        ->capture_default_str();

    sample_options sample_opt;
    auto* sample = app.add_subcommand("sample", "generate kCM permutations");
    sample->add_option("n", sample_opt.n, "deck size")->required()->check(CLI::PositiveNumber);
    sample->add_option("k", sample_opt.k, "choices per step")->required()->check(CLI::PositiveNumber);
    sample->add_option("--mode", sample_opt.mode, "auto|direct|inverse")->capture_default_str();
    sample->add_option("--seed", sample_opt.seed, "master seed")->capture_default_str();
    sample->add_option("--count", sample_opt.count, "number of permutations")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    sample->add_option("--format", sample_opt.format, "text|json|csv")->capture_default_str();
    sample->add_option("--strategy", sample_opt.strategy, "min|copy|uniform|max")
        ->capture_default_str();
    sample->add_option("--out", sample_opt.out, "output file (default stdout)");

    stats_options stats_opt;
    auto* stats = app.add_subcommand("stats", "per-permutation order statistics (I, L, M)");
    stats->add_option("--in", stats_opt.in, "input file of text permutations ('-' for stdin)")
        ->capture_default_str();
    stats->add_option("--k", stats_opt.k, "k context for the greedy target size")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    stats->add_option("--format", stats_opt.format, "csv|json")->capture_default_str();
    stats->add_option("--out", stats_opt.out, "output file (default stdout)");

    std::int64_t mo_n = 0, mo_k = 0;
    std::string mo_format = "json", mo_out;
    auto* moments = app.add_subcommand("moments", "exact inversion mean/variance");
    moments->add_option("n", mo_n, "deck size")->required()->check(CLI::PositiveNumber);
    moments->add_option("k", mo_k, "choices per step")->required()->check(CLI::PositiveNumber);
    moments->add_option("--format", mo_format, "json|csv")->capture_default_str();
    moments->add_option("--out", mo_out, "output file (default stdout)");

    std::int64_t pmf_n = 0, pmf_k = 0;
    bool pmf_rational = false;
    std::string pmf_format = "json", pmf_out;
    auto* pmf = app.add_subcommand("pmf", "exact law of the inversion count");
    pmf->add_option("n", pmf_n, "deck size")->required()->check(CLI::PositiveNumber);
    pmf->add_option("k", pmf_k, "choices per step")->required()->check(CLI::PositiveNumber);
    pmf->add_flag("--rational", pmf_rational, "exact integer numerators over (n!)^k");
    pmf->add_option("--format", pmf_format, "json|csv")->capture_default_str();
    pmf->add_option("--out", pmf_out, "output file (default stdout)");

    std::int64_t en_n = 0, en_k = 0;
    std::string en_strategy = "min", en_out;
    auto* enumerate = app.add_subcommand("enumerate", "exact joint law of (I, L) for a strategy");
    enumerate->add_option("n", en_n, "deck size")->required()->check(CLI::PositiveNumber);
    enumerate->add_option("k", en_k, "choices per step")->required()->check(CLI::PositiveNumber);
    enumerate->add_option("--strategy", en_strategy, "min|copy|uniform|max")->capture_default_str();
    enumerate->add_option("--out", en_out, "output file (default stdout)");

    std::string ex_config, ex_format = "json", ex_out;
    auto* experiment = app.add_subcommand("experiment", "Monte Carlo experiment from a config file");
    experiment->add_option("--config", ex_config, "JSON experiment config")->required();
    experiment->add_option("--format", ex_format, "json|csv")->capture_default_str();
    experiment->add_option("--out", ex_out, "output file (default stdout)");

    std::string ve_suite, ve_config, ve_format = "text", ve_out;
    auto* verify = app.add_subcommand("verify", "run a verification suite");
    verify->add_option("--suite", ve_suite, "moments|clt|weaklaw|varL|scalingL|dominance|perturbation|oracle|all")
        ->required();
    verify->add_option("--config", ve_config, "JSON overrides for the weaklaw suite knobs");
    verify->add_option("--format", ve_format, "text|json")->capture_default_str();
    verify->add_option("--out", ve_out, "output file (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? exit_ok : exit_usage;
    }

    try {
        if (sample->parsed()) return run_sample(sample_opt);
        if (stats->parsed()) return run_stats(stats_opt);
        if (moments->parsed()) return run_moments(mo_n, mo_k, mo_format, mo_out);
        if (pmf->parsed()) return run_pmf(pmf_n, pmf_k, pmf_rational, pmf_format, pmf_out);
        if (enumerate->parsed()) return run_enumerate(en_n, en_k, en_strategy, workers, en_out);
        if (experiment->parsed()) return run_experiment_cmd(ex_config, workers, ex_format, ex_out);
        if (verify->parsed()) return run_verify(ve_suite, ve_config, workers, ve_format, ve_out);
    } catch (const kcm::error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_usage;
    }
    return exit_ok;
}
