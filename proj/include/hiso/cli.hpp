#pragma once

#include "hiso/experiments.hpp"
#include "hiso/suites.hpp"
#include "hiso/trace_io.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

namespace hiso {

namespace detail {

inline void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path);
    out << text;
    if (!out) throw std::runtime_error("write failed for " + path);
}

inline std::string assertion_lines(const std::vector<AssertionResult>& assertions) {
    std::ostringstream os;
    for (const auto& a : assertions)
        os << "  " << (a.pass ? "PASS" : "FAIL") << "  " << a.name << "  (" << a.lhs << " vs "
           << a.rhs << ")\n";
    return os.str();
}

}  // namespace detail

inline std::string quartic_summary(const QuarticReport& rep, const ExperimentConfig& cfg) {
    std::ostringstream os;
    os << "quartic comparison: seed " << cfg.seed << ", " << cfg.n_agents
       << " agents, coefficients in [" << cfg.coeff_low << ", " << cfg.coeff_high << "], x0 = "
       << cfg.x0 << "\n";
    os << "reference minimizer x* = " << rep.x_star(0) << ", f* = " << rep.f_star << "\n";
    os << "effort gains: gd = " << rep.gains.gain_gd << ", nr = " << rep.gains.gain_nr << "\n";
    os << "algorithm        stepsize      iters to 1e-2 / 1e-4 / 1e-6\n";
    for (const auto& a : rep.algos) {
        os << "  " << a.name;
        for (size_t k = a.name.size(); k < 15; ++k) os << ' ';
        os << a.stepsize << "\t" << a.iters[0] << " / " << a.iters[1] << " / " << a.iters[2]
           << "\n";
    }
    os << "assertions:\n" << detail::assertion_lines(rep.assertions);
    return os.str();
}

inline void write_quartic_outputs(const QuarticReport& rep, const ExperimentConfig& cfg,
                                  const std::string& dir) {
    std::filesystem::create_directories(dir);
    std::vector<NamedTrace> named;
    for (const auto& a : rep.algos) {
        const auto rows = to_rows(a.trace);
        write_trace(rows, dir + "/trace_" + a.name + ".csv");
        named.push_back({a.name, rows});
    }
    emit_plot(named, dir + "/plot.svg", "objective gap, grid-optimal stepsizes");
    detail::write_text(dir + "/report.txt", quartic_summary(rep, cfg));
}

inline std::string logreg_summary(const LogregReport& rep, const ExperimentConfig& cfg) {
    std::ostringstream os;
    os << "distributed logistic regression: seed " << cfg.seed << ", graph "
       << (cfg.graph_name.empty() ? "custom" : cfg.graph_name) << ", p = " << cfg.features
       << ", samples/agent = " << cfg.samples_per_agent << ", lambda = " << cfg.lambda
       << ", separation = " << cfg.separation << "\n";
    os << "integration: step = " << cfg.step << ", horizon = " << cfg.horizon
       << ", sgn epsilon = " << cfg.epsilon << "\n";
    os << "reference minimizer gradient norm target 1e-10; f* = " << rep.f_star << "\n";
    os << "consensus settling bound t_pred = " << rep.dhiso.t_pred << "\n";
    {
        const Graph g = resolve_graph(cfg);
        const int d = cfg.features + 1;
        long max_floats = 0, total = 0;
        for (int i = 0; i < g.n_nodes(); ++i) {
            const long f = floats_sent_per_step(g, i, d);
            max_floats = std::max(max_floats, f);
            total += f;
        }
        os << "per-agent traffic: 2d floats per neighbor per step (d = " << d
           << "); max " << max_floats << ", network total " << total
           << " floats/step; local Hessians never travel\n";
    }
    os << "time to f-gap 1e-2: dhiso = " << rep.t_gap_dhiso << ", dgd2 = " << rep.t_gap_dgd2
       << "\n";
    os << "max_i ||x^i - x*|| at T: dhiso = " << rep.final_err_dhiso
       << ", dgd2 = " << rep.final_err_dgd2 << "\n";
    os << "assertions:\n" << detail::assertion_lines(rep.assertions);
    return os.str();
}

inline void write_logreg_outputs(const LogregReport& rep, const ExperimentConfig& cfg,
                                 const std::string& dir) {
    std::filesystem::create_directories(dir);
    const auto rows_dhiso = to_rows(rep.dhiso);
    const auto rows_dgd2 = to_rows(rep.dgd2);
    write_trace(rows_dhiso, dir + "/trace_dhiso.csv");
    write_trace(rows_dgd2, dir + "/trace_dgd2.csv");
    write_logreg_csv(rep.data, dir + "/data.csv");
    emit_plot({{"dhiso", rows_dhiso}, {"dgd2", rows_dgd2}}, dir + "/plot.svg",
              "objective gap at the agent average");
    detail::write_text(dir + "/report.txt", logreg_summary(rep, cfg));
}

/// Command-line front end. Exit codes: 0 = success and all assertions
/// passed, 1 = an assertion or run failed, 2 = configuration error.
inline int cli_main(const std::vector<std::string>& args) {
    CLI::App app{"continuous-time and distributed second-order optimization flows"};
    app.require_subcommand(1);
    app.fallthrough();

    // global overrides, honored by every subcommand they make sense for
    uint64_t seed = 0;
    std::string out_dir;
    double step = 0.0, horizon = 0.0, epsilon = 0.0;
    auto* seed_opt = app.add_option("--seed", seed, "seed for all randomness");
    auto* out_opt = app.add_option("--out", out_dir, "output directory");
    auto* step_opt = app.add_option("--step", step, "Euler stepsize");
    auto* horizon_opt = app.add_option("--horizon", horizon, "simulated time horizon");
    auto* eps_opt = app.add_option("--epsilon", epsilon, "sgn boundary-layer width (0 = exact)");

    auto* lemma1 = app.add_subcommand(
        "lemma1", "randomized matrix-bound and rate-dominance property suites");
    int instances = 1000, pairs = 200;
    double tol = 1e-9;
    lemma1->add_option("--instances", instances, "SPD ensembles to draw");
    lemma1->add_option("--pairs", pairs, "(ensemble, point) pairs to draw");
    lemma1->add_option("--tol", tol, "eigenvalue / margin tolerance");

    auto* quartic = app.add_subcommand("quartic", "centralized comparison on a quartic ensemble");
    int agents = 10;
    bool full_range = false;
    quartic->add_option("--agents", agents, "ensemble size");
    quartic->add_flag("--full-range", full_range,
                      "sample coefficients in [0, 0.1] instead of [0.01, 0.1]");

    auto* logreg =
        app.add_subcommand("logreg", "distributed logistic-regression comparison");
    double separation = -1.0;
    logreg->add_option("--separation", separation, "class-mean offset of the synthetic data");

    auto* runcmd = app.add_subcommand("run", "run an experiment from a config file");
    std::string config_path;
    runcmd->add_option("--config", config_path, "config file path")->required();

    auto* graphcmd = app.add_subcommand("graph", "inspect a built-in graph");
    std::string graph_name = "fig1";
    bool do_print = false;
    graphcmd->add_option("--name", graph_name, "built-in graph name");
    graphcmd->add_flag("--print", do_print, "print Laplacian and spectral constants");

    std::vector<const char*> argv;
    argv.push_back("hiso");
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    const auto apply_overrides = [&](ExperimentConfig& cfg) {
        if (seed_opt->count()) cfg.seed = seed;
        if (out_opt->count()) cfg.out_dir = out_dir;
        if (step_opt->count()) cfg.step = step;
        if (horizon_opt->count()) cfg.horizon = horizon;
        if (eps_opt->count()) cfg.epsilon = epsilon;
    };

    const auto run_quartic_cmd = [&](ExperimentConfig cfg) {
        apply_overrides(cfg);
        if (cfg.out_dir.empty()) cfg.out_dir = "out/" + cfg.name;
        const QuarticReport rep = run_quartic(cfg);
        std::cout << quartic_summary(rep, cfg);
        write_quartic_outputs(rep, cfg, cfg.out_dir);
        std::cout << "wrote traces, plot.svg and report.txt to " << cfg.out_dir << "\n";
        return rep.all_pass ? 0 : 1;
    };

    const auto run_logreg_cmd = [&](ExperimentConfig cfg) {
        apply_overrides(cfg);
        if (cfg.out_dir.empty()) cfg.out_dir = "out/" + cfg.name;
        const LogregReport rep = run_logreg(cfg);
        std::cout << logreg_summary(rep, cfg);
        write_logreg_outputs(rep, cfg, cfg.out_dir);
        std::cout << "wrote traces, data.csv, plot.svg and report.txt to " << cfg.out_dir << "\n";
        return rep.all_pass ? 0 : 1;
    };

    try {
        if (lemma1->parsed()) {
            const uint64_t s = seed_opt->count() ? seed : 1;
            const MatrixBoundStats mb = inverse_sum_bound_suite(instances, s, tol);
            std::cout << "inverse-sum bound: " << mb.instances
                      << " instances, min eigenvalue = " << mb.min_eigenvalue << " (worst N = "
                      << mb.worst_n << ", d = " << mb.worst_d << ")  "
                      << (mb.pass ? "PASS" : "FAIL") << "\n";
            const RateDominanceStats rd = rate_dominance_suite(pairs, s, tol);
            std::cout << "rate dominance:    " << rd.pairs
                      << " pairs, min margin = " << rd.min_margin << "  "
                      << (rd.pass ? "PASS" : "FAIL") << "\n";
            return (mb.pass && rd.pass) ? 0 : 1;
        }
        if (quartic->parsed()) {
            ExperimentConfig cfg = ExperimentConfig::quartic_defaults();
            cfg.n_agents = agents;
            if (full_range) cfg.coeff_low = 0.0;
            return run_quartic_cmd(cfg);
        }
        if (logreg->parsed()) {
            ExperimentConfig cfg = ExperimentConfig::logreg_defaults();
            if (separation >= 0.0) cfg.separation = separation;
            return run_logreg_cmd(cfg);
        }
        if (runcmd->parsed()) {
            const ExperimentConfig cfg = config_from_file(config_path);
            if (cfg.kind == "quartic") return run_quartic_cmd(cfg);
            return run_logreg_cmd(cfg);
        }
        if (graphcmd->parsed()) {
            if (graph_name != "fig1")
                throw ConfigError("unknown graph name '" + graph_name + "' (built-ins: fig1)");
            const Graph g = fig1_graph();
            const GraphMatrices gm = graph_matrices(g);
            std::cout << "graph " << graph_name << ": " << g.n_nodes() << " nodes, " << g.n_edges()
                      << " edges\n";
            if (do_print) {
                std::cout << "Laplacian:\n" << gm.laplacian << "\n";
                std::cout << "eigenvalues: " << gm.eigenvalues.transpose() << "\n";
                std::cout << "lambda2 = " << gm.lambda2 << ", lambda_n = " << gm.lambda_n
                          << ", lambda_bar = " << gm.lambda_bar << "\n";
            }
            return 0;
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;  // unreachable with require_subcommand(1)
}

}  // namespace hiso
