#pragma once

#include "hiso/config.hpp"
#include "hiso/dhiso.hpp"
#include "hiso/flows.hpp"
#include "hiso/logreg.hpp"
#include "hiso/random.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

namespace hiso {

/// Objective-gap thresholds the reports count iterations/time against.
inline constexpr std::array<double, 3> kGapThresholds = {1e-2, 1e-4, 1e-6};

/// One evaluated ordering claim; lhs and rhs are the two quantities compared.
struct AssertionResult {
    std::string name;
    double lhs = 0.0;
    double rhs = 0.0;
    bool pass = false;
};

/// Result of one algorithm variant in the centralized comparison.
struct AlgoResult {
    std::string name;
    FlowField field;
    double stepsize = 0.0;              // grid-optimal
    std::array<long, 3> iters{};        // to kGapThresholds; -1 = not reached
    FlowTrace trace;
};

struct QuarticReport {
    std::vector<AlgoResult> algos;
    std::vector<AssertionResult> assertions;
    VectorXd x_star;
    double f_star = 0.0;
    EffortGains gains;
    bool all_pass = true;

    const AlgoResult& algo(const std::string& name) const {
        for (const auto& a : algos)
            if (a.name == name) return a;
        throw std::out_of_range("no algorithm result named " + name);
    }
};

namespace detail {

inline long iters_to_gap(const FlowTrace& trace, double threshold) {
    for (size_t k = 0; k < trace.steps.size(); ++k)
        if (trace.steps[k].f_gap <= threshold) return static_cast<long>(k);
    return -1;
}

inline double time_to_gap(const DistTrace& trace, double threshold) {
    for (const auto& s : trace.steps)
        if (s.f_gap <= threshold) return s.t;
    return std::numeric_limits<double>::infinity();
}

inline AssertionResult make_assertion(std::string name, double lhs, double rhs, bool pass) {
    return AssertionResult{std::move(name), lhs, rhs, pass};
}

}  // namespace detail

/// Centralized comparison on a random quartic ensemble: GD, NR and the
/// hessian-inverse-sum flow at unit gain, the two effort-normalized variants,
/// and an explicit-gain GD variant, each integrated at its grid-optimal
/// stepsize. Assertions record the expected iteration-count orderings.
inline QuarticReport run_quartic(const ExperimentConfig& cfg) {
    std::mt19937_64 rng = make_rng(cfg.seed, /*stream=*/3);
    std::uniform_real_distribution<double> coeff(cfg.coeff_low, cfg.coeff_high);

    std::vector<AgentCost> agents;
    agents.reserve(cfg.n_agents);
    for (int i = 0; i < cfg.n_agents; ++i) {
        const double a = coeff(rng);
        const double b = coeff(rng);
        agents.push_back(quartic_cost(a, b, cfg.box_radius));
    }
    const CostEnsemble ens = make_ensemble(std::move(agents));

    VectorXd x0(1);
    x0(0) = cfg.x0;

    QuarticReport report;
    report.x_star = newton_oracle(ens, VectorXd::Zero(1), 1e-12);
    report.f_star = ens.total_value(report.x_star);
    report.gains = normalize_effort(ens, x0);

    const std::vector<std::pair<std::string, FlowField>> variants = {
        {"gd", {FlowKind::GD, 1.0}},
        {"nr", {FlowKind::NR, 1.0}},
        {"hiso", {FlowKind::HISO, 1.0}},
        {"gd-normalized", {FlowKind::GD, report.gains.gain_gd}},
        {"nr-normalized", {FlowKind::NR, report.gains.gain_nr}},
        {"gd-alpha", {FlowKind::GD, cfg.alt_gain}},
    };

    const std::vector<double> grid = step_grid(cfg.grid_low, cfg.grid_high, cfg.grid_points);
    const double target = kGapThresholds.back();
    for (const auto& [name, field] : variants) {
        AlgoResult res;
        res.name = name;
        res.field = field;
        const GridSearchResult gs =
            grid_search_stepsize(field, ens, x0, grid, target, report.f_star, cfg.horizon);
        res.stepsize = gs.best_step;
        res.trace = euler_run(field, ens, x0, gs.best_step, cfg.horizon, target, report.f_star);
        for (size_t k = 0; k < kGapThresholds.size(); ++k)
            res.iters[k] = detail::iters_to_gap(res.trace, kGapThresholds[k]);
        report.algos.push_back(std::move(res));
    }

    const long gd = report.algo("gd").iters[2];
    const long nr = report.algo("nr").iters[2];
    const long hiso = report.algo("hiso").iters[2];
    const long gd_alpha = report.algo("gd-alpha").iters[2];
    const long gd_norm = report.algo("gd-normalized").iters[2];

    auto& as = report.assertions;
    as.push_back(detail::make_assertion("iters_hiso <= iters_gd", hiso, gd,
                                        hiso >= 0 && gd >= 0 && hiso <= gd));
    as.push_back(
        detail::make_assertion("iters_nr <= iters_gd", nr, gd, nr >= 0 && gd >= 0 && nr <= gd));
    as.push_back(detail::make_assertion("|iters_hiso - iters_nr| <= max(iters_hiso, iters_nr)",
                                        std::abs(hiso - nr), std::max(hiso, nr),
                                        hiso >= 0 && nr >= 0 &&
                                            std::abs(hiso - nr) <= std::max(hiso, nr)));
    as.push_back(detail::make_assertion("max(iters_hiso, iters_nr) <= 2 min(iters_hiso, iters_nr)",
                                        std::max(hiso, nr), 2 * std::min(hiso, nr),
                                        hiso >= 0 && nr >= 0 &&
                                            std::max(hiso, nr) <= 2 * std::min(hiso, nr)));
    as.push_back(detail::make_assertion("iters_gd_alpha > iters_hiso", gd_alpha, hiso,
                                        gd_alpha >= 0 && hiso >= 0 && gd_alpha > hiso));
    as.push_back(detail::make_assertion("iters_gd_normalized >= iters_hiso", gd_norm, hiso,
                                        gd_norm >= 0 && hiso >= 0 && gd_norm >= hiso));
    for (const auto& a : as) report.all_pass = report.all_pass && a.pass;
    return report;
}

struct LogregReport {
    LogRegData data;
    VectorXd x_star;
    double f_star = 0.0;
    DistTrace dhiso;
    DistTrace dgd2;
    double t_gap_dhiso = 0.0;   // simulated time to f-gap 1e-2
    double t_gap_dgd2 = 0.0;
    double final_err_dhiso = 0.0;  // max_i ||x^i - x*|| at the final step
    double final_err_dgd2 = 0.0;
    std::vector<AssertionResult> assertions;
    bool all_pass = true;
};

/// Distributed comparison: the protocol and its gradient-descent
/// degeneration on the same data, graph and Gaussian initial decisions.
inline LogregReport run_logreg(const ExperimentConfig& cfg) {
    const Graph g = resolve_graph(cfg);
    const int n = g.n_nodes();

    LogregReport report;
    report.data = generate_logreg_data(cfg.seed, n, cfg.features, cfg.samples_per_agent,
                                       cfg.separation, cfg.lambda);
    const CostEnsemble ens = logistic_ensemble(report.data);
    const int d = ens.dim();

    report.x_star = newton_oracle(ens, VectorXd::Zero(d), 1e-10);
    report.f_star = ens.total_value(report.x_star);

    std::mt19937_64 rng = make_rng(cfg.seed, /*stream=*/4);
    const MatrixXd x0 = random_gaussian_matrix(n, d, rng);

    report.dhiso = dhiso_run(g, ens, x0, cfg.step, cfg.horizon, cfg.epsilon, report.x_star);
    report.dgd2 = dgd2_run(g, ens, x0, cfg.step, cfg.horizon, cfg.epsilon, report.x_star);

    report.t_gap_dhiso = detail::time_to_gap(report.dhiso, 1e-2);
    report.t_gap_dgd2 = detail::time_to_gap(report.dgd2, 1e-2);
    report.final_err_dhiso = report.dhiso.steps.back().max_opt_err;
    report.final_err_dgd2 = report.dgd2.steps.back().max_opt_err;

    auto& as = report.assertions;
    as.push_back(detail::make_assertion("t_to_gap_1e-2: dhiso < dgd2", report.t_gap_dhiso,
                                        report.t_gap_dgd2,
                                        report.t_gap_dhiso < report.t_gap_dgd2));
    as.push_back(detail::make_assertion("dhiso max_i ||x_i - x*|| at T <= 1e-3",
                                        report.final_err_dhiso, 1e-3,
                                        report.final_err_dhiso <= 1e-3));
    for (const auto& a : as) report.all_pass = report.all_pass && a.pass;
    return report;
}

}  // namespace hiso
