#pragma once

#include "hiso/cost.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace hiso {

/// Raised when an Euler run blows past the divergence guard, which signals
/// an inadmissible stepsize for the chosen field.
class DivergenceError : public std::runtime_error {
public:
    DivergenceError(const std::string& what, double step) : std::runtime_error(what), step(step) {}
    double step;
};

/// Raised when a Hessian that must be positive definite fails its Cholesky
/// factorization. agent < 0 means the aggregate Hessian.
class NonPdHessianError : public std::runtime_error {
public:
    NonPdHessianError(const std::string& what, int agent = -1)
        : std::runtime_error(what), agent(agent) {}
    int agent;
};

enum class FlowKind { GD, NR, HISO };

inline const char* to_string(FlowKind k) {
    switch (k) {
        case FlowKind::GD: return "gd";
        case FlowKind::NR: return "nr";
        case FlowKind::HISO: return "hiso";
    }
    return "?";
}

/// A first-order flow dx/dt = gain * u(x).
struct FlowField {
    FlowKind kind = FlowKind::GD;
    double gain = 1.0;
};

namespace detail {

inline VectorXd pd_solve(const MatrixXd& h, const VectorXd& rhs, int agent = -1) {
    Eigen::LLT<MatrixXd> llt(h);
    if (llt.info() != Eigen::Success) {
        if (agent >= 0)
            throw NonPdHessianError("Hessian of agent " + std::to_string(agent) +
                                        " is not positive definite",
                                    agent);
        throw NonPdHessianError("aggregate Hessian is not positive definite");
    }
    return llt.solve(rhs);
}

}  // namespace detail

/// Steepest-descent direction -sum_i g^i(x).
inline VectorXd gd_field(const CostEnsemble& costs, const VectorXd& x) {
    return -costs.total_gradient(x);
}

/// Newton direction -(sum_i H^i(x))^{-1} sum_i g^i(x), by PD solve.
inline VectorXd nr_field(const CostEnsemble& costs, const VectorXd& x) {
    return -detail::pd_solve(costs.total_hessian(x), costs.total_gradient(x));
}

/// Hessian-inverse-sum direction -(1/N sum_i H^i(x)^{-1}) sum_i g^i(x).
/// Each agent's Hessian is applied through its own PD solve; no inverse is
/// ever formed.
inline VectorXd hiso_field(const CostEnsemble& costs, const VectorXd& x) {
    const VectorXd g = costs.total_gradient(x);
    VectorXd acc = VectorXd::Zero(costs.dim());
    for (int i = 0; i < costs.size(); ++i)
        acc += detail::pd_solve(costs.agents[i].hessian(x), g, i);
    return -acc / costs.size();
}

inline VectorXd eval_field(const FlowField& field, const CostEnsemble& costs, const VectorXd& x) {
    VectorXd u;
    switch (field.kind) {
        case FlowKind::GD: u = gd_field(costs, x); break;
        case FlowKind::NR: u = nr_field(costs, x); break;
        case FlowKind::HISO: u = hiso_field(costs, x); break;
    }
    return field.gain * u;
}

/// Gains that equalize the spectral-norm effort bounds of the three flows at
/// x0, taking the hessian-inverse-sum flow (gain 1) as the reference:
///   gain_gd = || (1/N) sum H^i(x0)^{-1} ||_2
///   gain_nr = || sum H^i(x0) ||_2 * gain_gd
struct EffortGains {
    double gain_gd = 1.0;
    double gain_nr = 1.0;
};

inline EffortGains normalize_effort(const CostEnsemble& costs, const VectorXd& x0) {
    const int d = costs.dim();
    MatrixXd inv_sum = MatrixXd::Zero(d, d);
    MatrixXd sum = MatrixXd::Zero(d, d);
    const MatrixXd eye = MatrixXd::Identity(d, d);
    for (int i = 0; i < costs.size(); ++i) {
        const MatrixXd h = costs.agents[i].hessian(x0);
        sum += h;
        Eigen::LLT<MatrixXd> llt(h);
        if (llt.info() != Eigen::Success)
            throw NonPdHessianError("Hessian of agent " + std::to_string(i) +
                                        " is not positive definite",
                                    i);
        inv_sum += llt.solve(eye);
    }
    inv_sum /= costs.size();

    const auto spectral_norm = [](const MatrixXd& m) {
        Eigen::SelfAdjointEigenSolver<MatrixXd> es(m);
        return es.eigenvalues().cwiseAbs().maxCoeff();
    };
    EffortGains g;
    g.gain_gd = spectral_norm(inv_sum);
    g.gain_nr = spectral_norm(sum) * g.gain_gd;
    return g;
}

/// One recorded state of a centralized Euler run.
struct FlowStep {
    double t = 0.0;
    VectorXd x;
    double f_gap = 0.0;      // f(x) - f(x*)
    double field_norm = 0.0; // ||gain * u(x)|| of the step taken from x
};

struct FlowTrace {
    std::vector<FlowStep> steps;
    bool reached_target = false;
};

namespace detail {

/// Shared Euler loop: x <- x + step * gain * u(x), halting on f-gap <= stop_gap
/// or after max_steps. Returns the number of update steps taken to reach the
/// target, or nullopt when the horizon ran out first. Aborts with
/// DivergenceError when the gap exceeds 1e6 x its initial value.
inline std::optional<long> euler_core(const FlowField& field, const CostEnsemble& costs,
                                      VectorXd x, double step, long max_steps, double stop_gap,
                                      double f_star, FlowTrace* trace) {
    double gap = costs.total_value(x) - f_star;
    const double blowup = 1e6 * std::max(gap, 1e-12);
    if (trace) {
        trace->steps.clear();
        trace->reached_target = false;
    }

    for (long k = 0;; ++k) {
        const VectorXd u = eval_field(field, costs, x);
        if (trace) trace->steps.push_back({k * step, x, gap, u.norm()});
        if (gap <= stop_gap) {
            if (trace) trace->reached_target = true;
            return k;
        }
        if (k >= max_steps) return std::nullopt;
        x += step * u;
        gap = costs.total_value(x) - f_star;
        if (!std::isfinite(gap) || gap > blowup)
            throw DivergenceError("euler run diverged at t = " + std::to_string((k + 1) * step) +
                                      " with step " + std::to_string(step),
                                  step);
    }
}

}  // namespace detail

/// Euler-discretized run of a flow; the trace records every step.
inline FlowTrace euler_run(const FlowField& field, const CostEnsemble& costs, const VectorXd& x0,
                           double step, double horizon, double stop_gap, double f_star) {
    if (step <= 0.0 || horizon <= 0.0)
        throw std::invalid_argument("euler_run: step and horizon must be > 0");
    FlowTrace trace;
    const long max_steps = static_cast<long>(std::ceil(horizon / step - 1e-9));
    detail::euler_core(field, costs, x0, step, max_steps, stop_gap, f_star, &trace);
    return trace;
}

/// Geometric grid of `points` stepsizes spanning [lo, hi].
inline std::vector<double> step_grid(double lo = 1e-4, double hi = 1e1, int points = 40) {
    std::vector<double> grid(points);
    for (int k = 0; k < points; ++k)
        grid[k] = lo * std::pow(hi / lo, static_cast<double>(k) / (points - 1));
    return grid;
}

struct GridSearchResult {
    double best_step = 0.0;
    long best_iters = -1;
    // (step, iterations to target); -1 marks divergence or horizon exhaustion
    std::vector<std::pair<double, long>> table;
};

/// Picks the grid stepsize minimizing Euler iterations to reach target_gap.
/// Diverging or non-converging stepsizes score as failures; the first grid
/// point attaining the minimum wins ties. Throws when no stepsize converges.
inline GridSearchResult grid_search_stepsize(const FlowField& field, const CostEnsemble& costs,
                                             const VectorXd& x0, const std::vector<double>& grid,
                                             double target_gap, double f_star,
                                             double horizon = 50.0) {
    if (grid.empty()) throw std::invalid_argument("grid_search_stepsize: empty grid");
    GridSearchResult res;
    for (double step : grid) {
        const long max_steps = static_cast<long>(std::ceil(horizon / step - 1e-9));
        long iters = -1;
        try {
            auto reached =
                detail::euler_core(field, costs, x0, step, max_steps, target_gap, f_star, nullptr);
            if (reached) iters = *reached;
        } catch (const DivergenceError&) {
            iters = -1;
        }
        res.table.emplace_back(step, iters);
        if (iters >= 0 && (res.best_iters < 0 || iters < res.best_iters)) {
            res.best_iters = iters;
            res.best_step = step;
        }
    }
    if (res.best_iters < 0)
        throw std::runtime_error("grid_search_stepsize: no stepsize in the grid converged");
    return res;
}

/// Damped Newton iteration with backtracking line search on the total cost.
/// Returns x with ||sum_i g^i(x)|| <= tol; the reference minimizer for traces
/// and gap computations.
inline VectorXd newton_oracle(const CostEnsemble& costs, const VectorXd& x0, double tol = 1e-10,
                              int max_iters = 200) {
    VectorXd x = x0;
    for (int it = 0; it < max_iters; ++it) {
        const VectorXd g = costs.total_gradient(x);
        if (g.norm() <= tol) return x;
        const VectorXd p = -detail::pd_solve(costs.total_hessian(x), g);
        const double fx = costs.total_value(x);
        const double slope = g.dot(p);
        double alpha = 1.0;
        for (int ls = 0; ls < 60; ++ls) {
            if (costs.total_value(x + alpha * p) <= fx + 1e-4 * alpha * slope) break;
            alpha *= 0.5;
        }
        x += alpha * p;
    }
    if (costs.total_gradient(x).norm() <= tol) return x;
    throw std::runtime_error("newton_oracle: no convergence within " + std::to_string(max_iters) +
                             " iterations");
}

}  // namespace hiso
