#pragma once

#include "hiso/cost.hpp"
#include "hiso/flows.hpp"
#include "hiso/graph.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace hiso {

/// Componentwise sign with sgn(0) = 0. epsilon > 0 selects the boundary-layer
/// surrogate u_k / max(|u_k|, epsilon), which is linear inside the band and
/// saturates to +-1 outside it.
inline double sgn(double u, double epsilon = 0.0) {
    if (epsilon > 0.0) return u / std::max(std::abs(u), epsilon);
    return u > 0.0 ? 1.0 : (u < 0.0 ? -1.0 : 0.0);
}

inline VectorXd sgn(const VectorXd& u, double epsilon = 0.0) {
    VectorXd out(u.size());
    for (int k = 0; k < u.size(); ++k) out(k) = sgn(u(k), epsilon);
    return out;
}

/// Per-agent protocol state: row i of x and v belongs to agent i.
/// z^i = g^i(x^i) + v^i is derived, never integrated.
struct NetworkState {
    MatrixXd x;  // N x d
    MatrixXd v;  // N x d
    double t = 0.0;
};

/// Stacks z^i = g^i(x^i) + v^i as rows.
inline MatrixXd z_of(const NetworkState& state, const CostEnsemble& costs) {
    MatrixXd z = state.v;
    for (int i = 0; i < costs.size(); ++i)
        z.row(i) += costs.agents[i].gradient(state.x.row(i).transpose()).transpose();
    return z;
}

namespace detail {

/// Frobenius norm of the row-demeaned matrix: the stacked-vector norm of the
/// projection onto the disagreement space.
inline double disagreement_norm(const MatrixXd& m) {
    const Eigen::RowVectorXd mean = m.colwise().mean();
    return (m.rowwise() - mean).norm();
}

}  // namespace detail

/// Runtime consensus diagnostics. zg_gap measures || sum_i z^i - sum_i g^i ||
/// with the two sums computed independently; it stays at roundoff because z
/// is defined algebraically from g and v.
struct ConsensusDiagnostics {
    double cons_x = 0.0;    // || disagreement of x ||
    double cons_z = 0.0;    // || disagreement of z ||
    double sum_z = 0.0;     // || sum_i z^i ||
    double sum_v = 0.0;     // || sum_i v^i ||
    double grad_sum = 0.0;  // || sum_i g^i(x^i) ||
    double zg_gap = 0.0;    // || sum_i z^i - sum_i g^i(x^i) ||
};

inline ConsensusDiagnostics diagnostics(const NetworkState& state, const Graph&,
                                        const CostEnsemble& costs) {
    const int n = costs.size();
    const int d = costs.dim();
    MatrixXd grads(n, d);
    for (int i = 0; i < n; ++i)
        grads.row(i) = costs.agents[i].gradient(state.x.row(i).transpose()).transpose();
    const MatrixXd z = state.v + grads;

    ConsensusDiagnostics out;
    out.cons_x = detail::disagreement_norm(state.x);
    out.cons_z = detail::disagreement_norm(z);
    const Eigen::RowVectorXd sum_z_vec = z.colwise().sum();
    const Eigen::RowVectorXd sum_g_vec = grads.colwise().sum();
    out.sum_z = sum_z_vec.norm();
    out.sum_v = state.v.colwise().sum().norm();
    out.grad_sum = sum_g_vec.norm();
    out.zg_gap = (sum_z_vec - sum_g_vec).norm();
    return out;
}

struct ProtocolRhs {
    MatrixXd dv;  // N x d
    MatrixXd dx;  // N x d
};

/// Right-hand side of the distributed protocol:
///   z^i  = g^i(x^i) + v^i
///   dv^i = -sum_j a_ij sgn(z^i - z^j) + sum_j a_ij (x^i - x^j)
///   dx^i = -H^i(x^i)^{-1} (z^i + sum_j a_ij (x^i - x^j))
/// Each agent reads only its own state and its one-hop neighbors' (x^j, z^j);
/// the local Hessian enters through a PD solve and is never exchanged, so an
/// agent sends d * 2 * degree floats per step. identity_hessian replaces each
/// H^i by I, which degenerates the protocol to distributed gradient descent.
inline ProtocolRhs protocol_rhs(const NetworkState& state, const Graph& g,
                                const CostEnsemble& costs, double epsilon,
                                bool identity_hessian = false) {
    const int n = costs.size();
    const int d = costs.dim();
    if (g.n_nodes() != n)
        throw std::invalid_argument("protocol_rhs: graph has " + std::to_string(g.n_nodes()) +
                                    " nodes but ensemble has " + std::to_string(n) + " agents");

    const MatrixXd z = z_of(state, costs);
    ProtocolRhs rhs;
    rhs.dv.resize(n, d);
    rhs.dx.resize(n, d);

    for (int i = 0; i < n; ++i) {
        Eigen::RowVectorXd sign_sum = Eigen::RowVectorXd::Zero(d);
        Eigen::RowVectorXd x_diff = Eigen::RowVectorXd::Zero(d);
        for (int j : g.neighbors(i)) {
            sign_sum += sgn((z.row(i) - z.row(j)).transpose(), epsilon).transpose();
            x_diff += state.x.row(i) - state.x.row(j);
        }
        rhs.dv.row(i) = -sign_sum + x_diff;

        const Eigen::RowVectorXd drive = z.row(i) + x_diff;
        if (identity_hessian) {
            rhs.dx.row(i) = -drive;
        } else {
            const MatrixXd h = costs.agents[i].hessian(state.x.row(i).transpose());
            Eigen::LLT<MatrixXd> llt(h);
            if (llt.info() != Eigen::Success)
                throw NonPdHessianError("Hessian of agent " + std::to_string(i) +
                                            " is not positive definite",
                                        i);
            rhs.dx.row(i) = -llt.solve(drive.transpose()).transpose();
        }
    }
    return rhs;
}

inline ProtocolRhs dhiso_rhs(const NetworkState& state, const Graph& g, const CostEnsemble& costs,
                             double epsilon = 0.0) {
    return protocol_rhs(state, g, costs, epsilon, false);
}

/// Floats an agent sends to its neighbors per step: its current x^i and z^i
/// (d values each) to every one-hop neighbor. Per-agent cost is linear in d
/// and the degree; the local Hessian never travels.
inline long floats_sent_per_step(const Graph& g, int agent, int d) {
    return 2L * d * g.degree(agent);
}

/// Time by which the disagreement part of z is guaranteed to have reached
/// zero in the continuous dynamics: 2 sqrt(lambda_bar) * || z(0) demeaned ||.
inline double finite_time_bound(const Graph& g, const MatrixXd& z0) {
    const GraphMatrices gm = graph_matrices(g);
    return 2.0 * std::sqrt(gm.lambda_bar) * detail::disagreement_norm(z0);
}

inline double finite_time_bound(const Graph& g, const CostEnsemble& costs,
                                const NetworkState& state0) {
    return finite_time_bound(g, z_of(state0, costs));
}

/// One recorded step of a distributed run.
struct DistStep {
    double t = 0.0;
    double f_gap = 0.0;       // f(mean of agents) - f(x*)
    ConsensusDiagnostics diag;
    double max_opt_err = 0.0;     // max_i || x^i - x* ||
    double max_field_norm = 0.0;  // max_i || dx^i || of the step taken from here
};

struct DistTrace {
    std::vector<DistStep> steps;
    NetworkState final_state;
    double t_pred = 0.0;  // finite_time_bound evaluated at the initial state
};

using StateObserver = std::function<void(const NetworkState&)>;

namespace detail {

inline DistTrace run_protocol(const Graph& g, const CostEnsemble& costs, const MatrixXd& x0,
                              double step, double horizon, double epsilon, const VectorXd& x_star,
                              bool identity_hessian, const MatrixXd* v0,
                              const StateObserver& observer) {
    const int n = costs.size();
    const int d = costs.dim();
    if (x0.rows() != n || x0.cols() != d)
        throw std::invalid_argument("run_protocol: x0 must be N x d");
    if (step <= 0.0 || horizon <= 0.0)
        throw std::invalid_argument("run_protocol: step and horizon must be > 0");

    NetworkState state;
    state.x = x0;
    state.v = v0 ? *v0 : MatrixXd::Zero(n, d);
    state.t = 0.0;
    if (v0) {
        const double drift = v0->colwise().sum().norm();
        if (drift > 1e-9 * (1.0 + n * v0->cwiseAbs().maxCoeff()))
            throw std::invalid_argument(
                "run_protocol: v(0) must sum to zero across agents for the consensus estimator");
    }

    const double f_star = costs.total_value(x_star);
    DistTrace trace;
    trace.t_pred = finite_time_bound(g, costs, state);

    const long max_steps = static_cast<long>(std::ceil(horizon / step - 1e-9));
    trace.steps.reserve(max_steps + 1);

    const auto mean_of = [&](const MatrixXd& x) { return VectorXd(x.colwise().mean().transpose()); };
    double gap0 = costs.total_value(mean_of(state.x)) - f_star;
    const double blowup = 1e6 * std::max(gap0, 1e-12);

    for (long k = 0;; ++k) {
        if (observer) observer(state);
        const ProtocolRhs rhs = protocol_rhs(state, g, costs, epsilon, identity_hessian);

        DistStep rec;
        rec.t = state.t;
        rec.diag = diagnostics(state, g, costs);
        rec.f_gap = costs.total_value(mean_of(state.x)) - f_star;
        double err = 0.0, fnorm = 0.0;
        for (int i = 0; i < n; ++i) {
            err = std::max(err, (state.x.row(i).transpose() - x_star).norm());
            fnorm = std::max(fnorm, rhs.dx.row(i).norm());
        }
        rec.max_opt_err = err;
        rec.max_field_norm = fnorm;
        trace.steps.push_back(rec);

        if (!std::isfinite(rec.f_gap) || rec.f_gap > blowup)
            throw DivergenceError("distributed run diverged at t = " + std::to_string(state.t) +
                                      " with step " + std::to_string(step),
                                  step);
        if (k >= max_steps) break;

        state.x += step * rhs.dx;
        state.v += step * rhs.dv;
        state.t = (k + 1) * step;
    }
    trace.final_state = state;
    return trace;
}

}  // namespace detail

/// Euler run of the distributed protocol from x0 with v(0) = 0 (or an
/// explicit v0 summing to zero). The trace records every step.
inline DistTrace dhiso_run(const Graph& g, const CostEnsemble& costs, const MatrixXd& x0,
                           double step, double horizon, double epsilon, const VectorXd& x_star,
                           const StateObserver& observer = nullptr, const MatrixXd* v0 = nullptr) {
    return detail::run_protocol(g, costs, x0, step, horizon, epsilon, x_star, false, v0, observer);
}

/// Gradient-descent degeneration: identical to dhiso_run with every local
/// Hessian replaced by the identity.
inline DistTrace dgd2_run(const Graph& g, const CostEnsemble& costs, const MatrixXd& x0,
                          double step, double horizon, double epsilon, const VectorXd& x_star,
                          const StateObserver& observer = nullptr, const MatrixXd* v0 = nullptr) {
    return detail::run_protocol(g, costs, x0, step, horizon, epsilon, x_star, true, v0, observer);
}

}  // namespace hiso
