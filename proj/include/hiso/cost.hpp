#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <functional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace hiso {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Twice-differentiable strongly convex cost oracle of one agent.
///
/// value/gradient/hessian are pure functions of the evaluation point and may
/// be called concurrently. m_lower and m_upper are the declared eigenvalue
/// bounds of the Hessian on the domain the cost is meant to be used on:
/// m_lower * I <= hessian(x) <= m_upper * I.
struct AgentCost {
    int dim = 0;
    double m_lower = 0.0;
    double m_upper = 0.0;
    std::function<double(const VectorXd&)> value;
    std::function<VectorXd(const VectorXd&)> gradient;
    std::function<MatrixXd(const VectorXd&)> hessian;
};

/// A fixed collection of agent costs sharing the decision dimension.
struct CostEnsemble {
    std::vector<AgentCost> agents;

    int size() const { return static_cast<int>(agents.size()); }
    int dim() const { return agents.empty() ? 0 : agents.front().dim; }

    double m_lower() const {
        double m = agents.front().m_lower;
        for (const auto& a : agents) m = std::min(m, a.m_lower);
        return m;
    }
    double m_upper() const {
        double m = agents.front().m_upper;
        for (const auto& a : agents) m = std::max(m, a.m_upper);
        return m;
    }

    double total_value(const VectorXd& x) const {
        double f = 0.0;
        for (const auto& a : agents) f += a.value(x);
        return f;
    }
    VectorXd total_gradient(const VectorXd& x) const {
        VectorXd g = VectorXd::Zero(dim());
        for (const auto& a : agents) g += a.gradient(x);
        return g;
    }
    MatrixXd total_hessian(const VectorXd& x) const {
        MatrixXd h = MatrixXd::Zero(dim(), dim());
        for (const auto& a : agents) h += a.hessian(x);
        return h;
    }
};

inline CostEnsemble make_ensemble(std::vector<AgentCost> agents) {
    if (agents.empty()) throw std::invalid_argument("make_ensemble: no agents");
    const int d = agents.front().dim;
    for (const auto& a : agents)
        if (a.dim != d) throw std::invalid_argument("make_ensemble: mixed dimensions");
    return CostEnsemble{std::move(agents)};
}

/// Scalar cost a x^2 + b x^4 with a > 0, b >= 0.
///
/// The Hessian 2a + 12 b x^2 is unbounded globally, so the declared upper
/// bound is taken over the box |x| <= box_radius.
inline AgentCost quartic_cost(double a, double b, double box_radius = 10.0) {
    if (a <= 0.0)
        throw std::invalid_argument("quartic_cost: a must be > 0 (got " + std::to_string(a) + ")");
    if (b < 0.0)
        throw std::invalid_argument("quartic_cost: b must be >= 0");
    AgentCost c;
    c.dim = 1;
    c.m_lower = 2.0 * a;
    c.m_upper = 2.0 * a + 12.0 * b * box_radius * box_radius;
    c.value = [a, b](const VectorXd& x) {
        const double t = x(0);
        return a * t * t + b * t * t * t * t;
    };
    c.gradient = [a, b](const VectorXd& x) {
        const double t = x(0);
        VectorXd g(1);
        g(0) = 2.0 * a * t + 4.0 * b * t * t * t;
        return g;
    };
    c.hessian = [a, b](const VectorXd& x) {
        const double t = x(0);
        MatrixXd h(1, 1);
        h(0, 0) = 2.0 * a + 12.0 * b * t * t;
        return h;
    };
    return c;
}

/// Quadratic cost 0.5 (x - c)^T H (x - c) for a symmetric PD H.
inline AgentCost quadratic_cost(const MatrixXd& h, const VectorXd& c) {
    if (h.rows() != h.cols() || h.rows() != c.size())
        throw std::invalid_argument("quadratic_cost: dimension mismatch");
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(h);
    AgentCost cost;
    cost.dim = static_cast<int>(c.size());
    cost.m_lower = es.eigenvalues().minCoeff();
    cost.m_upper = es.eigenvalues().maxCoeff();
    if (cost.m_lower <= 0.0)
        throw std::invalid_argument("quadratic_cost: H is not positive definite");
    cost.value = [h, c](const VectorXd& x) {
        VectorXd r = x - c;
        return 0.5 * r.dot(h * r);
    };
    cost.gradient = [h, c](const VectorXd& x) { return VectorXd(h * (x - c)); };
    cost.hessian = [h](const VectorXd&) { return h; };
    return cost;
}

/// Convenience: scalar quadratic 0.5 m (x - c)^2.
inline AgentCost scalar_quadratic(double m, double c) {
    MatrixXd h(1, 1);
    h(0, 0) = m;
    VectorXd cv(1);
    cv(0) = c;
    return quadratic_cost(h, cv);
}

/// Relative errors (with unit floor in the denominator) of central finite
/// differences of the value and gradient against the analytic gradient and
/// Hessian at x.
inline std::pair<double, double> fd_check(const AgentCost& cost, const VectorXd& x, double h) {
    if (h <= 0.0) throw std::invalid_argument("fd_check: h must be > 0");
    const int d = cost.dim;

    VectorXd g_fd(d);
    MatrixXd h_fd(d, d);
    for (int k = 0; k < d; ++k) {
        VectorXd xp = x, xm = x;
        xp(k) += h;
        xm(k) -= h;
        g_fd(k) = (cost.value(xp) - cost.value(xm)) / (2.0 * h);
        h_fd.col(k) = (cost.gradient(xp) - cost.gradient(xm)) / (2.0 * h);
    }
    h_fd = 0.5 * (h_fd + h_fd.transpose()).eval();

    const VectorXd g = cost.gradient(x);
    const MatrixXd hess = cost.hessian(x);
    const double grad_err = (g_fd - g).norm() / std::max(1.0, g.norm());
    const double hess_err = (h_fd - hess).norm() / std::max(1.0, hess.norm());
    return {grad_err, hess_err};
}

}  // namespace hiso
