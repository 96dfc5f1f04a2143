#pragma once

#include "hiso/random.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include <cstdint>
#include <random>

namespace hiso {

/// Randomized check of the matrix inequality
///   (sum_i H^i)^{-1} <= (1/N) sum_i (H^i)^{-1}
/// over SPD ensembles: the minimum eigenvalue of the difference must not dip
/// below -tolerance in any instance.
struct MatrixBoundStats {
    int instances = 0;
    double min_eigenvalue = 0.0;  // most negative eigenvalue seen
    int worst_instance = -1;
    int worst_n = 0;
    int worst_d = 0;
    double tolerance = 0.0;
    bool pass = false;
};

inline MatrixBoundStats inverse_sum_bound_suite(int instances, uint64_t seed,
                                                double tolerance = 1e-9) {
    std::mt19937_64 rng = make_rng(seed, /*stream=*/1);
    std::uniform_int_distribution<int> pick_n(2, 8);
    std::uniform_int_distribution<int> pick_d(1, 6);

    MatrixBoundStats stats;
    stats.instances = instances;
    stats.tolerance = tolerance;
    stats.min_eigenvalue = std::numeric_limits<double>::infinity();

    for (int inst = 0; inst < instances; ++inst) {
        const int n = pick_n(rng);
        const int d = pick_d(rng);
        MatrixXd sum = MatrixXd::Zero(d, d);
        MatrixXd inv_mean = MatrixXd::Zero(d, d);
        const MatrixXd eye = MatrixXd::Identity(d, d);
        for (int i = 0; i < n; ++i) {
            const MatrixXd h = random_spd(d, rng);
            sum += h;
            inv_mean += h.llt().solve(eye);
        }
        inv_mean /= n;
        const MatrixXd diff = inv_mean - MatrixXd(sum.llt().solve(eye));
        Eigen::SelfAdjointEigenSolver<MatrixXd> es(0.5 * (diff + diff.transpose()));
        const double min_eig = es.eigenvalues().minCoeff();
        if (min_eig < stats.min_eigenvalue) {
            stats.min_eigenvalue = min_eig;
            stats.worst_instance = inst;
            stats.worst_n = n;
            stats.worst_d = d;
        }
    }
    stats.pass = stats.min_eigenvalue >= -tolerance;
    return stats;
}

/// Randomized check that the descent rate of the hessian-inverse-sum flow is
/// at least that of the Newton flow at every point:
///   g^T ((1/N) sum_i H^i(x)^{-1}) g >= g^T (sum_i H^i(x))^{-1} g
/// over random quadratic ensembles and random evaluation points.
struct RateDominanceStats {
    int pairs = 0;
    double min_margin = 0.0;  // most negative lhs - rhs seen
    int worst_pair = -1;
    double tolerance = 0.0;
    bool pass = false;
};

inline RateDominanceStats rate_dominance_suite(int pairs, uint64_t seed, double tolerance = 1e-9) {
    std::mt19937_64 rng = make_rng(seed, /*stream=*/2);
    std::uniform_int_distribution<int> pick_n(2, 8);
    std::uniform_int_distribution<int> pick_d(1, 6);

    RateDominanceStats stats;
    stats.pairs = pairs;
    stats.tolerance = tolerance;
    stats.min_margin = std::numeric_limits<double>::infinity();

    for (int k = 0; k < pairs; ++k) {
        const int n = pick_n(rng);
        const int d = pick_d(rng);
        const CostEnsemble ens = random_quadratic_ensemble(n, d, rng);
        const VectorXd x = 3.0 * random_gaussian_vector(d, rng);

        const VectorXd g = ens.total_gradient(x);
        MatrixXd inv_mean = MatrixXd::Zero(d, d);
        const MatrixXd eye = MatrixXd::Identity(d, d);
        for (const auto& agent : ens.agents) inv_mean += agent.hessian(x).llt().solve(eye);
        inv_mean /= n;

        const double lhs = g.dot(inv_mean * g);
        const double rhs = g.dot(ens.total_hessian(x).llt().solve(g));
        const double margin = lhs - rhs;
        if (margin < stats.min_margin) {
            stats.min_margin = margin;
            stats.worst_pair = k;
        }
    }
    stats.pass = stats.min_margin >= -tolerance;
    return stats;
}

}  // namespace hiso
