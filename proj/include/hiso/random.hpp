#pragma once

#include "hiso/cost.hpp"
#include "hiso/graph.hpp"

#include <Eigen/Dense>

#include <random>
#include <utility>
#include <vector>

namespace hiso {

/// Seeds a generator for a named stream so that independent draws (data,
/// initial conditions, ...) derived from one experiment seed do not overlap.
inline std::mt19937_64 make_rng(uint64_t seed, uint64_t stream = 0) {
    std::seed_seq seq{seed, stream};
    return std::mt19937_64(seq);
}

inline MatrixXd random_gaussian_matrix(int rows, int cols, std::mt19937_64& rng) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    MatrixXd m(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) m(i, j) = gauss(rng);
    return m;
}

inline VectorXd random_gaussian_vector(int dim, std::mt19937_64& rng) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    VectorXd v(dim);
    for (int i = 0; i < dim; ++i) v(i) = gauss(rng);
    return v;
}

/// Random orthogonal matrix via QR of a Gaussian matrix.
inline MatrixXd random_orthogonal(int dim, std::mt19937_64& rng) {
    const MatrixXd a = random_gaussian_matrix(dim, dim, rng);
    Eigen::HouseholderQR<MatrixXd> qr(a);
    return qr.householderQ() * MatrixXd::Identity(dim, dim);
}

/// Random SPD matrix Q diag(lambda) Q^T with eigenvalues uniform in [lo, hi].
inline MatrixXd random_spd(int dim, std::mt19937_64& rng, double lo = 0.1, double hi = 10.0) {
    std::uniform_real_distribution<double> unif(lo, hi);
    const MatrixXd q = random_orthogonal(dim, rng);
    VectorXd lambda(dim);
    for (int i = 0; i < dim; ++i) lambda(i) = unif(rng);
    MatrixXd m = q * lambda.asDiagonal() * q.transpose();
    return 0.5 * (m + m.transpose());  // resymmetrize against roundoff
}

/// Random connected graph: a random spanning tree plus independent extra
/// edges with probability extra_edge_prob.
inline Graph random_connected_graph(int n_nodes, std::mt19937_64& rng,
                                    double extra_edge_prob = 0.3) {
    std::vector<std::pair<int, int>> edges;  // 1-based
    std::uniform_real_distribution<double> unif(0.0, 1.0);

    std::vector<int> order(n_nodes);
    for (int i = 0; i < n_nodes; ++i) order[i] = i + 1;
    std::shuffle(order.begin(), order.end(), rng);

    std::set<std::pair<int, int>> tree;
    for (int k = 1; k < n_nodes; ++k) {
        std::uniform_int_distribution<int> pick(0, k - 1);
        const int parent = order[pick(rng)];
        tree.insert(std::minmax(parent, order[k]));
    }
    edges.assign(tree.begin(), tree.end());
    for (int i = 1; i <= n_nodes; ++i)
        for (int j = i + 1; j <= n_nodes; ++j)
            if (!tree.count({i, j}) && unif(rng) < extra_edge_prob) edges.emplace_back(i, j);

    return build_graph(n_nodes, edges);
}

/// Ensemble of quadratics with random SPD Hessians (eigenvalues in [0.1, 10])
/// and Gaussian centers.
inline CostEnsemble random_quadratic_ensemble(int n_agents, int dim, std::mt19937_64& rng) {
    std::vector<AgentCost> agents;
    agents.reserve(n_agents);
    for (int i = 0; i < n_agents; ++i)
        agents.push_back(quadratic_cost(random_spd(dim, rng), random_gaussian_vector(dim, rng)));
    return make_ensemble(std::move(agents));
}

}  // namespace hiso
