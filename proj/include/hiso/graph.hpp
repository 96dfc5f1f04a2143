#pragma once

#include <Eigen/Dense>

#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace hiso {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Thrown by build_graph when the edge set does not connect all nodes.
/// Kept distinct from std::invalid_argument so callers can tell a malformed
/// edge list from a topology the solvers cannot run on.
class DisconnectedGraphError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Undirected simple graph with a fixed node set {0, ..., N-1}.
///
/// Construction validates the edge list and rejects disconnected graphs;
/// instances are immutable afterwards and safe to share across threads.
class Graph {
public:
    Graph(int n_nodes, std::vector<std::pair<int, int>> edges,
          MatrixXd adjacency, std::vector<std::vector<int>> neighbors)
        : n_nodes_(n_nodes),
          edges_(std::move(edges)),
          adjacency_(std::move(adjacency)),
          neighbors_(std::move(neighbors)) {}

    int n_nodes() const { return n_nodes_; }
    int n_edges() const { return static_cast<int>(edges_.size()); }

    /// Edges as 0-based (lower, higher) pairs, sorted lexicographically.
    const std::vector<std::pair<int, int>>& edges() const { return edges_; }

    /// Symmetric 0/1 adjacency matrix with zero diagonal.
    const MatrixXd& adjacency() const { return adjacency_; }

    /// 0-based neighbor list of node i, ascending.
    const std::vector<int>& neighbors(int i) const { return neighbors_.at(i); }

    int degree(int i) const { return static_cast<int>(neighbors_.at(i).size()); }

    int max_degree() const {
        int d = 0;
        for (const auto& nb : neighbors_) d = std::max(d, static_cast<int>(nb.size()));
        return d;
    }

private:
    int n_nodes_;
    std::vector<std::pair<int, int>> edges_;
    MatrixXd adjacency_;
    std::vector<std::vector<int>> neighbors_;
};

/// Spectral and matrix objects of a connected graph used by the dynamics:
/// Laplacian L, signed incidence B (one column per edge, so L = B B^T),
/// mean-removing projection P = I - (1/N) 1 1^T, the ascending Laplacian
/// spectrum, and lambda_bar = 1/(2 lambda2) which bounds the consensus time.
struct GraphMatrices {
    MatrixXd laplacian;   // N x N
    MatrixXd incidence;   // N x M, column k has +1 at the lower edge endpoint
    MatrixXd projection;  // N x N, I - (1/N) 1 1^T
    VectorXd eigenvalues; // Laplacian spectrum, ascending, eigenvalues(0) ~ 0
    double lambda2 = 0.0;     // smallest nonzero Laplacian eigenvalue
    double lambda_n = 0.0;    // largest Laplacian eigenvalue
    double lambda_bar = 0.0;  // 1 / (2 lambda2)
};

/// Builds a graph from 1-based node indices as they appear in configs.
///
/// Rejects self-loops, duplicate edges (in either orientation) and
/// out-of-range indices with std::invalid_argument, and disconnected
/// graphs with DisconnectedGraphError.
inline Graph build_graph(int n_nodes, const std::vector<std::pair<int, int>>& edges_1based) {
    if (n_nodes < 1) throw std::invalid_argument("build_graph: n_nodes must be positive");

    std::set<std::pair<int, int>> seen;
    for (auto [i, j] : edges_1based) {
        if (i < 1 || i > n_nodes || j < 1 || j > n_nodes)
            throw std::invalid_argument("build_graph: edge (" + std::to_string(i) + "," +
                                        std::to_string(j) + ") out of range 1.." +
                                        std::to_string(n_nodes));
        if (i == j)
            throw std::invalid_argument("build_graph: self-loop at node " + std::to_string(i));
        auto key = std::minmax(i, j);
        if (!seen.insert(key).second)
            throw std::invalid_argument("build_graph: duplicate edge (" + std::to_string(key.first) +
                                        "," + std::to_string(key.second) + ")");
    }

    std::vector<std::pair<int, int>> edges(seen.begin(), seen.end());
    for (auto& e : edges) { --e.first; --e.second; }  // store 0-based

    MatrixXd adj = MatrixXd::Zero(n_nodes, n_nodes);
    std::vector<std::vector<int>> nbrs(n_nodes);
    for (auto [u, v] : edges) {
        adj(u, v) = adj(v, u) = 1.0;
        nbrs[u].push_back(v);
        nbrs[v].push_back(u);
    }
    for (auto& nb : nbrs) std::sort(nb.begin(), nb.end());

    // connectivity via depth-first sweep
    std::vector<char> visited(n_nodes, 0);
    std::vector<int> stack{0};
    visited[0] = 1;
    int count = 1;
    while (!stack.empty()) {
        int u = stack.back();
        stack.pop_back();
        for (int v : nbrs[u]) {
            if (!visited[v]) {
                visited[v] = 1;
                ++count;
                stack.push_back(v);
            }
        }
    }
    if (count != n_nodes)
        throw DisconnectedGraphError("build_graph: graph is disconnected (" +
                                     std::to_string(n_nodes - count) +
                                     " node(s) unreachable from node 1); the protocol requires a "
                                     "connected graph");

    return Graph(n_nodes, std::move(edges), std::move(adj), std::move(nbrs));
}

/// The 5-node benchmark graph used throughout the test problems.
inline Graph fig1_graph() {
    return build_graph(5, {{1, 2}, {1, 3}, {1, 4}, {1, 5}, {2, 3}, {3, 5}, {4, 5}});
}

/// Moore-Penrose inverse of a symmetric PSD matrix via eigendecomposition,
/// treating eigenvalues below 1e-10 * lambda_max as zero.
inline MatrixXd pseudo_inverse_spd(const MatrixXd& m) {
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(m);
    if (es.info() != Eigen::Success)
        throw std::runtime_error("pseudo_inverse_spd: eigendecomposition failed");
    const VectorXd& ev = es.eigenvalues();
    const double cutoff = 1e-10 * std::max(ev.cwiseAbs().maxCoeff(), 1e-300);
    VectorXd inv = VectorXd::Zero(ev.size());
    for (int k = 0; k < ev.size(); ++k)
        if (ev(k) > cutoff) inv(k) = 1.0 / ev(k);
    return es.eigenvectors() * inv.asDiagonal() * es.eigenvectors().transpose();
}

/// Computes Laplacian, incidence, projection and spectral constants.
inline GraphMatrices graph_matrices(const Graph& g) {
    const int n = g.n_nodes();
    const int m = g.n_edges();

    GraphMatrices out;
    VectorXd deg = g.adjacency().rowwise().sum();
    out.laplacian = MatrixXd(deg.asDiagonal()) - g.adjacency();

    out.incidence = MatrixXd::Zero(n, m);
    for (int k = 0; k < m; ++k) {
        auto [u, v] = g.edges()[k];
        out.incidence(u, k) = 1.0;   // lower index gets +1
        out.incidence(v, k) = -1.0;
    }

    out.projection = MatrixXd::Identity(n, n) - MatrixXd::Constant(n, n, 1.0 / n);

    Eigen::SelfAdjointEigenSolver<MatrixXd> es(out.laplacian);
    if (es.info() != Eigen::Success)
        throw std::runtime_error("graph_matrices: Laplacian eigendecomposition failed");
    out.eigenvalues = es.eigenvalues();  // ascending
    out.lambda2 = n > 1 ? out.eigenvalues(1) : 0.0;
    out.lambda_n = out.eigenvalues(n - 1);
    out.lambda_bar = 1.0 / (2.0 * out.lambda2);
    return out;
}

/// Kronecker product M (x) I_d: lifts an N x N network matrix to act on
/// stacked per-node states of dimension d.
inline MatrixXd kron_identity(const MatrixXd& m, int d) {
    if (d < 1) throw std::invalid_argument("kron_identity: d must be >= 1");
    MatrixXd out = MatrixXd::Zero(m.rows() * d, m.cols() * d);
    for (int i = 0; i < m.rows(); ++i)
        for (int j = 0; j < m.cols(); ++j)
            for (int k = 0; k < d; ++k)
                out(i * d + k, j * d + k) = m(i, j);
    return out;
}

}  // namespace hiso
