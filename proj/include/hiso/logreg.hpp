#pragma once

#include "hiso/cost.hpp"

#include <Eigen/Dense>

#include <charconv>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace hiso {

/// Binary-classification dataset split across agents. Features of class +1
/// are drawn around +separation * 1, class -1 around -separation * 1, unit
/// covariance. The decision variable is (w, b) with dimension p + 1.
struct LogRegData {
    struct AgentSamples {
        MatrixXd features;      // s_i x p
        Eigen::VectorXi labels; // entries in {-1, +1}
    };
    std::vector<AgentSamples> agents;
    int p = 0;
    double lambda = 0.0;

    int n_agents() const { return static_cast<int>(agents.size()); }
    int samples(int i) const { return static_cast<int>(agents.at(i).labels.size()); }
};

/// Deterministic per seed. Labels alternate +1/-1 within each agent, so the
/// per-agent class counts are balanced up to parity of samples_per_agent.
inline LogRegData generate_logreg_data(uint64_t seed, int n_agents, int p, int samples_per_agent,
                                       double separation, double lambda) {
    if (p < 1 || samples_per_agent < 1 || n_agents < 1)
        throw std::invalid_argument("generate_logreg_data: n_agents, p, samples_per_agent must be >= 1");

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);

    LogRegData data;
    data.p = p;
    data.lambda = lambda;
    data.agents.resize(n_agents);
    for (auto& agent : data.agents) {
        agent.features.resize(samples_per_agent, p);
        agent.labels.resize(samples_per_agent);
        for (int j = 0; j < samples_per_agent; ++j) {
            const int y = (j % 2 == 0) ? +1 : -1;
            agent.labels(j) = y;
            for (int k = 0; k < p; ++k)
                agent.features(j, k) = y * separation + gauss(rng);
        }
    }
    return data;
}

namespace detail {

inline double sigmoid(double u) {
    if (u >= 0.0) return 1.0 / (1.0 + std::exp(-u));
    const double e = std::exp(u);
    return e / (1.0 + e);
}

/// log(1 + exp(-u)) without overflow for large |u|.
inline double softplus_neg(double u) {
    if (u > 0.0) return std::log1p(std::exp(-u));
    return -u + std::log1p(std::exp(u));
}

}  // namespace detail

/// Regularized logistic loss of agent i over its local samples:
/// sum_j log(1 + exp(-(w^T c_ij + b) y_ij)) + (lambda / 2N) ||w||^2.
///
/// The regularizer acts on w only; the declared m_lower = lambda / N is
/// therefore valid on the w-block but the bias direction has no uniform
/// lower curvature bound.
inline AgentCost logistic_cost(const LogRegData& data, int agent, int n_agents) {
    const auto& samples = data.agents.at(agent);
    if (samples.labels.size() == 0)
        throw std::invalid_argument("logistic_cost: agent " + std::to_string(agent) + " has no samples");
    const int p = data.p;
    const int d = p + 1;
    const double reg = data.lambda / n_agents;

    const MatrixXd feats = samples.features;
    const Eigen::VectorXi labels = samples.labels;

    AgentCost c;
    c.dim = d;
    c.m_lower = reg;
    double curb = 0.0;
    for (int j = 0; j < labels.size(); ++j)
        curb += 0.25 * (feats.row(j).squaredNorm() + 1.0);
    c.m_upper = reg + curb;

    c.value = [feats, labels, p, reg](const VectorXd& x) {
        const auto w = x.head(p);
        const double b = x(p);
        double f = 0.0;
        for (int j = 0; j < labels.size(); ++j) {
            const double u = labels(j) * (feats.row(j).dot(w) + b);
            f += detail::softplus_neg(u);
        }
        return f + 0.5 * reg * w.squaredNorm();
    };
    c.gradient = [feats, labels, p, reg](const VectorXd& x) {
        const auto w = x.head(p);
        const double b = x(p);
        VectorXd g = VectorXd::Zero(p + 1);
        for (int j = 0; j < labels.size(); ++j) {
            const double y = labels(j);
            const double u = y * (feats.row(j).dot(w) + b);
            const double s = detail::sigmoid(u) - 1.0;  // d/du log(1+e^-u)
            g.head(p) += s * y * feats.row(j).transpose();
            g(p) += s * y;
        }
        g.head(p) += reg * w;
        return g;
    };
    c.hessian = [feats, labels, p, reg](const VectorXd& x) {
        const auto w = x.head(p);
        const double b = x(p);
        MatrixXd h = MatrixXd::Zero(p + 1, p + 1);
        VectorXd ct(p + 1);
        for (int j = 0; j < labels.size(); ++j) {
            const double u = labels(j) * (feats.row(j).dot(w) + b);
            const double s = detail::sigmoid(u);
            ct.head(p) = feats.row(j).transpose();
            ct(p) = 1.0;
            h.noalias() += (s * (1.0 - s)) * ct * ct.transpose();
        }
        h.topLeftCorner(p, p) += reg * MatrixXd::Identity(p, p);
        return h;
    };
    return c;
}

/// All agents of a dataset as one ensemble over (w, b).
inline CostEnsemble logistic_ensemble(const LogRegData& data) {
    std::vector<AgentCost> agents;
    agents.reserve(data.n_agents());
    for (int i = 0; i < data.n_agents(); ++i)
        agents.push_back(logistic_cost(data, i, data.n_agents()));
    return make_ensemble(std::move(agents));
}

/// CSV serialization, columns: agent,label,f1..fp (agent ids 1-based).
inline void write_logreg_csv(const LogRegData& data, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_logreg_csv: cannot open " + path);
    out << "agent,label";
    for (int k = 1; k <= data.p; ++k) out << ",f" << k;
    out << "\n";
    char buf[64];
    for (int i = 0; i < data.n_agents(); ++i) {
        const auto& agent = data.agents[i];
        for (int j = 0; j < agent.labels.size(); ++j) {
            out << (i + 1) << "," << agent.labels(j);
            for (int k = 0; k < data.p; ++k) {
                auto res = std::to_chars(buf, buf + sizeof(buf), agent.features(j, k));
                out << "," << std::string_view(buf, res.ptr - buf);
            }
            out << "\n";
        }
    }
    if (!out) throw std::runtime_error("write_logreg_csv: write failed for " + path);
}

inline LogRegData read_logreg_csv(const std::string& path, double lambda) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("read_logreg_csv: cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("read_logreg_csv: empty file " + path);

    int p = -1;  // from header
    {
        std::stringstream ss(line);
        std::string col;
        int ncols = 0;
        while (std::getline(ss, col, ',')) ++ncols;
        p = ncols - 2;
        if (p < 1) throw std::runtime_error("read_logreg_csv: bad header in " + path);
    }

    const auto parse_num = [&path](const std::string& tok) {
        double v = 0.0;
        const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
        if (res.ec != std::errc{} || res.ptr != tok.data() + tok.size())
            throw std::runtime_error("read_logreg_csv: bad number '" + tok + "' in " + path);
        return v;
    };

    std::vector<std::vector<std::pair<VectorXd, int>>> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string tok;
        std::getline(ss, tok, ',');
        const int agent = static_cast<int>(parse_num(tok)) - 1;
        std::getline(ss, tok, ',');
        const int label = static_cast<int>(parse_num(tok));
        VectorXd f(p);
        for (int k = 0; k < p; ++k) {
            if (!std::getline(ss, tok, ','))
                throw std::runtime_error("read_logreg_csv: short row in " + path);
            f(k) = parse_num(tok);
        }
        if (agent < 0) throw std::runtime_error("read_logreg_csv: bad agent id in " + path);
        if (agent >= static_cast<int>(rows.size())) rows.resize(agent + 1);
        rows[agent].emplace_back(std::move(f), label);
    }

    LogRegData data;
    data.p = p;
    data.lambda = lambda;
    data.agents.resize(rows.size());
    for (size_t i = 0; i < rows.size(); ++i) {
        auto& agent = data.agents[i];
        agent.features.resize(rows[i].size(), p);
        agent.labels.resize(rows[i].size());
        for (size_t j = 0; j < rows[i].size(); ++j) {
            agent.features.row(j) = rows[i][j].first.transpose();
            agent.labels(j) = rows[i][j].second;
        }
    }
    return data;
}

}  // namespace hiso
