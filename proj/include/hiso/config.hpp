#pragma once

#include "hiso/graph.hpp"

#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace hiso {

/// Configuration problems: unreadable files, malformed lines, unknown keys,
/// unresolvable graph or cost family. The CLI maps these to exit code 2.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace detail {

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

}  // namespace detail

/// Parses the flat `key = value` format with `[section]` headers. Comments
/// start with '#' or ';'. Returns keys qualified as "section.key".
inline std::map<std::string, std::string> parse_config_text(std::istream& in,
                                                            const std::string& origin) {
    std::map<std::string, std::string> out;
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find_first_of("#;");
        if (hash != std::string::npos) line.erase(hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError(origin + ":" + std::to_string(lineno) + ": unterminated section");
            section = detail::trim(line.substr(1, line.size() - 2));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(origin + ":" + std::to_string(lineno) + ": expected key = value");
        const std::string key = detail::trim(line.substr(0, eq));
        const std::string val = detail::trim(line.substr(eq + 1));
        if (key.empty())
            throw ConfigError(origin + ":" + std::to_string(lineno) + ": empty key");
        const std::string qual = section.empty() ? key : section + "." + key;
        if (!out.emplace(qual, val).second)
            throw ConfigError(origin + ":" + std::to_string(lineno) + ": duplicate key '" + qual +
                              "'");
    }
    return out;
}

inline std::map<std::string, std::string> parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    return parse_config_text(in, path);
}

/// Everything a turn-key experiment needs. Defaults reproduce the two
/// built-in studies; a config file overrides field by field.
struct ExperimentConfig {
    std::string name = "experiment";
    std::string kind;  // "quartic" or "logreg"
    uint64_t seed = 1;
    std::string out_dir;  // empty = no files written

    // graph (distributed runs)
    std::string graph_name = "fig1";
    int graph_nodes = 0;                            // used when graph_name empty
    std::vector<std::pair<int, int>> graph_edges;   // 1-based

    // quartic cost family
    int n_agents = 10;
    double coeff_low = 0.01;
    double coeff_high = 0.1;
    double x0 = 3.0;
    double box_radius = 10.0;
    double alt_gain = 5.0;  // explicit-gain GD variant

    // logistic cost family
    int features = 5;
    int samples_per_agent = 10;
    double lambda = 2.0;
    // Class-mean offset of the synthetic data. The default keeps the
    // benchmark in the regime where the consensus phase finishes well inside
    // the horizon while the problem stays ill-conditioned enough that the
    // second-order protocol outruns its gradient-descent degeneration.
    double separation = 1.35;

    // integration
    double step = 1e-3;
    double horizon = 50.0;
    double epsilon = 0.0;    // sgn boundary layer; 0 = exact sign
    double stop_gap = 1e-8;

    // stepsize grid (centralized runs)
    double grid_low = 1e-4;
    double grid_high = 10.0;
    int grid_points = 40;

    static ExperimentConfig quartic_defaults() {
        ExperimentConfig cfg;
        cfg.name = "quartic";
        cfg.kind = "quartic";
        cfg.seed = 1;
        cfg.horizon = 50.0;
        return cfg;
    }

    static ExperimentConfig logreg_defaults() {
        ExperimentConfig cfg;
        cfg.name = "logreg";
        cfg.kind = "logreg";
        cfg.seed = 7;
        cfg.horizon = 60.0;
        cfg.step = 1e-3;
        return cfg;
    }
};

namespace detail {

inline double to_double(const std::string& key, const std::string& val) {
    try {
        size_t pos = 0;
        const double d = std::stod(val, &pos);
        if (pos != val.size()) throw std::invalid_argument(val);
        return d;
    } catch (const std::exception&) {
        throw ConfigError("key '" + key + "': expected a number, got '" + val + "'");
    }
}

inline long to_long(const std::string& key, const std::string& val) {
    try {
        size_t pos = 0;
        const long v = std::stol(val, &pos);
        if (pos != val.size()) throw std::invalid_argument(val);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("key '" + key + "': expected an integer, got '" + val + "'");
    }
}

/// Edge list syntax: whitespace-separated `i-j` pairs of 1-based nodes.
inline std::vector<std::pair<int, int>> parse_edge_list(const std::string& text) {
    std::vector<std::pair<int, int>> edges;
    std::istringstream ss(text);
    std::string tok;
    while (ss >> tok) {
        const auto dash = tok.find('-');
        if (dash == std::string::npos || dash == 0 || dash + 1 >= tok.size())
            throw ConfigError("edge '" + tok + "': expected i-j");
        edges.emplace_back(to_long("edges", tok.substr(0, dash)),
                           to_long("edges", tok.substr(dash + 1)));
    }
    if (edges.empty()) throw ConfigError("edge list is empty");
    return edges;
}

}  // namespace detail

/// Builds a config from parsed key/values, starting from the defaults of the
/// declared kind. Unknown keys are rejected.
inline ExperimentConfig config_from_map(const std::map<std::string, std::string>& kv) {
    const auto kind_it = kv.find("experiment.kind");
    if (kind_it == kv.end())
        throw ConfigError("missing required key 'experiment.kind' (quartic or logreg)");

    ExperimentConfig cfg;
    if (kind_it->second == "quartic")
        cfg = ExperimentConfig::quartic_defaults();
    else if (kind_it->second == "logreg")
        cfg = ExperimentConfig::logreg_defaults();
    else
        throw ConfigError("experiment.kind must be 'quartic' or 'logreg', got '" +
                          kind_it->second + "'");

    for (const auto& [key, val] : kv) {
        if (key == "experiment.kind") continue;
        if (key == "experiment.name") cfg.name = val;
        else if (key == "experiment.seed") cfg.seed = static_cast<uint64_t>(detail::to_long(key, val));
        else if (key == "experiment.out") cfg.out_dir = val;
        else if (key == "graph.name") { cfg.graph_name = val; }
        else if (key == "graph.nodes") { cfg.graph_nodes = static_cast<int>(detail::to_long(key, val)); cfg.graph_name.clear(); }
        else if (key == "graph.edges") { cfg.graph_edges = detail::parse_edge_list(val); cfg.graph_name.clear(); }
        else if (key == "cost.agents") cfg.n_agents = static_cast<int>(detail::to_long(key, val));
        else if (key == "cost.coeff_low") cfg.coeff_low = detail::to_double(key, val);
        else if (key == "cost.coeff_high") cfg.coeff_high = detail::to_double(key, val);
        else if (key == "cost.x0") cfg.x0 = detail::to_double(key, val);
        else if (key == "cost.box_radius") cfg.box_radius = detail::to_double(key, val);
        else if (key == "cost.alt_gain") cfg.alt_gain = detail::to_double(key, val);
        else if (key == "cost.features") cfg.features = static_cast<int>(detail::to_long(key, val));
        else if (key == "cost.samples") cfg.samples_per_agent = static_cast<int>(detail::to_long(key, val));
        else if (key == "cost.lambda") cfg.lambda = detail::to_double(key, val);
        else if (key == "cost.separation") cfg.separation = detail::to_double(key, val);
        else if (key == "solver.step") cfg.step = detail::to_double(key, val);
        else if (key == "solver.horizon") cfg.horizon = detail::to_double(key, val);
        else if (key == "solver.epsilon") cfg.epsilon = detail::to_double(key, val);
        else if (key == "solver.stop_gap") cfg.stop_gap = detail::to_double(key, val);
        else if (key == "solver.grid_low") cfg.grid_low = detail::to_double(key, val);
        else if (key == "solver.grid_high") cfg.grid_high = detail::to_double(key, val);
        else if (key == "solver.grid_points") cfg.grid_points = static_cast<int>(detail::to_long(key, val));
        else throw ConfigError("unknown config key '" + key + "'");
    }

    if (cfg.horizon <= 0.0) throw ConfigError("solver.horizon must be positive");
    if (cfg.step <= 0.0) throw ConfigError("solver.step must be positive");
    return cfg;
}

inline ExperimentConfig config_from_file(const std::string& path) {
    return config_from_map(parse_config_file(path));
}

/// Resolves the configured graph: a built-in name or an explicit edge list.
inline Graph resolve_graph(const ExperimentConfig& cfg) {
    if (!cfg.graph_name.empty()) {
        if (cfg.graph_name == "fig1") return fig1_graph();
        throw ConfigError("unknown graph name '" + cfg.graph_name + "' (built-ins: fig1)");
    }
    if (cfg.graph_nodes <= 0 || cfg.graph_edges.empty())
        throw ConfigError("graph.nodes and graph.edges are required when no graph.name is given");
    try {
        return build_graph(cfg.graph_nodes, cfg.graph_edges);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("bad graph: ") + e.what());
    }
}

}  // namespace hiso
