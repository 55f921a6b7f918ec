#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "mirrorgame/dynamics.hpp"

namespace mg {

enum class TopologyKind { complete, ring, path, star, custom };

TopologyKind topology_kind_from_string(const std::string& s);
std::string to_string(TopologyKind k);

// Undirected interaction graph: zero diagonal, symmetric, every node has a
// neighbor.
struct Topology {
    int n{0};
    Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> adjacency;
    std::vector<std::vector<int>> neighbors;  // cached per-node neighbor lists

    int degree(int k) const { return static_cast<int>(neighbors[k].size()); }
};

Topology topology_from_adjacency(Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> adj);
Topology make_topology(TopologyKind kind, int n, int center = 0);
// Edges as 0-based index pairs.
Topology topology_from_edges(int n, const std::vector<std::pair<int, int>>& edges);

struct GroupState {
    std::vector<OscillatorState> states;
    double t{0};
};

struct NeighborMean {
    double r_p{0};     // mean neighbor position
    double rdot_p{0};  // mean neighbor velocity
};

NeighborMean neighbor_mean(const GroupState& g, const Topology& topo, int k);

}  // namespace mg
