#include "mirrorgame/ensemble.hpp"

namespace mg {

TopologyKind topology_kind_from_string(const std::string& s) {
    if (s == "complete") return TopologyKind::complete;
    if (s == "ring") return TopologyKind::ring;
    if (s == "path") return TopologyKind::path;
    if (s == "star") return TopologyKind::star;
    if (s == "custom") return TopologyKind::custom;
    throw std::invalid_argument("unknown topology kind: " + s);
}

std::string to_string(TopologyKind k) {
    switch (k) {
        case TopologyKind::complete: return "complete";
        case TopologyKind::ring: return "ring";
        case TopologyKind::path: return "path";
        case TopologyKind::star: return "star";
        case TopologyKind::custom: return "custom";
    }
    throw std::logic_error("unreachable");
}

Topology topology_from_adjacency(Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> adj) {
    const int n = static_cast<int>(adj.rows());
    if (n < 2) throw std::invalid_argument("topology needs at least 2 nodes");
    if (adj.cols() != n) throw std::invalid_argument("adjacency must be square");
    Topology t;
    t.n = n;
    t.adjacency = std::move(adj);
    t.neighbors.resize(n);
    for (int i = 0; i < n; ++i) {
        if (t.adjacency(i, i)) throw std::invalid_argument("self-loop at node " + std::to_string(i));
        for (int j = 0; j < n; ++j) {
            if (t.adjacency(i, j) != t.adjacency(j, i))
                throw std::invalid_argument("adjacency must be symmetric");
            if (t.adjacency(i, j)) t.neighbors[i].push_back(j);
        }
        if (t.neighbors[i].empty())
            throw std::invalid_argument("isolated node " + std::to_string(i));
    }
    return t;
}

Topology make_topology(TopologyKind kind, int n, int center) {
    if (n < 2) throw std::invalid_argument("topology needs at least 2 nodes");
    Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> adj(n, n);
    adj.setConstant(false);
    const auto link = [&](int a, int b) {
        adj(a, b) = true;
        adj(b, a) = true;
    };
    switch (kind) {
        case TopologyKind::complete:
            for (int i = 0; i < n; ++i)
                for (int j = i + 1; j < n; ++j) link(i, j);
            break;
        case TopologyKind::path:
            for (int i = 0; i + 1 < n; ++i) link(i, i + 1);
            break;
        case TopologyKind::ring:
            for (int i = 0; i + 1 < n; ++i) link(i, i + 1);
            link(n - 1, 0);
            break;
        case TopologyKind::star:
            if (center < 0 || center >= n) throw std::invalid_argument("star center out of range");
            for (int i = 0; i < n; ++i)
                if (i != center) link(center, i);
            break;
        case TopologyKind::custom:
            throw std::invalid_argument("custom topology requires an edge list");
    }
    return topology_from_adjacency(std::move(adj));
}

Topology topology_from_edges(int n, const std::vector<std::pair<int, int>>& edges) {
    if (n < 2) throw std::invalid_argument("topology needs at least 2 nodes");
    Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> adj(n, n);
    adj.setConstant(false);
    for (const auto& [a, b] : edges) {
        if (a < 0 || a >= n || b < 0 || b >= n)
            throw std::invalid_argument("edge endpoint out of range");
        if (a == b) throw std::invalid_argument("self-loop edge rejected");
        adj(a, b) = true;
        adj(b, a) = true;
    }
    return topology_from_adjacency(std::move(adj));
}

NeighborMean neighbor_mean(const GroupState& g, const Topology& topo, int k) {
    if (k < 0 || k >= topo.n) throw std::out_of_range("agent index out of range");
    if (static_cast<int>(g.states.size()) != topo.n)
        throw std::invalid_argument("group size does not match topology");
    const auto& nb = topo.neighbors[k];
    NeighborMean m;
    for (int j : nb) {
        m.r_p += g.states[j].x;
        m.rdot_p += g.states[j].v;
    }
    const double M = static_cast<double>(nb.size());
    m.r_p /= M;
    m.rdot_p /= M;
    return m;
}

}  // namespace mg
