#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <vector>

#include "mirrorgame/ensemble.hpp"

using namespace mg;

TEST_CASE("complete graph on 4 nodes") {
    const Topology t = make_topology(TopologyKind::complete, 4);
    for (int i = 0; i < 4; ++i) {
        CHECK(t.degree(i) == 3);
        CHECK_FALSE(t.adjacency(i, i));
        for (int j = 0; j < 4; ++j)
            if (i != j) CHECK(t.adjacency(i, j));
    }
}

TEST_CASE("star graph with explicit center") {
    const Topology t = make_topology(TopologyKind::star, 4, 2);
    CHECK(t.degree(2) == 3);
    for (int i : {0, 1, 3}) {
        CHECK(t.degree(i) == 1);
        CHECK(t.neighbors[i] == std::vector<int>{2});
    }
}

TEST_CASE("two-node path, ring and complete graphs coincide") {
    const Topology p = make_topology(TopologyKind::path, 2);
    const Topology r = make_topology(TopologyKind::ring, 2);
    const Topology c = make_topology(TopologyKind::complete, 2);
    CHECK(p.adjacency == r.adjacency);
    CHECK(p.adjacency == c.adjacency);
}

TEST_CASE("ring closes the path") {
    const Topology p = make_topology(TopologyKind::path, 5);
    const Topology r = make_topology(TopologyKind::ring, 5);
    CHECK(p.degree(0) == 1);
    CHECK(p.degree(4) == 1);
    CHECK(p.degree(2) == 2);
    CHECK(r.degree(0) == 2);
    CHECK(r.adjacency(0, 4));
}

TEST_CASE("invalid topologies are rejected") {
    CHECK_THROWS(make_topology(TopologyKind::complete, 1));
    CHECK_THROWS(make_topology(TopologyKind::star, 4, 7));
    CHECK_THROWS(topology_from_edges(3, {{0, 1}}));      // node 2 isolated
    CHECK_THROWS(topology_from_edges(3, {{0, 0}}));      // self loop
    CHECK_THROWS(topology_from_edges(3, {{0, 5}}));      // out of range
}

TEST_CASE("edge-list construction matches the generator") {
    const Topology a = topology_from_edges(4, {{0, 1}, {1, 2}, {2, 3}, {3, 0}});
    const Topology b = make_topology(TopologyKind::ring, 4);
    CHECK(a.adjacency == b.adjacency);
}

namespace {

GroupState group_at(const std::vector<double>& xs, const std::vector<double>& vs) {
    GroupState g;
    for (size_t i = 0; i < xs.size(); ++i) g.states.push_back({xs[i], vs[i]});
    return g;
}

}  // namespace

TEST_CASE("neighbor mean of identical agents returns their state") {
    const Topology t = make_topology(TopologyKind::complete, 4);
    const GroupState g = group_at({0.3, 0.3, 0.3, 0.3}, {-0.1, -0.1, -0.1, -0.1});
    const NeighborMean m = neighbor_mean(g, t, 1);
    CHECK(m.r_p == doctest::Approx(0.3).epsilon(1e-15));
    CHECK(m.rdot_p == doctest::Approx(-0.1).epsilon(1e-15));
}

TEST_CASE("neighbor mean on K4 is the arithmetic mean of the other three") {
    const Topology t = make_topology(TopologyKind::complete, 4);
    const GroupState g = group_at({0.1, 0.2, 0.6, 9.0}, {0, 0, 0, 5});
    const NeighborMean m = neighbor_mean(g, t, 3);
    CHECK(m.r_p == doctest::Approx(0.3).epsilon(1e-12));
    CHECK(m.rdot_p == 0.0);
}

TEST_CASE("star leaf sees exactly the center") {
    const Topology t = make_topology(TopologyKind::star, 4, 2);
    const GroupState g = group_at({1, 2, 3, 4}, {10, 20, 30, 40});
    const NeighborMean m = neighbor_mean(g, t, 0);
    CHECK(m.r_p == 3.0);
    CHECK(m.rdot_p == 30.0);
}

TEST_CASE("neighbor mean is permutation-equivariant") {
    // Relabel ring(4) nodes by the permutation p and check the means permute.
    const Topology t = make_topology(TopologyKind::ring, 4);
    const GroupState g = group_at({0.4, -0.2, 0.9, 0.05}, {1.0, -0.5, 0.25, 2.0});
    const std::vector<int> perm{2, 0, 3, 1};  // new index of each old node

    Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> adj(4, 4);
    adj.setConstant(false);
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j)
            if (t.adjacency(i, j)) adj(perm[i], perm[j]) = true;
    const Topology tp = topology_from_adjacency(adj);

    GroupState gp;
    gp.states.resize(4);
    for (int i = 0; i < 4; ++i) gp.states[perm[i]] = g.states[i];

    for (int i = 0; i < 4; ++i) {
        const NeighborMean a = neighbor_mean(g, t, i);
        const NeighborMean b = neighbor_mean(gp, tp, perm[i]);
        CHECK(a.r_p == doctest::Approx(b.r_p).epsilon(1e-15));
        CHECK(a.rdot_p == doctest::Approx(b.rdot_p).epsilon(1e-15));
    }
}

TEST_CASE("complete graph conserves the weighted neighbor-mean sum") {
    const int n = 5;
    const Topology t = make_topology(TopologyKind::complete, n);
    const GroupState g = group_at({0.4, -0.2, 0.9, 0.05, -0.7}, {0, 0, 0, 0, 0});
    double weighted = 0, total = 0;
    for (int k = 0; k < n; ++k) {
        weighted += t.degree(k) * neighbor_mean(g, t, k).r_p;
        total += g.states[k].x;
    }
    CHECK(weighted == doctest::Approx((n - 1) * total).epsilon(1e-12));
}
