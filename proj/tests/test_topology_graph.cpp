#include "tofa/topology_graph.hpp"

#include "tofa/rng.hpp"

#include <doctest.h>

#include <vector>

using namespace tofa;

TEST_CASE("zero outage reduces to scaled hop distances exactly") {
  const TorusTopology topo = build_torus({3, 3, 3});
  const Vector none = Vector::Zero(topo.node_count());
  for (const double c : {1.0, 2.5}) {
    const TopologyGraph g = fault_weight_matrix(topo, none, c);
    const TopologyGraph plain = hop_topology_graph(topo, c);
    for (NodeId u = 0; u < topo.node_count(); ++u) {
      for (NodeId v = 0; v < topo.node_count(); ++v) {
        CHECK(g.weight(u, v) == c * topo.hop_distance(u, v));
        CHECK(g.weight(u, v) == plain.weight(u, v));
      }
    }
  }
}

TEST_CASE("single-link penalties") {
  SUBCASE("one faulty endpoint costs 101c") {
    const TorusTopology topo = build_torus({2, 1, 1});
    Vector p = Vector::Zero(2);

    CHECK(fault_weight_matrix(topo, p, 1.0).weight(0, 1) == 1.0);

    p[1] = 0.02;
    CHECK(fault_weight_matrix(topo, p, 1.0).weight(0, 1) == 101.0);
  }

  SUBCASE("3-link route with one touched link costs 103") {
    const TorusTopology topo = build_torus({8, 1, 1});
    Vector p = Vector::Zero(8);
    p[3] = 0.5;
    // route 0 -> 3 passes links (0,1), (1,2), (2,3); only the last touches 3
    CHECK(fault_weight_matrix(topo, p, 1.0).weight(0, 3) == 103.0);
  }
}

TEST_CASE("fault weights are symmetric and dominate hop costs") {
  const TorusTopology topo = build_torus({3, 3, 3});
  auto rng = seeded_rng(17);
  Vector p = Vector::Zero(topo.node_count());
  for (int i = 0; i < p.size(); ++i) {
    p[i] = uniform01(rng) < 0.25 ? 0.1 * uniform01(rng) : 0.0;
  }

  const double c = 1.0;
  const TopologyGraph g = fault_weight_matrix(topo, p, c);
  for (NodeId u = 0; u < topo.node_count(); ++u) {
    CHECK(g.weight(u, u) == 0.0);
    for (NodeId v = 0; v < topo.node_count(); ++v) {
      CHECK(g.weight(u, v) == g.weight(v, u));
      CHECK(g.weight(u, v) >= c * topo.hop_distance(u, v));
    }
  }
}

TEST_CASE("one faulty node raises each pair by 100c per touched route link") {
  const TorusTopology topo = build_torus({3, 3, 3});
  const int n = topo.node_count();
  const Vector none = Vector::Zero(n);
  const TopologyGraph base = fault_weight_matrix(topo, none, 1.0);

  for (NodeId faulty = 0; faulty < n; ++faulty) {
    Vector p = Vector::Zero(n);
    p[faulty] = 0.3;
    const TopologyGraph g = fault_weight_matrix(topo, p, 1.0);
    for (NodeId u = 0; u < n; ++u) {
      for (NodeId v = u + 1; v < n; ++v) {
        int touched = 0;
        for (const Link& l : topo.route(u, v)) {
          if (l.source == faulty || l.target == faulty) ++touched;
        }
        CHECK(g.weight(u, v) - base.weight(u, v) == 100.0 * touched);
      }
    }
  }
}

TEST_CASE("fault weight input validation") {
  const TorusTopology topo = build_torus({2, 2, 1});
  Vector p = Vector::Zero(4);
  CHECK_THROWS_AS(fault_weight_matrix(topo, p, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(fault_weight_matrix(topo, p, -1.0), std::invalid_argument);
  p[0] = -0.1;
  CHECK_THROWS_AS(fault_weight_matrix(topo, p, 1.0), std::invalid_argument);
  p[0] = 1.5;
  CHECK_THROWS_AS(fault_weight_matrix(topo, p, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(fault_weight_matrix(topo, Vector::Zero(3), 1.0), std::invalid_argument);
}

TEST_CASE("extract_subtopology") {
  const TorusTopology topo = build_torus({2, 2, 2});
  const TopologyGraph g = hop_topology_graph(topo);

  SUBCASE("keeping everything is the identity") {
    const TopologyGraph sub = extract_subtopology(g, g.nodes);
    CHECK(sub.weight == g.weight);
    CHECK(sub.nodes == g.nodes);
  }

  SUBCASE("restriction preserves pairwise weights") {
    const std::vector<NodeId> keep{0, 1, 2, 3};
    const TopologyGraph sub = extract_subtopology(g, keep);
    REQUIRE(sub.size() == 4);
    for (int i = 0; i < 4; ++i) {
      for (int j = 0; j < 4; ++j) {
        CHECK(sub.weight(i, j) == g.weight(keep[static_cast<std::size_t>(i)],
                                           keep[static_cast<std::size_t>(j)]));
      }
    }
    CHECK(sub.nodes == keep);
  }

  SUBCASE("singleton is a 1x1 zero matrix") {
    const std::vector<NodeId> keep{0};
    const TopologyGraph sub = extract_subtopology(g, keep);
    CHECK(sub.size() == 1);
    CHECK(sub.weight(0, 0) == 0.0);
  }

  SUBCASE("penalties picked up on excluded nodes persist") {
    const TorusTopology line = build_torus({4, 1, 1});
    Vector p = Vector::Zero(4);
    p[1] = 0.2;
    const TopologyGraph h = fault_weight_matrix(line, p, 1.0);
    const std::vector<NodeId> keep{0, 2};
    const TopologyGraph sub = extract_subtopology(h, keep);
    // route 0 -> 2 passes node 1 on both links
    CHECK(sub.weight(0, 1) == 202.0);
  }

  SUBCASE("errors") {
    CHECK_THROWS_AS(extract_subtopology(g, std::vector<NodeId>{}), std::invalid_argument);
    CHECK_THROWS_AS(extract_subtopology(g, std::vector<NodeId>{0, 99}), std::out_of_range);
    CHECK_THROWS_AS(extract_subtopology(g, std::vector<NodeId>{0, 0}), std::invalid_argument);
  }
}
