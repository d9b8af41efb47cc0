#pragma once

#include "tofa/torus.hpp"
#include "tofa/types.hpp"

#include <span>
#include <vector>

namespace tofa {

// All-pairs path-cost view of the platform (graph H). weight(i, j) is the
// cost of routing between nodes[i] and nodes[j]; for the unfaulted torus it
// is hop_cost * hop_distance. Subtopologies keep the original pairwise
// weights, so penalties picked up on routes through excluded nodes persist.
struct TopologyGraph {
  TorusDims dims;
  double hop_cost = 1.0;
  std::vector<NodeId> nodes;  // local index -> original node id, ascending
  Matrix weight;              // symmetric, zero diagonal

  int size() const { return static_cast<int>(nodes.size()); }
};

/// Plain hop-count weights: weight(u, v) = c * hop_distance(u, v).
TopologyGraph hop_topology_graph(const TorusTopology& topo, double c = 1.0);

// Fault-penalized weights. For each unordered pair the cost sums, over the
// links of the lower-id to higher-id route, c plus a 100c penalty whenever
// either link endpoint has a nonzero outage probability; the matrix is
// mirrored so it stays symmetric.
TopologyGraph fault_weight_matrix(const TorusTopology& topo, const Vector& outage,
                                  double c = 1.0);

/// Restriction of `g` to the original node ids in `keep` (sorted ascending).
TopologyGraph extract_subtopology(const TopologyGraph& g, std::span<const NodeId> keep);

}  // namespace tofa
