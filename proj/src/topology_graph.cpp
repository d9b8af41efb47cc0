#include "tofa/topology_graph.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <unordered_map>

namespace tofa {

namespace {

std::vector<NodeId> identity_nodes(int n) {
  std::vector<NodeId> ids(static_cast<std::size_t>(n));
  std::iota(ids.begin(), ids.end(), 0);
  return ids;
}

}  // namespace

TopologyGraph hop_topology_graph(const TorusTopology& topo, double c) {
  if (c <= 0.0) throw std::invalid_argument("hop cost c must be positive");
  const int n = topo.node_count();
  TopologyGraph g{topo.dims(), c, identity_nodes(n), Matrix::Zero(n, n)};
  for (int u = 0; u < n; ++u) {
    for (int v = u + 1; v < n; ++v) {
      const double w = c * topo.hop_distance(u, v);
      g.weight(u, v) = w;
      g.weight(v, u) = w;
    }
  }
  return g;
}

TopologyGraph fault_weight_matrix(const TorusTopology& topo, const Vector& outage,
                                  double c) {
  if (c <= 0.0) throw std::invalid_argument("hop cost c must be positive");
  const int n = topo.node_count();
  if (outage.size() != n) {
    throw std::invalid_argument("outage vector size does not match node count");
  }
  for (int i = 0; i < n; ++i) {
    if (outage[i] < 0.0 || outage[i] > 1.0) {
      throw std::invalid_argument("outage probabilities must lie in [0, 1]");
    }
  }

  TopologyGraph g{topo.dims(), c, identity_nodes(n), Matrix::Zero(n, n)};
  for (int u = 0; u < n; ++u) {
    for (int v = u + 1; v < n; ++v) {
      const Route r = topo.route(u, v);
      int penalized = 0;
      for (const Link& l : r) {
        if (outage[l.source] > 0.0 || outage[l.target] > 0.0) ++penalized;
      }
      // c per link plus 100c per link with a failure-prone endpoint; the
      // count form keeps the zero-fault case bit-equal to c * hop_distance.
      const double w = c * (static_cast<double>(r.size()) + 100.0 * penalized);
      g.weight(u, v) = w;
      g.weight(v, u) = w;
    }
  }
  return g;
}

TopologyGraph extract_subtopology(const TopologyGraph& g, std::span<const NodeId> keep) {
  if (keep.empty()) throw std::invalid_argument("subtopology node set is empty");

  std::unordered_map<NodeId, int> local_of;
  local_of.reserve(g.nodes.size());
  for (int i = 0; i < g.size(); ++i) local_of.emplace(g.nodes[i], i);

  std::vector<NodeId> kept(keep.begin(), keep.end());
  std::sort(kept.begin(), kept.end());
  if (std::adjacent_find(kept.begin(), kept.end()) != kept.end()) {
    throw std::invalid_argument("subtopology node set contains duplicates");
  }

  std::vector<int> parent;  // local index within g
  parent.reserve(kept.size());
  for (NodeId id : kept) {
    const auto it = local_of.find(id);
    if (it == local_of.end()) {
      throw std::out_of_range("node " + std::to_string(id) + " not in topology graph");
    }
    parent.push_back(it->second);
  }

  const int m = static_cast<int>(kept.size());
  TopologyGraph sub{g.dims, g.hop_cost, std::move(kept), Matrix::Zero(m, m)};
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) {
      sub.weight(i, j) = g.weight(parent[static_cast<std::size_t>(i)],
                                  parent[static_cast<std::size_t>(j)]);
    }
  }
  return sub;
}

}  // namespace tofa
