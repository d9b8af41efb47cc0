#pragma once

#include "tofa/types.hpp"

#include <array>
#include <filesystem>
#include <vector>

namespace tofa {

/// Node counts per dimension of the 3D torus.
struct TorusDims {
  int x = 1;
  int y = 1;
  int z = 1;

  int count() const { return x * y * z; }
  bool operator==(const TorusDims&) const = default;
};

struct Coord {
  int x = 0;
  int y = 0;
  int z = 0;

  bool operator==(const Coord&) const = default;
};

/// Directed physical link between torus-adjacent nodes.
struct Link {
  NodeId source = 0;
  NodeId target = 0;

  bool operator==(const Link&) const = default;
};

/// Ordered list of links traversed by a message; empty when source == target.
using Route = std::vector<Link>;

// 3D torus platform with fixed dimension-ordered routing. Node ids are
// lexicographic over (x, y, z): id = x*dy*dz + y*dz + z. Immutable once
// built; safe to share across threads.
class TorusTopology {
 public:
  explicit TorusTopology(TorusDims dims);

  const TorusDims& dims() const { return dims_; }
  int node_count() const { return dims_.count(); }

  Coord coord_of(NodeId id) const;
  NodeId id_of(const Coord& c) const;

  /// Shortest torus distance: sum over dimensions of min(|d|, dim - |d|).
  int hop_distance(NodeId u, NodeId v) const;

  // Dimension-ordered route X -> Y -> Z; per dimension the shorter wraparound
  // direction wins, ties (delta == dim/2) go to the positive direction.
  Route route(NodeId u, NodeId v) const;

  /// All-pairs hop distances.
  IntMatrix hop_matrix() const;

  bool adjacent(NodeId u, NodeId v) const { return hop_distance(u, v) == 1; }

 private:
  void check_node(NodeId id) const;

  TorusDims dims_;
};

inline TorusTopology build_torus(TorusDims dims) { return TorusTopology(dims); }

// The canonical route of an unordered node pair: lower id to higher id. Fault
// penalties, link loads and used-node sets all follow this direction so they
// agree with the symmetric weight matrices.
inline Route canonical_route(const TorusTopology& topo, NodeId u, NodeId v) {
  return u <= v ? topo.route(u, v) : topo.route(v, u);
}

// Topology file: one line per node, "id x y z", ids in [0, N) matching the
// lexicographic rule. The loader rejects anything else.
TorusTopology load_topology_file(const std::filesystem::path& path);
void save_topology_file(const TorusTopology& topo, const std::filesystem::path& path);

}  // namespace tofa
