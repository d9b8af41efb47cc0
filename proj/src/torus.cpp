#include "tofa/torus.hpp"

#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>

namespace tofa {

TorusTopology::TorusTopology(TorusDims dims) : dims_(dims) {
  if (dims.x < 1 || dims.y < 1 || dims.z < 1) {
    throw std::invalid_argument("torus dimensions must all be >= 1");
  }
}

void TorusTopology::check_node(NodeId id) const {
  if (id < 0 || id >= node_count()) {
    throw std::out_of_range("node id " + std::to_string(id) + " outside [0, " +
                            std::to_string(node_count()) + ")");
  }
}

Coord TorusTopology::coord_of(NodeId id) const {
  check_node(id);
  const int yz = dims_.y * dims_.z;
  return Coord{id / yz, (id / dims_.z) % dims_.y, id % dims_.z};
}

NodeId TorusTopology::id_of(const Coord& c) const {
  if (c.x < 0 || c.x >= dims_.x || c.y < 0 || c.y >= dims_.y || c.z < 0 || c.z >= dims_.z) {
    throw std::out_of_range("coordinate outside torus bounds");
  }
  return c.x * dims_.y * dims_.z + c.y * dims_.z + c.z;
}

namespace {

inline int ring_distance(int a, int b, int dim) {
  const int d = std::abs(a - b);
  return std::min(d, dim - d);
}

}  // namespace

int TorusTopology::hop_distance(NodeId u, NodeId v) const {
  const Coord cu = coord_of(u);
  const Coord cv = coord_of(v);
  return ring_distance(cu.x, cv.x, dims_.x) + ring_distance(cu.y, cv.y, dims_.y) +
         ring_distance(cu.z, cv.z, dims_.z);
}

Route TorusTopology::route(NodeId u, NodeId v) const {
  const Coord cv = coord_of(v);
  Coord cur = coord_of(u);

  Route links;
  links.reserve(static_cast<std::size_t>(hop_distance(u, v)));

  const std::array<int, 3> dim_sizes{dims_.x, dims_.y, dims_.z};
  const std::array<int Coord::*, 3> axes{&Coord::x, &Coord::y, &Coord::z};

  for (int d = 0; d < 3; ++d) {
    const int size = dim_sizes[static_cast<std::size_t>(d)];
    int Coord::*axis = axes[static_cast<std::size_t>(d)];
    const int forward = ((cv.*axis - cur.*axis) % size + size) % size;
    if (forward == 0) continue;
    // Tie at size/2 resolves to the positive direction.
    const bool positive = forward <= size - forward;
    const int step = positive ? 1 : -1;
    const int hops = positive ? forward : size - forward;
    for (int h = 0; h < hops; ++h) {
      const NodeId from = id_of(cur);
      cur.*axis = ((cur.*axis + step) % size + size) % size;
      links.push_back(Link{from, id_of(cur)});
    }
  }
  return links;
}

IntMatrix TorusTopology::hop_matrix() const {
  const int n = node_count();
  IntMatrix hops(n, n);
  for (int u = 0; u < n; ++u) {
    hops(u, u) = 0;
    for (int v = u + 1; v < n; ++v) {
      const int h = hop_distance(u, v);
      hops(u, v) = h;
      hops(v, u) = h;
    }
  }
  return hops;
}

TorusTopology load_topology_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open topology file: " + path.string());
  }

  struct Entry {
    NodeId id;
    Coord c;
  };
  std::vector<Entry> entries;
  int max_x = -1, max_y = -1, max_z = -1;

  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ls(line);
    Entry e;
    if (!(ls >> e.id >> e.c.x >> e.c.y >> e.c.z)) {
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      throw std::runtime_error("topology file: malformed line " + std::to_string(line_no));
    }
    max_x = std::max(max_x, e.c.x);
    max_y = std::max(max_y, e.c.y);
    max_z = std::max(max_z, e.c.z);
    entries.push_back(e);
  }
  if (entries.empty()) {
    throw std::runtime_error("topology file is empty: " + path.string());
  }

  const TorusDims dims{max_x + 1, max_y + 1, max_z + 1};
  if (static_cast<std::size_t>(dims.count()) != entries.size()) {
    throw std::runtime_error("topology file: node count does not fill the torus");
  }

  TorusTopology topo(dims);
  std::set<NodeId> seen;
  for (const Entry& e : entries) {
    if (e.id < 0 || e.id >= dims.count() || !seen.insert(e.id).second) {
      throw std::runtime_error("topology file: ids must uniquely cover [0, N)");
    }
    if (topo.id_of(e.c) != e.id) {
      throw std::runtime_error("topology file: id " + std::to_string(e.id) +
                               " does not match the lexicographic (x,y,z) rule");
    }
  }
  return topo;
}

void save_topology_file(const TorusTopology& topo, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot write topology file: " + path.string());
  }
  for (NodeId id = 0; id < topo.node_count(); ++id) {
    const Coord c = topo.coord_of(id);
    out << id << ' ' << c.x << ' ' << c.y << ' ' << c.z << '\n';
  }
}

}  // namespace tofa
