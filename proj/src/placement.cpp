#include "tofa/placement.hpp"

#include "tofa/rng.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <limits>
#include <numeric>
#include <set>
#include <stdexcept>
#include <unordered_map>

namespace tofa {

namespace {

std::vector<int> iota_vec(int n) {
  std::vector<int> v(static_cast<std::size_t>(n));
  std::iota(v.begin(), v.end(), 0);
  return v;
}

void check_capacity(int n_procs, int n_nodes) {
  if (n_procs < 1) throw std::invalid_argument("need at least one process");
  if (n_procs > n_nodes) {
    throw std::invalid_argument("more processes (" + std::to_string(n_procs) +
                                ") than nodes (" + std::to_string(n_nodes) + ")");
  }
}

Coord coord_from_id(NodeId id, const TorusDims& dims) {
  const int yz = dims.y * dims.z;
  return Coord{id / yz, (id / dims.z) % dims.y, id % dims.z};
}

}  // namespace

Mapping place_sequential(int n_procs, const TorusTopology& topo) {
  check_capacity(n_procs, topo.node_count());
  Mapping m(static_cast<std::size_t>(n_procs));
  std::iota(m.begin(), m.end(), 0);
  return m;
}

Mapping place_random(int n_procs, const TorusTopology& topo, std::uint64_t seed) {
  const int n_nodes = topo.node_count();
  check_capacity(n_procs, n_nodes);

  std::vector<NodeId> ids(static_cast<std::size_t>(n_nodes));
  std::iota(ids.begin(), ids.end(), 0);
  auto rng = seeded_rng(seed, /*stream=*/0x9d0e);
  for (int i = 0; i < n_procs; ++i) {
    const auto j =
        i + static_cast<int>(uniform_below(rng, static_cast<std::uint64_t>(n_nodes - i)));
    std::swap(ids[static_cast<std::size_t>(i)], ids[static_cast<std::size_t>(j)]);
  }
  ids.resize(static_cast<std::size_t>(n_procs));
  return ids;
}

Mapping place_greedy(const Matrix& traffic_weights, const TopologyGraph& h) {
  const int n = static_cast<int>(traffic_weights.rows());
  const int m = h.size();
  check_capacity(n, m);

  struct Pair {
    double weight;
    int i, j;
  };
  std::vector<Pair> pairs;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (traffic_weights(i, j) > 0.0) pairs.push_back({traffic_weights(i, j), i, j});
    }
  }
  std::sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) {
    if (a.weight != b.weight) return a.weight > b.weight;
    if (a.i != b.i) return a.i < b.i;
    return a.j < b.j;
  });

  std::vector<int> node_of(static_cast<std::size_t>(n), -1);  // local node index
  std::vector<bool> free_node(static_cast<std::size_t>(m), true);

  const auto closest_free = [&](int anchor) {
    int best = -1;
    for (int v = 0; v < m; ++v) {
      if (!free_node[static_cast<std::size_t>(v)]) continue;
      if (best < 0 || h.weight(anchor, v) < h.weight(anchor, best)) best = v;
    }
    return best;
  };

  for (const Pair& p : pairs) {
    const bool i_placed = node_of[static_cast<std::size_t>(p.i)] >= 0;
    const bool j_placed = node_of[static_cast<std::size_t>(p.j)] >= 0;
    if (i_placed && j_placed) continue;

    if (!i_placed && !j_placed) {
      // Cheapest free node pair, ties to the lowest ids.
      int best_a = -1, best_b = -1;
      double best_w = std::numeric_limits<double>::infinity();
      for (int a = 0; a < m; ++a) {
        if (!free_node[static_cast<std::size_t>(a)]) continue;
        for (int b = a + 1; b < m; ++b) {
          if (!free_node[static_cast<std::size_t>(b)]) continue;
          if (h.weight(a, b) < best_w) {
            best_w = h.weight(a, b);
            best_a = a;
            best_b = b;
          }
        }
      }
      if (best_a < 0) throw std::logic_error("greedy ran out of node pairs");
      node_of[static_cast<std::size_t>(p.i)] = best_a;
      node_of[static_cast<std::size_t>(p.j)] = best_b;
      free_node[static_cast<std::size_t>(best_a)] = false;
      free_node[static_cast<std::size_t>(best_b)] = false;
    } else {
      const int placed = i_placed ? p.i : p.j;
      const int pending = i_placed ? p.j : p.i;
      const int v = closest_free(node_of[static_cast<std::size_t>(placed)]);
      if (v < 0) throw std::logic_error("greedy ran out of nodes");
      node_of[static_cast<std::size_t>(pending)] = v;
      free_node[static_cast<std::size_t>(v)] = false;
    }
  }

  // Processes without traffic fill the lowest free nodes.
  int next_free = 0;
  for (int p = 0; p < n; ++p) {
    if (node_of[static_cast<std::size_t>(p)] >= 0) continue;
    while (!free_node[static_cast<std::size_t>(next_free)]) ++next_free;
    node_of[static_cast<std::size_t>(p)] = next_free;
    free_node[static_cast<std::size_t>(next_free)] = false;
  }

  Mapping result(static_cast<std::size_t>(n));
  for (int p = 0; p < n; ++p) {
    result[static_cast<std::size_t>(p)] = h.nodes[static_cast<std::size_t>(node_of[static_cast<std::size_t>(p)])];
  }
  return result;
}

namespace {

// ---- recursive bipartitioning mapper -------------------------------------

constexpr int kMaxKlPasses = 20;

double internal_weight(const Matrix& w, const std::vector<int>& members) {
  double total = 0.0;
  for (std::size_t a = 0; a < members.size(); ++a) {
    for (std::size_t b = a + 1; b < members.size(); ++b) {
      total += w(members[a], members[b]);
    }
  }
  return total;
}

// Cheapest length-`need` window of consecutive candidates (by internal
// weight, earliest window on ties). Candidates are local indices in
// ascending node-id order, so a window is a consecutive id run whenever the
// graph covers a full torus.
std::vector<int> best_window(const TopologyGraph& h, int need) {
  const int m = h.size();
  double best = std::numeric_limits<double>::infinity();
  int best_start = 0;
  for (int s = 0; s + need <= m; ++s) {
    double total = 0.0;
    for (int a = s; a < s + need; ++a) {
      for (int b = a + 1; b < s + need; ++b) {
        total += h.weight(a, b);
      }
    }
    if (total < best) {
      best = total;
      best_start = s;
    }
  }
  std::vector<int> window(static_cast<std::size_t>(need));
  std::iota(window.begin(), window.end(), best_start);
  return window;
}

// Greedy graph-growing bisection refined by Kernighan-Lin swap passes.
// Half sizes are ceil(k/2) / floor(k/2) and stay fixed through refinement.
void bisect_processes(const Matrix& w, const std::vector<int>& procs,
                      std::vector<int>& left, std::vector<int>& right) {
  const int k = static_cast<int>(procs.size());
  const int left_target = (k + 1) / 2;

  std::unordered_map<int, double> degree;
  degree.reserve(procs.size());
  for (int i : procs) {
    double d = 0.0;
    for (int j : procs) d += w(i, j);
    degree[i] = d;
  }

  int seed = procs.front();
  for (int i : procs) {
    if (degree[i] > degree[seed]) seed = i;
  }

  std::unordered_map<int, double> conn;  // connection to the growing half
  for (int i : procs) conn[i] = w(seed, i);

  std::set<int> in_left{seed};
  while (static_cast<int>(in_left.size()) < left_target) {
    int pick = -1;
    for (int v : procs) {
      if (in_left.count(v)) continue;
      if (pick < 0 || conn[v] > conn[pick] ||
          (conn[v] == conn[pick] && degree[v] > degree[pick])) {
        pick = v;
      }
    }
    in_left.insert(pick);
    for (int v : procs) conn[v] += w(pick, v);
  }

  left.assign(in_left.begin(), in_left.end());
  right.clear();
  for (int v : procs) {
    if (!in_left.count(v)) right.push_back(v);
  }

  if (left.size() < 2 || right.empty()) return;

  // Kernighan-Lin passes over the fixed-size halves.
  for (int pass = 0; pass < kMaxKlPasses; ++pass) {
    std::unordered_map<int, double> d_value;
    for (int v : procs) {
      double external = 0.0, internal = 0.0;
      const bool v_left = in_left.count(v) > 0;
      for (int u : procs) {
        if (u == v) continue;
        if ((in_left.count(u) > 0) == v_left) {
          internal += w(u, v);
        } else {
          external += w(u, v);
        }
      }
      d_value[v] = external - internal;
    }

    std::vector<int> cur_left(in_left.begin(), in_left.end());
    std::vector<int> cur_right = right;
    std::set<int> locked;
    struct Swap {
      double gain;
      int a, b;
    };
    std::vector<Swap> swaps;

    const int max_swaps = static_cast<int>(std::min(cur_left.size(), cur_right.size()));
    for (int s = 0; s < max_swaps; ++s) {
      double best_gain = -std::numeric_limits<double>::infinity();
      int best_a = -1, best_b = -1;
      for (int a : cur_left) {
        if (locked.count(a)) continue;
        for (int b : cur_right) {
          if (locked.count(b)) continue;
          const double gain = d_value[a] + d_value[b] - 2.0 * w(a, b);
          if (gain > best_gain) {
            best_gain = gain;
            best_a = a;
            best_b = b;
          }
        }
      }
      if (best_a < 0) break;
      swaps.push_back({best_gain, best_a, best_b});
      locked.insert(best_a);
      locked.insert(best_b);
      for (int x : cur_left) {
        if (!locked.count(x)) d_value[x] += 2.0 * w(x, best_a) - 2.0 * w(x, best_b);
      }
      for (int y : cur_right) {
        if (!locked.count(y)) d_value[y] += 2.0 * w(y, best_b) - 2.0 * w(y, best_a);
      }
    }

    double cum = 0.0, best_cum = 0.0;
    int best_prefix = 0;
    for (std::size_t s = 0; s < swaps.size(); ++s) {
      cum += swaps[s].gain;
      if (cum > best_cum) {
        best_cum = cum;
        best_prefix = static_cast<int>(s) + 1;
      }
    }
    if (best_prefix == 0) break;

    for (int s = 0; s < best_prefix; ++s) {
      in_left.erase(swaps[static_cast<std::size_t>(s)].a);
      in_left.insert(swaps[static_cast<std::size_t>(s)].b);
    }
    left.assign(in_left.begin(), in_left.end());
    right.clear();
    for (int v : procs) {
      if (!in_left.count(v)) right.push_back(v);
    }
  }
}

// Geometric split of the candidate nodes along their longest dimension: sort
// by that coordinate (node id breaking ties) and cut at first_size.
void split_nodes(const TopologyGraph& h, std::vector<int> nodes, int first_size,
                 std::vector<int>& first, std::vector<int>& second) {
  std::array<std::set<int>, 3> values;
  for (int local : nodes) {
    const Coord c = coord_from_id(h.nodes[static_cast<std::size_t>(local)], h.dims);
    values[0].insert(c.x);
    values[1].insert(c.y);
    values[2].insert(c.z);
  }
  int axis = 0;
  for (int d = 1; d < 3; ++d) {
    if (values[static_cast<std::size_t>(d)].size() > values[static_cast<std::size_t>(axis)].size()) axis = d;
  }

  std::sort(nodes.begin(), nodes.end(), [&](int a, int b) {
    const NodeId ida = h.nodes[static_cast<std::size_t>(a)];
    const NodeId idb = h.nodes[static_cast<std::size_t>(b)];
    const Coord ca = coord_from_id(ida, h.dims);
    const Coord cb = coord_from_id(idb, h.dims);
    const int va = axis == 0 ? ca.x : axis == 1 ? ca.y : ca.z;
    const int vb = axis == 0 ? cb.x : axis == 1 ? cb.y : cb.z;
    if (va != vb) return va < vb;
    return ida < idb;
  });

  first.assign(nodes.begin(), nodes.begin() + first_size);
  second.assign(nodes.begin() + first_size, nodes.end());
}

struct RbState {
  const Matrix& w;
  const TopologyGraph& h;
  std::vector<double> global_degree;  // per process, over the full graph
  std::vector<double> centrality;     // per local node, over the candidate set
  std::vector<int> assigned;          // process -> local node index
};

// Final hill climb on the assignment: keep taking the best process-pair node
// swap while it strictly lowers sum w(i,j) * weight(node_i, node_j). The
// swap deltas live in a table that is patched after each applied swap (only
// pairs touching the swapped processes need a full rescan), which keeps a
// round at O(n^2) and full-machine mappings interactive.
void swap_refine(const Matrix& w, const Matrix& node_weight, std::vector<int>& node_of) {
  const int n = static_cast<int>(node_of.size());
  if (n < 3) return;  // swapping a pair never changes its own cost

  // row-major copies of the traffic weights and of the weights between the
  // fixed set of occupied nodes; pos[p] indexes that set
  std::vector<double> tw(static_cast<std::size_t>(n) * n);
  std::vector<double> cw(static_cast<std::size_t>(n) * n);
  std::vector<int> pos(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    pos[static_cast<std::size_t>(i)] = i;
    for (int j = 0; j < n; ++j) {
      tw[static_cast<std::size_t>(i) * n + j] = w(i, j);
      cw[static_cast<std::size_t>(i) * n + j] =
          node_weight(node_of[static_cast<std::size_t>(i)], node_of[static_cast<std::size_t>(j)]);
    }
  }
  const std::vector<int> slot_node(node_of);  // position -> node

  // delta(i,j): cost change from swapping the nodes of processes i and j
  const auto compute_delta = [&](int i, int j) {
    const int pi = pos[static_cast<std::size_t>(i)];
    const int pj = pos[static_cast<std::size_t>(j)];
    const double* wi = &tw[static_cast<std::size_t>(i) * n];
    const double* wj = &tw[static_cast<std::size_t>(j) * n];
    const double* ci = &cw[static_cast<std::size_t>(pi) * n];
    const double* cj = &cw[static_cast<std::size_t>(pj) * n];
    double delta = 0.0;
    for (int q = 0; q < n; ++q) {
      if (q == i || q == j) continue;
      const int pq = pos[static_cast<std::size_t>(q)];
      delta += (wi[q] - wj[q]) * (cj[pq] - ci[pq]);
    }
    return delta;
  };

  std::vector<double> delta(static_cast<std::size_t>(n) * n, 0.0);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      delta[static_cast<std::size_t>(i) * n + j] = compute_delta(i, j);
    }
  }

  const int max_rounds = 4 * n;
  for (int round = 0; round < max_rounds; ++round) {
    double best_gain = 1e-12;
    int best_i = -1, best_j = -1;
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) {
        if (-delta[static_cast<std::size_t>(i) * n + j] > best_gain) {
          best_gain = -delta[static_cast<std::size_t>(i) * n + j];
          best_i = i;
          best_j = j;
        }
      }
    }
    if (best_i < 0) break;

    const int pa = pos[static_cast<std::size_t>(best_i)];
    const int pb = pos[static_cast<std::size_t>(best_j)];
    pos[static_cast<std::size_t>(best_i)] = pb;
    pos[static_cast<std::size_t>(best_j)] = pa;

    const double* wa = &tw[static_cast<std::size_t>(best_i) * n];
    const double* wb = &tw[static_cast<std::size_t>(best_j) * n];
    const double* ca = &cw[static_cast<std::size_t>(pa) * n];
    const double* cb = &cw[static_cast<std::size_t>(pb) * n];
    for (int i = 0; i < n; ++i) {
      const bool i_touched = i == best_i || i == best_j;
      const int pi = pos[static_cast<std::size_t>(i)];
      for (int j = i + 1; j < n; ++j) {
        if (i_touched || j == best_i || j == best_j) {
          delta[static_cast<std::size_t>(i) * n + j] = compute_delta(i, j);
          continue;
        }
        // only the q = best_i / best_j terms moved; patch them in place
        const int pj = pos[static_cast<std::size_t>(j)];
        const double traffic = wa[i] - wa[j] - wb[i] + wb[j];
        const double distance = cb[pj] - cb[pi] - ca[pj] + ca[pi];
        delta[static_cast<std::size_t>(i) * n + j] += traffic * distance;
      }
    }
  }

  for (int p = 0; p < n; ++p) {
    node_of[static_cast<std::size_t>(p)] = slot_node[static_cast<std::size_t>(pos[static_cast<std::size_t>(p)])];
  }
}

void rb_recurse(RbState& st, const std::vector<int>& procs, const std::vector<int>& nodes) {
  if (procs.empty()) return;
  if (procs.size() == 1) {
    st.assigned[static_cast<std::size_t>(procs.front())] = nodes.front();
    return;
  }
  if (procs.size() == 2) {
    // The local subgraph cannot break this tie; put the globally heavier
    // process on the more central node so cross-partition traffic stays
    // short, which also keeps the outcome independent of process labels.
    const int a = procs[0], b = procs[1];
    const double da = st.global_degree[static_cast<std::size_t>(a)];
    const double db = st.global_degree[static_cast<std::size_t>(b)];
    const int heavy = da > db ? a : db > da ? b : std::min(a, b);
    const int light = heavy == a ? b : a;
    const int u = nodes[0], v = nodes[1];
    const double cu = st.centrality[static_cast<std::size_t>(u)];
    const double cv = st.centrality[static_cast<std::size_t>(v)];
    const int central = cu < cv ? u : cv < cu ? v : std::min(u, v);
    const int outer = central == u ? v : u;
    st.assigned[static_cast<std::size_t>(heavy)] = central;
    st.assigned[static_cast<std::size_t>(light)] = outer;
    return;
  }

  std::vector<int> proc_left, proc_right;
  bisect_processes(st.w, procs, proc_left, proc_right);

  const int k = static_cast<int>(procs.size());
  std::vector<int> node_first, node_second;

  bool left_to_first = true;
  if (k % 2 == 1) {
    // Odd split: the larger process half takes the geometrically first half.
    split_nodes(st.h, nodes, static_cast<int>(proc_left.size()), node_first, node_second);
  } else {
    split_nodes(st.h, nodes, k / 2, node_first, node_second);
    // Pair the traffic-heavier half with the internally cheaper node half.
    const double wl = internal_weight(st.w, proc_left);
    const double wr = internal_weight(st.w, proc_right);
    const double hf = internal_weight(st.h.weight, node_first);
    const double hs = internal_weight(st.h.weight, node_second);
    if (wl != wr && hf != hs) {
      left_to_first = (wl > wr) == (hf < hs);
    }
  }

  if (left_to_first) {
    rb_recurse(st, proc_left, node_first);
    rb_recurse(st, proc_right, node_second);
  } else {
    rb_recurse(st, proc_left, node_second);
    rb_recurse(st, proc_right, node_first);
  }
}

}  // namespace

Mapping place_rb(const Matrix& traffic_weights, const TopologyGraph& h) {
  const int n = static_cast<int>(traffic_weights.rows());
  if (traffic_weights.cols() != n) throw std::invalid_argument("traffic matrix must be square");
  check_capacity(n, h.size());

  std::vector<int> candidates = h.size() > n ? best_window(h, n) : iota_vec(h.size());

  RbState st{traffic_weights,
             h,
             std::vector<double>(static_cast<std::size_t>(n), 0.0),
             std::vector<double>(static_cast<std::size_t>(h.size()), 0.0),
             std::vector<int>(static_cast<std::size_t>(n), -1)};
  for (int i = 0; i < n; ++i) {
    st.global_degree[static_cast<std::size_t>(i)] = traffic_weights.row(i).sum();
  }
  for (int u : candidates) {
    for (int v : candidates) {
      st.centrality[static_cast<std::size_t>(u)] += h.weight(u, v);
    }
  }

  rb_recurse(st, iota_vec(n), candidates);
  swap_refine(traffic_weights, h.weight, st.assigned);

  Mapping result(static_cast<std::size_t>(n));
  for (int p = 0; p < n; ++p) {
    result[static_cast<std::size_t>(p)] = h.nodes[static_cast<std::size_t>(st.assigned[static_cast<std::size_t>(p)])];
  }
  return result;
}

std::optional<std::vector<NodeId>> find_consecutive_fault_free(const Vector& outage,
                                                               int n_needed,
                                                               double threshold) {
  const int n_nodes = static_cast<int>(outage.size());
  if (n_needed < 1) throw std::invalid_argument("window length must be >= 1");
  if (n_needed > n_nodes) {
    throw std::invalid_argument("window length exceeds node count");
  }

  int run = 0;
  for (NodeId id = 0; id < n_nodes; ++id) {
    run = outage[id] > threshold ? 0 : run + 1;
    if (run == n_needed) {
      std::vector<NodeId> window(static_cast<std::size_t>(n_needed));
      std::iota(window.begin(), window.end(), id - n_needed + 1);
      return window;
    }
  }
  return std::nullopt;
}

Mapping tofa_place(const Matrix& traffic_weights, const TorusTopology& topo,
                   const Vector& outage, double c, double threshold) {
  const int n = static_cast<int>(traffic_weights.rows());
  check_capacity(n, topo.node_count());

  const TopologyGraph h = fault_weight_matrix(topo, outage, c);
  if (const auto window = find_consecutive_fault_free(outage, n, threshold)) {
    return place_rb(traffic_weights, extract_subtopology(h, *window));
  }
  return place_rb(traffic_weights, h);
}

void validate_mapping(const Mapping& mapping, int n_nodes) {
  std::set<NodeId> seen;
  for (NodeId id : mapping) {
    if (id < 0 || id >= n_nodes) throw std::out_of_range("mapping targets invalid node");
    if (!seen.insert(id).second) {
      throw std::invalid_argument("mapping assigns two processes to one node");
    }
  }
}

MappingQuality mapping_quality(const Mapping& mapping, const TrafficMatrix& g,
                               const TorusTopology& topo) {
  if (static_cast<int>(mapping.size()) != g.n()) {
    throw std::invalid_argument("mapping size does not match process count");
  }
  validate_mapping(mapping, topo.node_count());

  MappingQuality q;
  std::unordered_map<std::int64_t, double> link_load;
  const auto& vol = g.vol();
  for (int i = 0; i < g.n(); ++i) {
    for (int j = i + 1; j < g.n(); ++j) {
      if (vol(i, j) <= 0.0) continue;
      const NodeId u = mapping[static_cast<std::size_t>(i)];
      const NodeId v = mapping[static_cast<std::size_t>(j)];
      const int hops = topo.hop_distance(u, v);
      q.hop_bytes += vol(i, j) * hops;
      q.dilation = std::max(q.dilation, hops);
      for (const Link& l : canonical_route(topo, u, v)) {
        const auto lo = static_cast<std::int64_t>(std::min(l.source, l.target));
        const auto hi = static_cast<std::int64_t>(std::max(l.source, l.target));
        link_load[lo * topo.node_count() + hi] += vol(i, j);
      }
    }
  }
  for (const auto& [key, load] : link_load) q.congestion = std::max(q.congestion, load);
  return q;
}

void save_mapping_csv(const Mapping& mapping, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write mapping file: " + path.string());
  for (std::size_t p = 0; p < mapping.size(); ++p) {
    out << p << ',' << mapping[p] << '\n';
  }
}

Mapping load_mapping_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open mapping file: " + path.string());
  Mapping mapping;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    int p, node;
    if (std::sscanf(line.c_str(), "%d,%d", &p, &node) != 2) {
      throw std::runtime_error("malformed mapping line: " + line);
    }
    if (p != static_cast<int>(mapping.size())) {
      throw std::runtime_error("mapping lines must list processes in order");
    }
    mapping.push_back(node);
  }
  return mapping;
}

}  // namespace tofa
