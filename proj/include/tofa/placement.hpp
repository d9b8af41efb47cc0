#pragma once

#include "tofa/topology_graph.hpp"
#include "tofa/torus.hpp"
#include "tofa/traffic.hpp"
#include "tofa/types.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>

namespace tofa {

struct MappingQuality {
  double hop_bytes = 0.0;  // sum over pairs of volume * hop distance
  int dilation = 0;        // max hops between communicating processes
  double congestion = 0.0; // max bytes routed across a single link
};

/// Default-Slurm baseline: process p on node p.
Mapping place_sequential(int n_procs, const TorusTopology& topo);

/// Uniform injective sample of n_procs nodes, deterministic in the seed.
Mapping place_random(int n_procs, const TorusTopology& topo, std::uint64_t seed);

// Greedy baseline: process pairs visited by descending weight; each unplaced
// process goes on the free node closest (under h.weight) to its placed
// partner, fresh pairs take the cheapest free node pair, and processes left
// over fill the lowest free nodes.
Mapping place_greedy(const Matrix& traffic_weights, const TopologyGraph& h);

// Recursive bipartitioning mapper. The process graph is split by a
// Kernighan-Lin-refined greedy bisection while the candidate nodes are split
// geometrically along their longest dimension into size-matched halves; when
// the candidate set is larger than the process count it is first narrowed to
// the consecutive node window with the least internal weight.
Mapping place_rb(const Matrix& traffic_weights, const TopologyGraph& h);

// First run of n_needed consecutive node ids (no wraparound) whose outage
// probability does not exceed `threshold`; nullopt when no such run exists.
std::optional<std::vector<NodeId>> find_consecutive_fault_free(const Vector& outage,
                                                               int n_needed,
                                                               double threshold = 0.0);

// Fault-aware pipeline: penalize H per the outage vector, map onto the first
// consecutive fault-free window when one exists, otherwise onto the full
// penalized graph.
Mapping tofa_place(const Matrix& traffic_weights, const TorusTopology& topo,
                   const Vector& outage, double c = 1.0, double threshold = 0.0);

MappingQuality mapping_quality(const Mapping& mapping, const TrafficMatrix& g,
                               const TorusTopology& topo);

/// Throws unless `mapping` is an injective assignment into [0, n_nodes).
void validate_mapping(const Mapping& mapping, int n_nodes);

// Mapping file: one "process_id,node_id" line per process.
void save_mapping_csv(const Mapping& mapping, const std::filesystem::path& path);
Mapping load_mapping_csv(const std::filesystem::path& path);

}  // namespace tofa
