#pragma once

#include "tofa/fault_model.hpp"
#include "tofa/placement.hpp"
#include "tofa/torus.hpp"
#include "tofa/traffic.hpp"
#include "tofa/types.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace tofa {

enum class PlacementPolicy { sequential, random, greedy, rb, tofa };

PlacementPolicy policy_from_string(const std::string& name);
std::string to_string(PlacementPolicy policy);

/// Runs the selected engine. `outage` and `penalty_c` matter for tofa only;
/// `seed` matters for random only.
Mapping place(PlacementPolicy policy, const TrafficMatrix& g, EdgeWeightKind weights,
              const TorusTopology& topo, const Vector& outage, double penalty_c,
              double threshold, std::uint64_t seed);

struct Platform {
  double node_gflops = 6.0;
  double link_bandwidth_gbps = 10.0;
  double link_latency_us = 1.0;
};

struct JobSpec {
  TrafficMatrix traffic;
  double compute_flops = 6e9;  // per process
  Platform platform;

  int n_procs() const { return traffic.n(); }
};

// Analytic stand-in for executing the job: per-process compute, the
// bottleneck link drained at line rate, and a latency charge on the deepest
// message chain.
double estimate_runtime(const JobSpec& job, const Mapping& mapping,
                        const TorusTopology& topo);

// Every node the job depends on: all mapped nodes plus each intermediate on
// the route between communicating processes. A failure anywhere in this set
// aborts the job.
std::vector<NodeId> used_nodes(const Mapping& mapping, const TrafficMatrix& traffic,
                               const TorusTopology& topo);

/// 1 - prod(1 - p_f) over faulty nodes the job touches.
double analytic_abort_probability(const Mapping& mapping, const TrafficMatrix& traffic,
                                  const FaultScenario& scenario, const TorusTopology& topo);

struct InstanceResult {
  int attempts = 1;
  double time = 0.0;
  bool nonterminating = false;
  std::vector<NodeId> failed_nodes_hit;  // used nodes that caused restarts
};

// Draws failures, restarts from scratch on every hit (each restart costs one
// full successful run), and gives up after max_attempts. Pure in
// (scenario.seed, instance_index), so instances can run concurrently.
InstanceResult simulate_instance(const JobSpec& job, const Mapping& mapping,
                                 const FaultScenario& scenario, const TorusTopology& topo,
                                 std::uint64_t instance_index, int max_attempts = 1000);

struct BatchConfig {
  int instances = 100;
  FaultScenario scenario;
  PlacementPolicy policy = PlacementPolicy::tofa;
  EdgeWeightKind weights = EdgeWeightKind::volume;
  double penalty_c = 1.0;
  double threshold = 0.0;
  bool remap_each_instance = false;
  int max_attempts = 1000;
  std::uint64_t placement_seed = 0;
};

struct BatchReport {
  double completion_time = 0.0;
  double abort_ratio = 0.0;
  double t_success = 0.0;
  double analytic_abort = 0.0;
  int nonterminating = 0;
  Mapping mapping;  // of the last instance when remapping per instance
  FaultScenario scenario;
  std::vector<InstanceResult> instances;
};

BatchReport simulate_batch(const JobSpec& job, const BatchConfig& config,
                           const TorusTopology& topo);

// Batch report files: JSON with the per-instance array and a summary, plus a
// one-row-per-batch CSV for spreadsheets.
void save_batch_reports_json(const std::vector<BatchReport>& reports,
                             const std::string& policy_name,
                             const std::filesystem::path& path);
void save_batch_summary_csv(const std::vector<BatchReport>& reports,
                            const std::string& policy_name,
                            const std::filesystem::path& path);

}  // namespace tofa
