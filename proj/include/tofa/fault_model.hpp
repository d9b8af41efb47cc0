#pragma once

#include "tofa/types.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

namespace tofa {

// Per-node heartbeat history HB(i): true means the probe at that interval was
// answered. Logs are trimmed to the most recent `window` entries.
class HeartbeatLog {
 public:
  explicit HeartbeatLog(int n_nodes, int window = 100);

  int n_nodes() const { return static_cast<int>(log_.size()); }
  int window() const { return window_; }

  void record(NodeId node, std::int64_t t, bool answered);

  struct Sample {
    std::int64_t t;
    bool answered;
  };
  const std::vector<Sample>& history(NodeId node) const;

 private:
  int window_;
  std::vector<std::vector<Sample>> log_;
};

enum class OutagePolicy { window_avg, ewma };

struct OutageEstimate {
  Vector probability;
  std::vector<NodeId> empty_logs;  // nodes estimated 0 for lack of history
};

// window_avg: missed probes divided by the window length W.
// ewma: chronological fold p <- alpha*missed + (1-alpha)*p, seeded with the
// oldest sample, so the newest probe is folded last.
OutageEstimate estimate_outage(const HeartbeatLog& log, OutagePolicy policy,
                               double alpha = 0.1);

void save_heartbeat_csv(const HeartbeatLog& log, const std::filesystem::path& path);
HeartbeatLog load_heartbeat_csv(const std::filesystem::path& path, int n_nodes,
                                int window = 100);

// Failure-prone node set N_f with a uniform outage probability. Nodes outside
// `faulty` never fail.
struct FaultScenario {
  int nodes = 0;
  std::vector<NodeId> faulty;
  double p_f = 0.0;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Independent Bernoulli(p_f) draw per faulty node; pure in (seed, instance).
std::vector<NodeId> sample_failed_set(const FaultScenario& scenario,
                                      std::uint64_t instance_index);

/// Per-node outage probabilities implied by the scenario.
Vector outage_vector(const FaultScenario& scenario);

/// Scenario with n_f faulty nodes drawn uniformly without replacement;
/// distinct batches get distinct draws.
FaultScenario draw_scenario(int nodes, int n_f, double p_f, std::uint64_t seed,
                            std::uint64_t batch_index);

// Scenario file: {"nodes": N, "faulty": [ids], "p_f": p, "seed": s}. The
// "faulty" list may be replaced by "n_f": count, in which case the set is
// redrawn per batch from the seed.
struct ScenarioSpec {
  int nodes = 0;
  std::vector<NodeId> faulty;  // explicit set; empty when n_f is used
  int n_f = 0;
  double p_f = 0.0;
  std::optional<std::uint64_t> seed;

  FaultScenario instantiate(std::uint64_t fallback_seed, std::uint64_t batch_index) const;
};

ScenarioSpec load_scenario(const std::filesystem::path& path);
void save_scenario(const ScenarioSpec& spec, const std::filesystem::path& path);

}  // namespace tofa
