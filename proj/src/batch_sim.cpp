#include "tofa/batch_sim.hpp"

#include "tofa/rng.hpp"
#include "tofa/trace_io.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

namespace tofa {

using nlohmann::json;

PlacementPolicy policy_from_string(const std::string& name) {
  if (name == "sequential") return PlacementPolicy::sequential;
  if (name == "random") return PlacementPolicy::random;
  if (name == "greedy") return PlacementPolicy::greedy;
  if (name == "rb") return PlacementPolicy::rb;
  if (name == "tofa") return PlacementPolicy::tofa;
  throw std::invalid_argument("unknown placement policy: " + name);
}

std::string to_string(PlacementPolicy policy) {
  switch (policy) {
    case PlacementPolicy::sequential: return "sequential";
    case PlacementPolicy::random: return "random";
    case PlacementPolicy::greedy: return "greedy";
    case PlacementPolicy::rb: return "rb";
    case PlacementPolicy::tofa: return "tofa";
  }
  return "unknown";
}

Mapping place(PlacementPolicy policy, const TrafficMatrix& g, EdgeWeightKind weights,
              const TorusTopology& topo, const Vector& outage, double penalty_c,
              double threshold, std::uint64_t seed) {
  switch (policy) {
    case PlacementPolicy::sequential:
      return place_sequential(g.n(), topo);
    case PlacementPolicy::random:
      return place_random(g.n(), topo, seed);
    case PlacementPolicy::greedy:
      return place_greedy(edge_weights(g, weights), hop_topology_graph(topo));
    case PlacementPolicy::rb:
      return place_rb(edge_weights(g, weights), hop_topology_graph(topo));
    case PlacementPolicy::tofa:
      return tofa_place(edge_weights(g, weights), topo, outage, penalty_c, threshold);
  }
  throw std::logic_error("unreachable");
}

double estimate_runtime(const JobSpec& job, const Mapping& mapping,
                        const TorusTopology& topo) {
  const MappingQuality q = mapping_quality(mapping, job.traffic, topo);

  double max_msg_hops = 0.0;
  const auto& msg = job.traffic.msg();
  for (int i = 0; i < job.traffic.n(); ++i) {
    for (int j = i + 1; j < job.traffic.n(); ++j) {
      if (msg(i, j) <= 0.0) continue;
      const int hops = topo.hop_distance(mapping[static_cast<std::size_t>(i)],
                                         mapping[static_cast<std::size_t>(j)]);
      max_msg_hops = std::max(max_msg_hops, msg(i, j) * hops);
    }
  }

  const double compute_s = job.compute_flops / (job.platform.node_gflops * 1e9);
  const double bandwidth_s = q.congestion * 8.0 / (job.platform.link_bandwidth_gbps * 1e9);
  const double latency_s = job.platform.link_latency_us * 1e-6 * max_msg_hops;
  return compute_s + bandwidth_s + latency_s;
}

std::vector<NodeId> used_nodes(const Mapping& mapping, const TrafficMatrix& traffic,
                               const TorusTopology& topo) {
  validate_mapping(mapping, topo.node_count());
  std::vector<bool> used(static_cast<std::size_t>(topo.node_count()), false);
  for (NodeId id : mapping) used[static_cast<std::size_t>(id)] = true;

  const auto& vol = traffic.vol();
  for (int i = 0; i < traffic.n(); ++i) {
    for (int j = i + 1; j < traffic.n(); ++j) {
      if (vol(i, j) <= 0.0) continue;
      for (const Link& l : canonical_route(topo, mapping[static_cast<std::size_t>(i)],
                                           mapping[static_cast<std::size_t>(j)])) {
        used[static_cast<std::size_t>(l.source)] = true;
        used[static_cast<std::size_t>(l.target)] = true;
      }
    }
  }

  std::vector<NodeId> result;
  for (NodeId id = 0; id < topo.node_count(); ++id) {
    if (used[static_cast<std::size_t>(id)]) result.push_back(id);
  }
  return result;
}

double analytic_abort_probability(const Mapping& mapping, const TrafficMatrix& traffic,
                                  const FaultScenario& scenario, const TorusTopology& topo) {
  scenario.validate();
  const std::vector<NodeId> used = used_nodes(mapping, traffic, topo);
  double survive = 1.0;
  for (NodeId id : scenario.faulty) {
    if (std::binary_search(used.begin(), used.end(), id)) survive *= 1.0 - scenario.p_f;
  }
  return 1.0 - survive;
}

namespace {

// Shared with sample_failed_set: same stream, same draw order.
InstanceResult run_instance(const std::vector<NodeId>& used_sorted, double t_success,
                            const FaultScenario& scenario, std::uint64_t instance_index,
                            int max_attempts) {
  std::vector<NodeId> faulty = scenario.faulty;
  std::sort(faulty.begin(), faulty.end());

  auto rng = seeded_rng(scenario.seed, /*stream=*/0xfa11, instance_index);
  InstanceResult r;
  std::vector<NodeId> hit;
  for (int attempt = 1; attempt <= max_attempts; ++attempt) {
    hit.clear();
    for (NodeId id : faulty) {
      const bool failed = uniform01(rng) < scenario.p_f;
      if (failed && std::binary_search(used_sorted.begin(), used_sorted.end(), id)) {
        hit.push_back(id);
      }
    }
    r.attempts = attempt;
    if (hit.empty()) {
      r.time = attempt * t_success;
      return r;
    }
    for (NodeId id : hit) {
      if (!std::binary_search(r.failed_nodes_hit.begin(), r.failed_nodes_hit.end(), id)) {
        r.failed_nodes_hit.insert(
            std::upper_bound(r.failed_nodes_hit.begin(), r.failed_nodes_hit.end(), id), id);
      }
    }
  }
  r.nonterminating = true;
  r.time = max_attempts * t_success;
  return r;
}

}  // namespace

InstanceResult simulate_instance(const JobSpec& job, const Mapping& mapping,
                                 const FaultScenario& scenario, const TorusTopology& topo,
                                 std::uint64_t instance_index, int max_attempts) {
  return run_instance(used_nodes(mapping, job.traffic, topo),
                      estimate_runtime(job, mapping, topo), scenario, instance_index,
                      max_attempts);
}

BatchReport simulate_batch(const JobSpec& job, const BatchConfig& config,
                           const TorusTopology& topo) {
  if (config.instances < 1) throw std::invalid_argument("batch needs >= 1 instance");
  config.scenario.validate();
  if (config.scenario.nodes != topo.node_count()) {
    throw std::invalid_argument("scenario node count does not match topology");
  }

  const Vector outage = outage_vector(config.scenario);

  BatchReport report;
  report.scenario = config.scenario;
  report.instances.reserve(static_cast<std::size_t>(config.instances));

  Mapping mapping;
  std::vector<NodeId> used;
  double t_success = 0.0;

  const auto compute_mapping = [&](std::uint64_t seed) {
    mapping = place(config.policy, job.traffic, config.weights, topo, outage,
                    config.penalty_c, config.threshold, seed);
    used = used_nodes(mapping, job.traffic, topo);
    t_success = estimate_runtime(job, mapping, topo);
  };

  if (!config.remap_each_instance) compute_mapping(config.placement_seed);

  int aborted = 0;
  for (int i = 0; i < config.instances; ++i) {
    if (config.remap_each_instance) {
      compute_mapping(splitmix64(splitmix64(config.placement_seed) ^
                                 static_cast<std::uint64_t>(i)));
    }
    InstanceResult r = run_instance(used, t_success, config.scenario,
                                    static_cast<std::uint64_t>(i), config.max_attempts);
    report.completion_time += r.time;
    if (r.attempts > 1) ++aborted;
    if (r.nonterminating) ++report.nonterminating;
    report.instances.push_back(std::move(r));
  }

  report.abort_ratio = static_cast<double>(aborted) / config.instances;
  report.t_success = t_success;
  report.analytic_abort = analytic_abort_probability(mapping, job.traffic,
                                                     config.scenario, topo);
  report.mapping = std::move(mapping);
  return report;
}

void save_batch_reports_json(const std::vector<BatchReport>& reports,
                             const std::string& policy_name,
                             const std::filesystem::path& path) {
  json batches = json::array();
  double total_completion = 0.0, total_abort = 0.0;
  for (std::size_t b = 0; b < reports.size(); ++b) {
    const BatchReport& r = reports[b];
    json instances = json::array();
    for (const InstanceResult& inst : r.instances) {
      json ji{{"attempts", inst.attempts}, {"time", inst.time}};
      if (inst.nonterminating) ji["nonterminating"] = true;
      if (!inst.failed_nodes_hit.empty()) ji["failed_nodes_hit"] = inst.failed_nodes_hit;
      instances.push_back(std::move(ji));
    }
    batches.push_back(json{{"batch", b},
                           {"completion_time", r.completion_time},
                           {"abort_ratio", r.abort_ratio},
                           {"t_success", r.t_success},
                           {"analytic_abort_probability", r.analytic_abort},
                           {"nonterminating_instances", r.nonterminating},
                           {"faulty_nodes", r.scenario.faulty},
                           {"p_f", r.scenario.p_f},
                           {"instances", std::move(instances)}});
    total_completion += r.completion_time;
    total_abort += r.abort_ratio;
  }

  json doc{{"policy", policy_name},
           {"batches", std::move(batches)},
           {"summary",
            json{{"batch_count", reports.size()},
                 {"mean_completion_time",
                  reports.empty() ? 0.0 : total_completion / reports.size()},
                 {"mean_abort_ratio", reports.empty() ? 0.0 : total_abort / reports.size()}}}};

  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write report: " + path.string());
  out << doc.dump(2) << '\n';
}

void save_batch_summary_csv(const std::vector<BatchReport>& reports,
                            const std::string& policy_name,
                            const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write summary: " + path.string());
  out << "batch,policy,completion_time,abort_ratio,t_success,aborted_instances\n";
  for (std::size_t b = 0; b < reports.size(); ++b) {
    const BatchReport& r = reports[b];
    const auto aborted = static_cast<long>(std::lround(r.abort_ratio * r.instances.size()));
    out << b << ',' << policy_name << ',' << format_number(r.completion_time) << ','
        << format_number(r.abort_ratio) << ',' << format_number(r.t_success) << ','
        << aborted << '\n';
  }
}

}  // namespace tofa
