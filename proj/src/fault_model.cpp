#include "tofa/fault_model.hpp"

#include "tofa/rng.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <stdexcept>

namespace tofa {

using nlohmann::json;

HeartbeatLog::HeartbeatLog(int n_nodes, int window)
    : window_(window), log_(static_cast<std::size_t>(n_nodes)) {
  if (n_nodes < 1) throw std::invalid_argument("heartbeat log needs >= 1 node");
  if (window < 1) throw std::invalid_argument("heartbeat window must be >= 1");
}

void HeartbeatLog::record(NodeId node, std::int64_t t, bool answered) {
  if (node < 0 || node >= n_nodes()) throw std::out_of_range("heartbeat node out of range");
  auto& h = log_[static_cast<std::size_t>(node)];
  h.push_back(Sample{t, answered});
  if (h.size() > static_cast<std::size_t>(window_)) {
    h.erase(h.begin(), h.end() - window_);
  }
}

const std::vector<HeartbeatLog::Sample>& HeartbeatLog::history(NodeId node) const {
  if (node < 0 || node >= n_nodes()) throw std::out_of_range("heartbeat node out of range");
  return log_[static_cast<std::size_t>(node)];
}

OutageEstimate estimate_outage(const HeartbeatLog& log, OutagePolicy policy, double alpha) {
  if (policy == OutagePolicy::ewma && (alpha <= 0.0 || alpha > 1.0)) {
    throw std::invalid_argument("ewma factor must lie in (0, 1]");
  }

  OutageEstimate est;
  est.probability = Vector::Zero(log.n_nodes());
  for (NodeId node = 0; node < log.n_nodes(); ++node) {
    const auto& h = log.history(node);
    if (h.empty()) {
      est.empty_logs.push_back(node);
      continue;
    }
    if (policy == OutagePolicy::window_avg) {
      const auto missed = std::count_if(h.begin(), h.end(),
                                        [](const auto& s) { return !s.answered; });
      est.probability[node] = static_cast<double>(missed) / log.window();
    } else {
      double p = h.front().answered ? 0.0 : 1.0;
      for (std::size_t i = 1; i < h.size(); ++i) {
        p = alpha * (h[i].answered ? 0.0 : 1.0) + (1.0 - alpha) * p;
      }
      est.probability[node] = p;
    }
  }
  return est;
}

void save_heartbeat_csv(const HeartbeatLog& log, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write heartbeat file: " + path.string());
  out << "node,t,answered\n";
  for (NodeId node = 0; node < log.n_nodes(); ++node) {
    for (const auto& s : log.history(node)) {
      out << node << ',' << s.t << ',' << (s.answered ? 1 : 0) << '\n';
    }
  }
}

HeartbeatLog load_heartbeat_csv(const std::filesystem::path& path, int n_nodes, int window) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open heartbeat file: " + path.string());
  HeartbeatLog log(n_nodes, window);
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (first && line.rfind("node,", 0) == 0) {
      first = false;
      continue;
    }
    first = false;
    NodeId node;
    std::int64_t t;
    int answered;
    if (std::sscanf(line.c_str(), "%d,%ld,%d", &node, &t, &answered) != 3) {
      throw std::runtime_error("malformed heartbeat line: " + line);
    }
    log.record(node, t, answered != 0);
  }
  return log;
}

void FaultScenario::validate() const {
  if (nodes < 1) throw std::invalid_argument("scenario needs >= 1 node");
  if (p_f < 0.0 || p_f > 1.0) throw std::invalid_argument("p_f must lie in [0, 1]");
  for (NodeId id : faulty) {
    if (id < 0 || id >= nodes) throw std::out_of_range("faulty node id outside [0, N)");
  }
  std::vector<NodeId> sorted = faulty;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw std::invalid_argument("faulty node ids must be distinct");
  }
}

std::vector<NodeId> sample_failed_set(const FaultScenario& scenario,
                                      std::uint64_t instance_index) {
  scenario.validate();
  std::vector<NodeId> sorted = scenario.faulty;
  std::sort(sorted.begin(), sorted.end());

  auto rng = seeded_rng(scenario.seed, /*stream=*/0xfa11, instance_index);
  std::vector<NodeId> failed;
  for (NodeId id : sorted) {
    if (uniform01(rng) < scenario.p_f) failed.push_back(id);
  }
  return failed;
}

Vector outage_vector(const FaultScenario& scenario) {
  scenario.validate();
  Vector p = Vector::Zero(scenario.nodes);
  for (NodeId id : scenario.faulty) p[id] = scenario.p_f;
  return p;
}

FaultScenario draw_scenario(int nodes, int n_f, double p_f, std::uint64_t seed,
                            std::uint64_t batch_index) {
  if (n_f < 0 || n_f > nodes) throw std::invalid_argument("n_f must lie in [0, nodes]");
  std::vector<NodeId> ids(static_cast<std::size_t>(nodes));
  std::iota(ids.begin(), ids.end(), 0);

  auto rng = seeded_rng(seed, /*stream=*/0x5e7, batch_index);
  for (int i = 0; i < n_f; ++i) {
    const auto j = i + static_cast<int>(uniform_below(rng, static_cast<std::uint64_t>(nodes - i)));
    std::swap(ids[static_cast<std::size_t>(i)], ids[static_cast<std::size_t>(j)]);
  }
  ids.resize(static_cast<std::size_t>(n_f));
  std::sort(ids.begin(), ids.end());

  FaultScenario s{nodes, std::move(ids), p_f, splitmix64(splitmix64(seed) ^ batch_index)};
  s.validate();
  return s;
}

FaultScenario ScenarioSpec::instantiate(std::uint64_t fallback_seed,
                                        std::uint64_t batch_index) const {
  const std::uint64_t base = seed.value_or(fallback_seed);
  if (!faulty.empty() || n_f == 0) {
    FaultScenario s{nodes, faulty, p_f, splitmix64(splitmix64(base) ^ batch_index)};
    s.validate();
    return s;
  }
  return draw_scenario(nodes, n_f, p_f, base, batch_index);
}

ScenarioSpec load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open scenario file: " + path.string());
  json j;
  in >> j;

  ScenarioSpec spec;
  spec.nodes = j.at("nodes").get<int>();
  spec.p_f = j.at("p_f").get<double>();
  if (j.contains("faulty")) spec.faulty = j.at("faulty").get<std::vector<NodeId>>();
  if (j.contains("n_f")) spec.n_f = j.at("n_f").get<int>();
  if (j.contains("seed")) spec.seed = j.at("seed").get<std::uint64_t>();
  if (!spec.faulty.empty() && spec.n_f > 0) {
    throw std::runtime_error("scenario may give either faulty ids or n_f, not both");
  }
  return spec;
}

void save_scenario(const ScenarioSpec& spec, const std::filesystem::path& path) {
  json j;
  j["nodes"] = spec.nodes;
  j["p_f"] = spec.p_f;
  if (!spec.faulty.empty() || spec.n_f == 0) j["faulty"] = spec.faulty;
  if (spec.n_f > 0) j["n_f"] = spec.n_f;
  if (spec.seed) j["seed"] = *spec.seed;

  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write scenario file: " + path.string());
  out << j.dump(2) << '\n';
}

}  // namespace tofa
