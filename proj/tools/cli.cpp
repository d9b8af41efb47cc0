#include "cli.hpp"

#include "tofa/batch_sim.hpp"
#include "tofa/fault_model.hpp"
#include "tofa/placement.hpp"
#include "tofa/rng.hpp"
#include "tofa/topology_graph.hpp"
#include "tofa/torus.hpp"
#include "tofa/trace_io.hpp"
#include "tofa/traffic.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace tofa::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Options {
  std::string config;
  std::string topo;
  std::string topo_file;
  std::string trace;
  std::string synthetic;
  int procs = 0;
  double bytes = 1024.0;
  std::string policy;  // single name, or comma list for sweep
  std::string weights = "volume";
  double penalty_c = 1.0;
  std::string faults;
  int instances = 100;
  int batches = 1;
  std::uint64_t seed = 0;
  std::string out = ".";
  double flops = 6e9;
  std::string arrangements;
  bool remap_each_instance = false;
  int max_attempts = 1000;
  double threshold = 0.0;
  double node_gflops = 6.0;
  double link_bandwidth_gbps = 10.0;
  double link_latency_us = 1.0;
};

json options_to_json(const std::string& command, const Options& o) {
  return json{{"command", command},
              {"topo", o.topo},
              {"topo_file", o.topo_file},
              {"trace", o.trace},
              {"synthetic", o.synthetic},
              {"procs", o.procs},
              {"bytes", o.bytes},
              {"policy", o.policy},
              {"weights", o.weights},
              {"penalty_c", o.penalty_c},
              {"faults", o.faults},
              {"instances", o.instances},
              {"batches", o.batches},
              {"seed", o.seed},
              {"out", o.out},
              {"flops", o.flops},
              {"arrangements", o.arrangements},
              {"remap_each_instance", o.remap_each_instance},
              {"max_attempts", o.max_attempts},
              {"threshold", o.threshold},
              {"node_gflops", o.node_gflops},
              {"link_bandwidth_gbps", o.link_bandwidth_gbps},
              {"link_latency_us", o.link_latency_us}};
}

void options_from_json(const json& j, Options& o, bool& seed_in_config) {
  o.topo = j.value("topo", o.topo);
  o.topo_file = j.value("topo_file", o.topo_file);
  o.trace = j.value("trace", o.trace);
  o.synthetic = j.value("synthetic", o.synthetic);
  o.procs = j.value("procs", o.procs);
  o.bytes = j.value("bytes", o.bytes);
  o.policy = j.value("policy", o.policy);
  o.weights = j.value("weights", o.weights);
  o.penalty_c = j.value("penalty_c", o.penalty_c);
  o.faults = j.value("faults", o.faults);
  o.instances = j.value("instances", o.instances);
  o.batches = j.value("batches", o.batches);
  if (j.contains("seed")) {
    o.seed = j.at("seed").get<std::uint64_t>();
    seed_in_config = true;
  }
  o.out = j.value("out", o.out);
  o.flops = j.value("flops", o.flops);
  o.arrangements = j.value("arrangements", o.arrangements);
  o.remap_each_instance = j.value("remap_each_instance", o.remap_each_instance);
  o.max_attempts = j.value("max_attempts", o.max_attempts);
  o.threshold = j.value("threshold", o.threshold);
  o.node_gflops = j.value("node_gflops", o.node_gflops);
  o.link_bandwidth_gbps = j.value("link_bandwidth_gbps", o.link_bandwidth_gbps);
  o.link_latency_us = j.value("link_latency_us", o.link_latency_us);
}

TorusDims parse_dims(const std::string& spec) {
  TorusDims dims;
  char sep1 = 0, sep2 = 0;
  std::istringstream in(spec);
  if (!(in >> dims.x >> sep1 >> dims.y >> sep2 >> dims.z) || sep1 != 'x' || sep2 != 'x' ||
      !in.eof()) {
    throw std::invalid_argument("bad topology spec '" + spec + "', expected DXxDYxDZ");
  }
  return dims;
}

TorusTopology build_topology(const Options& o) {
  if (!o.topo_file.empty() && !o.topo.empty()) {
    throw std::invalid_argument("give either --topo or --topo-file, not both");
  }
  if (!o.topo_file.empty()) return load_topology_file(o.topo_file);
  if (!o.topo.empty()) return build_torus(parse_dims(o.topo));
  throw std::invalid_argument("a topology is required (--topo DXxDYxDZ or --topo-file)");
}

TrafficMatrix build_traffic(const Options& o) {
  if (!o.trace.empty() && !o.synthetic.empty()) {
    throw std::invalid_argument("give either --trace or --synthetic, not both");
  }
  if (!o.trace.empty()) return ingest_trace(o.trace);
  if (o.synthetic.empty()) {
    throw std::invalid_argument("a traffic source is required (--trace or --synthetic)");
  }

  const auto colon = o.synthetic.find(':');
  const std::string kind = o.synthetic.substr(0, colon);
  const std::string arg =
      colon == std::string::npos ? std::string() : o.synthetic.substr(colon + 1);
  if (o.procs < 2) {
    throw std::invalid_argument("--synthetic requires --procs >= 2");
  }
  if (kind == "band") return synthetic_band(o.procs, std::stoi(arg), o.bytes);
  if (kind == "block") return synthetic_block(o.procs, std::stoi(arg), o.bytes);
  if (kind == "irregular") {
    return synthetic_irregular(o.procs, std::stod(arg), o.seed, o.bytes);
  }
  throw std::invalid_argument("unknown synthetic pattern '" + kind +
                              "', expected band:k, block:b or irregular:density");
}

ScenarioSpec fault_spec(const Options& o, int n_nodes) {
  if (o.faults.empty()) {
    ScenarioSpec none;
    none.nodes = n_nodes;
    none.p_f = 0.0;
    return none;
  }
  ScenarioSpec spec = load_scenario(o.faults);
  if (spec.nodes != n_nodes) {
    throw std::invalid_argument("fault scenario is for " + std::to_string(spec.nodes) +
                                " nodes but the topology has " + std::to_string(n_nodes));
  }
  return spec;
}

Platform platform_of(const Options& o) {
  return Platform{o.node_gflops, o.link_bandwidth_gbps, o.link_latency_us};
}

fs::path prepare_out_dir(const Options& o) {
  fs::path dir(o.out);
  fs::create_directories(dir);
  return dir;
}

void write_effective_config(const std::string& command, const Options& o,
                            const fs::path& dir) {
  std::ofstream out(dir / "effective_config.json");
  if (!out) throw std::runtime_error("cannot write effective config");
  out << options_to_json(command, o).dump(2) << '\n';
}

std::vector<std::string> split_list(const std::string& csv) {
  std::vector<std::string> items;
  std::istringstream in(csv);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (!item.empty()) items.push_back(item);
  }
  return items;
}

// ---- subcommands ----------------------------------------------------------

int cmd_ingest(const Options& o) {
  if (o.trace.empty()) throw std::invalid_argument("ingest requires --trace");
  const TrafficMatrix m = ingest_trace(o.trace);
  const fs::path dir = prepare_out_dir(o);

  save_matrix_csv(m.vol(), dir / "gv.csv");
  save_matrix_csv(m.msg(), dir / "gm.csv");
  emit_heatmap(m, dir / "heatmap.pgm", dir / "heatmap.csv");
  write_effective_config("ingest", o, dir);

  std::cout << "ingested " << o.trace << ": " << m.n() << " processes, "
            << format_number(m.total_volume() / 2.0) << " bytes, "
            << format_number(m.total_messages() / 2.0) << " messages\n"
            << "wrote " << (dir / "gv.csv").string() << ", gm.csv, heatmap.pgm\n";
  return 0;
}

int cmd_map(const Options& o) {
  const TorusTopology topo = build_topology(o);
  const TrafficMatrix traffic = build_traffic(o);
  const ScenarioSpec spec = fault_spec(o, topo.node_count());
  const Vector outage = outage_vector(spec.instantiate(o.seed, 0));

  const PlacementPolicy policy = policy_from_string(o.policy);
  const EdgeWeightKind weights =
      o.weights == "messages" ? EdgeWeightKind::messages : EdgeWeightKind::volume;

  const Mapping mapping =
      place(policy, traffic, weights, topo, outage, o.penalty_c, o.threshold, o.seed);
  const MappingQuality q = mapping_quality(mapping, traffic, topo);
  const JobSpec job{traffic, o.flops, platform_of(o)};
  const double runtime = estimate_runtime(job, mapping, topo);

  const fs::path dir = prepare_out_dir(o);
  save_mapping_csv(mapping, dir / "mapping.csv");
  {
    std::ofstream out(dir / "quality.json");
    if (!out) throw std::runtime_error("cannot write quality report");
    out << json{{"policy", o.policy},
                {"n_procs", traffic.n()},
                {"hop_bytes", q.hop_bytes},
                {"dilation", q.dilation},
                {"congestion", q.congestion},
                {"estimated_runtime_s", runtime}}
               .dump(2)
        << '\n';
  }
  write_effective_config("map", o, dir);

  std::cout << "policy " << o.policy << ": hop_bytes " << format_number(q.hop_bytes)
            << ", dilation " << q.dilation << ", congestion " << format_number(q.congestion)
            << ", est. runtime " << runtime << " s\n"
            << "wrote " << (dir / "mapping.csv").string() << "\n";
  return 0;
}

int cmd_simulate(const Options& o) {
  if (o.batches < 1) throw std::invalid_argument("--batches must be >= 1");
  if (o.instances < 1) throw std::invalid_argument("--instances must be >= 1");
  const TorusTopology topo = build_topology(o);
  const TrafficMatrix traffic = build_traffic(o);
  const ScenarioSpec spec = fault_spec(o, topo.node_count());
  const JobSpec job{traffic, o.flops, platform_of(o)};

  BatchConfig config;
  config.instances = o.instances;
  config.policy = policy_from_string(o.policy);
  config.weights = o.weights == "messages" ? EdgeWeightKind::messages : EdgeWeightKind::volume;
  config.penalty_c = o.penalty_c;
  config.threshold = o.threshold;
  config.remap_each_instance = o.remap_each_instance;
  config.max_attempts = o.max_attempts;

  std::vector<BatchReport> reports;
  reports.reserve(static_cast<std::size_t>(o.batches));
  for (int b = 0; b < o.batches; ++b) {
    config.scenario = spec.instantiate(o.seed, static_cast<std::uint64_t>(b));
    config.placement_seed = splitmix64(splitmix64(o.seed) ^ 0x9a9ULL) +
                            static_cast<std::uint64_t>(b);
    reports.push_back(simulate_batch(job, config, topo));
  }

  const fs::path dir = prepare_out_dir(o);
  save_batch_reports_json(reports, o.policy, dir / "batch_report.json");
  save_batch_summary_csv(reports, o.policy, dir / "batch_summary.csv");
  write_effective_config("simulate", o, dir);

  double mean_completion = 0.0, mean_abort = 0.0;
  for (std::size_t b = 0; b < reports.size(); ++b) {
    std::cout << "batch " << b << ": completion " << reports[b].completion_time
              << " s, abort ratio " << reports[b].abort_ratio << "\n";
    mean_completion += reports[b].completion_time;
    mean_abort += reports[b].abort_ratio;
  }
  std::cout << "policy " << o.policy << " mean over " << reports.size()
            << " batches: completion " << mean_completion / reports.size()
            << " s, abort ratio " << mean_abort / reports.size() << "\n";
  return 0;
}

int cmd_sweep(const Options& o) {
  if (o.arrangements.empty()) {
    throw std::invalid_argument("sweep requires --arrangements D1xD2xD3,...");
  }
  const std::vector<std::string> arrangements = split_list(o.arrangements);
  const std::vector<std::string> policies = split_list(o.policy);
  if (policies.empty()) throw std::invalid_argument("sweep requires --policy");

  int node_count = -1;
  for (const std::string& a : arrangements) {
    const int count = parse_dims(a).count();
    if (node_count < 0) node_count = count;
    if (count != node_count) {
      throw std::invalid_argument("arrangements must share one node count; " + a +
                                  " breaks it");
    }
  }

  const TrafficMatrix traffic = build_traffic(o);
  const fs::path dir = prepare_out_dir(o);
  std::ofstream csv(dir / "sweep.csv");
  if (!csv) throw std::runtime_error("cannot write sweep table");
  csv << "arrangement,policy,hop_bytes,dilation,congestion,estimated_runtime_s\n";
  std::cout << "arrangement,policy,hop_bytes,dilation,congestion,estimated_runtime_s\n";

  for (const std::string& a : arrangements) {
    const TorusTopology topo = build_torus(parse_dims(a));
    const ScenarioSpec spec = fault_spec(o, topo.node_count());
    const Vector outage = outage_vector(spec.instantiate(o.seed, 0));
    const JobSpec job{traffic, o.flops, platform_of(o)};
    const EdgeWeightKind weights =
        o.weights == "messages" ? EdgeWeightKind::messages : EdgeWeightKind::volume;

    for (const std::string& p : policies) {
      const Mapping mapping = place(policy_from_string(p), traffic, weights, topo, outage,
                                    o.penalty_c, o.threshold, o.seed);
      const MappingQuality q = mapping_quality(mapping, traffic, topo);
      const double runtime = estimate_runtime(job, mapping, topo);
      std::ostringstream row;
      row << a << ',' << p << ',' << format_number(q.hop_bytes) << ',' << q.dilation << ','
          << format_number(q.congestion) << ',' << format_number(runtime);
      csv << row.str() << '\n';
      std::cout << row.str() << '\n';
    }
  }
  write_effective_config("sweep", o, dir);
  return 0;
}

}  // namespace

int run(const std::vector<std::string>& args) {
  Options opts;
  bool seed_in_config = false;

  // The config file seeds the defaults; explicit flags override it below.
  for (std::size_t i = 0; i < args.size(); ++i) {
    std::string value;
    if (args[i] == "--config" && i + 1 < args.size()) {
      value = args[i + 1];
    } else if (args[i].rfind("--config=", 0) == 0) {
      value = args[i].substr(9);
    } else {
      continue;
    }
    std::ifstream in(value);
    if (!in) {
      std::cerr << "error: cannot open config file " << value << "\n";
      return 1;
    }
    json j;
    try {
      in >> j;
      options_from_json(j, opts, seed_in_config);
    } catch (const std::exception& e) {
      std::cerr << "error: bad config file " << value << ": " << e.what() << "\n";
      return 1;
    }
  }

  CLI::App app{"topology- and fault-aware process placement toolkit"};
  app.require_subcommand(1);

  bool seed_given = false;
  const auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", opts.config, "JSON config file; flags override it");
    sub->add_option("--topo", opts.topo, "torus dimensions DXxDYxDZ");
    sub->add_option("--topo-file", opts.topo_file, "topology file (id x y z per line)");
    sub->add_option("--trace", opts.trace, "JSON-lines trace file");
    sub->add_option("--synthetic", opts.synthetic,
                    "synthetic pattern: band:k, block:b or irregular:density");
    sub->add_option("--procs", opts.procs, "process count for synthetic patterns");
    sub->add_option("--bytes", opts.bytes, "bytes per synthetic pair");
    sub->add_option("--policy", opts.policy,
                    "sequential|random|greedy|rb|tofa (comma list for sweep)");
    sub->add_option("--weights", opts.weights, "edge weights: volume|messages")
        ->check(CLI::IsMember({"volume", "messages"}));
    sub->add_option("--penalty-c", opts.penalty_c, "hop cost constant c");
    sub->add_option("--faults", opts.faults, "fault scenario JSON file");
    sub->add_option("--instances", opts.instances, "instances per batch");
    sub->add_option("--batches", opts.batches, "number of batches");
    auto* seed_opt = sub->add_option("--seed", opts.seed, "global seed");
    sub->add_option("--out", opts.out, "output directory");
    sub->add_option("--flops", opts.flops, "compute flops per process");
    sub->add_option("--arrangements", opts.arrangements,
                    "comma list of torus arrangements for sweep");
    sub->add_flag("--remap-each-instance", opts.remap_each_instance,
                  "recompute the placement before every instance");
    sub->add_option("--max-attempts", opts.max_attempts, "restart cap per instance");
    sub->add_option("--threshold", opts.threshold,
                    "outage probability tolerated in the fault-free window");
    sub->add_option("--node-gflops", opts.node_gflops, "node compute capability");
    sub->add_option("--link-bandwidth-gbps", opts.link_bandwidth_gbps, "link bandwidth");
    sub->add_option("--link-latency-us", opts.link_latency_us, "link latency");
    sub->parse_complete_callback([seed_opt, &seed_given] {
      if (seed_opt->count() > 0) seed_given = true;
    });
  };

  CLI::App* ingest = app.add_subcommand("ingest", "trace -> matrices + heatmap");
  CLI::App* map_cmd = app.add_subcommand("map", "derive a process-to-node mapping");
  CLI::App* simulate = app.add_subcommand("simulate", "Monte-Carlo batch simulation");
  CLI::App* sweep = app.add_subcommand("sweep", "mapping quality across arrangements");
  for (CLI::App* sub : {ingest, map_cmd, simulate, sweep}) add_common(sub);

  std::vector<const char*> argv;
  argv.push_back("tofa");
  for (const std::string& a : args) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  if (!seed_given && !seed_in_config) {
    if (const char* env = std::getenv("TOFA_SEED")) {
      try {
        opts.seed = std::stoull(env);
      } catch (const std::exception&) {
        std::cerr << "error: TOFA_SEED is not an integer\n";
        return 1;
      }
    }
  }
  if (opts.policy.empty()) opts.policy = "tofa";

  try {
    if (ingest->parsed()) return cmd_ingest(opts);
    if (map_cmd->parsed()) return cmd_map(opts);
    if (simulate->parsed()) return cmd_simulate(opts);
    if (sweep->parsed()) return cmd_sweep(opts);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  std::cerr << "error: no subcommand\n";
  return 1;
}

}  // namespace tofa::cli
