#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "xbf/experiment.hpp"
#include "xbf/json_io.hpp"
#include "xbf/lps.hpp"
#include "xbf/topo.hpp"

using namespace xbf;
using nlohmann::json;

namespace {

int log_level() {
  const char* env = std::getenv("XBF_LOG");
  if (!env) return 1;
  std::string v(env);
  if (v == "quiet" || v == "0") return 0;
  if (v == "debug" || v == "2") return 2;
  return 1;
}

void log_info(const std::string& msg) {
  if (log_level() >= 1) std::cerr << "xbf: " << msg << "\n";
}

void log_debug(const std::string& msg) {
  if (log_level() >= 2) std::cerr << "xbf[debug]: " << msg << "\n";
}

// Every artifact gets a sidecar recording how to reproduce it.
void write_provenance(const std::string& out_path, const std::string& command,
                      const json& params) {
  json p;
  p["command"] = command;
  p["params"] = params;
  p["artifact"] = out_path;
  std::ofstream f(out_path + ".provenance.json");
  f << p.dump(2) << "\n";
}

// Tracks written files so a failing command leaves no partial outputs.
struct OutputGuard {
  std::vector<std::string> paths;
  bool committed = false;
  ~OutputGuard() {
    if (committed) return;
    for (const auto& p : paths) {
      std::error_code ec;
      std::filesystem::remove(p, ec);
      std::filesystem::remove(p + ".provenance.json", ec);
    }
  }
};

struct TopoOptions {
  std::vector<std::size_t> ba;     // n m
  std::vector<double> er;          // n p
  std::string input;
  bool symmetrize = false;
  std::uint64_t seed = 0;

  void attach(CLI::App* cmd) {
    cmd->add_option("--seed", seed, "master random seed")
        ->capture_default_str();
    cmd->add_option("--ba", ba, "preferential-attachment graph: n m")
        ->expected(2);
    cmd->add_option("--er", er, "random graph: n p")->expected(2);
    cmd->add_option("--input", input, "edge-list file (src dst traffic)");
    cmd->add_flag("--symmetrize", symmetrize,
                  "add the reverse of every listed edge");
  }

  NetworkGraph build() const {
    int sources = (!ba.empty()) + (!er.empty()) + (!input.empty());
    if (sources != 1)
      throw CLI::ValidationError(
          "topology", "give exactly one of --ba, --er, --input");
    if (!ba.empty()) return gen_ba(ba[0], ba[1], seed);
    if (!er.empty())
      return gen_er(static_cast<std::size_t>(er[0]), er[1], seed);
    return load_edge_list(input, symmetrize);
  }

  json describe() const {
    json j;
    if (!ba.empty()) j["ba"] = ba;
    if (!er.empty()) j["er"] = er;
    if (!input.empty()) j["input"] = input;
    j["symmetrize"] = symmetrize;
    j["seed"] = seed;
    return j;
  }
};

struct PartitionOptions {
  std::string partitioner = "jigsaw";
  std::size_t cap = 256;
  double nu = 1.1;
  bool traffic_aware = false;
  std::string traffic = "betweenness";  // betweenness|uniform|high_demand|spatial
  std::size_t traffic_trials = 20;
  std::string partition_file;

  void attach(CLI::App* cmd, bool allow_file) {
    cmd->add_option("--partitioner", partitioner, "jigsaw or powergraph")
        ->check(CLI::IsMember({"jigsaw", "powergraph"}));
    cmd->add_option("--cap", cap, "max links per partition");
    cmd->add_option("--nu", nu, "partition count multiplier");
    cmd->add_flag("--traffic-aware", traffic_aware,
                  "weight links by traffic when partitioning");
    cmd->add_option("--traffic", traffic,
                    "link-weight source for --traffic-aware")
        ->check(CLI::IsMember(
            {"betweenness", "uniform", "high_demand", "spatial"}));
    cmd->add_option("--traffic-trials", traffic_trials,
                    "sampled trees per node for synthetic traffic");
    if (allow_file)
      cmd->add_option("--partition-file", partition_file,
                      "reuse a partitioning JSON instead of partitioning");
  }

  std::vector<double> make_weights(const NetworkGraph& g,
                                   std::uint64_t seed) const {
    if (!traffic_aware) return {};
    if (traffic == "betweenness") return betweenness_weights(g);
    TrafficModel tm{.seed = seed};
    if (traffic == "high_demand") tm.kind = TrafficKind::high_demand;
    else if (traffic == "spatial") tm.kind = TrafficKind::spatial_cluster;
    else tm.kind = TrafficKind::uniform;
    return gen_traffic(g, tm, traffic_trials);
  }

  Partitioning run(const NetworkGraph& g, std::uint64_t seed) const {
    if (!partition_file.empty()) {
      std::ifstream f(partition_file);
      if (!f) throw std::runtime_error("cannot open " + partition_file);
      json j;
      f >> j;
      return partitioning_from_json(j, g);
    }
    if (partitioner == "powergraph") return powergraph_partition(g, cap);
    PartitionConfig cfg{.max_partition_size = cap, .imbalance = nu,
                        .seed = seed, .traffic_aware = traffic_aware};
    return jigsaw(g, make_weights(g, seed), cfg);
  }

  json describe() const {
    return json{{"partitioner", partitioner}, {"cap", cap}, {"nu", nu},
                {"traffic_aware", traffic_aware}, {"traffic", traffic},
                {"partition_file", partition_file}};
  }
};

json quality_report(const NetworkGraph& g, const Partitioning& p) {
  auto cg = build_connectivity_graph(g);
  for (auto& v : cg.vertices) v.weight = 1.0;
  auto q = quality(g, p, cg);
  std::vector<std::size_t> fill;
  for (const auto& links : p.partition_links) fill.push_back(links.size());
  return json{{"partitions", p.partition_count},
              {"poppers", p.popper_nodes.size()},
              {"totalv", q.totalv},
              {"max_fill", q.max_fill},
              {"min_fill", q.min_fill},
              {"fill", fill}};
}

int cmd_gen(const TopoOptions& topo, const std::string& out) {
  OutputGuard guard;
  auto g = topo.build();
  guard.paths.push_back(out);
  std::ofstream f(out);
  if (!f) throw std::runtime_error("cannot write " + out);
  write_edge_list(f, g);
  f.close();
  write_provenance(out, "gen", topo.describe());
  log_info("wrote " + std::to_string(g.links.size()) + " links to " + out);
  guard.committed = true;
  return 0;
}

int cmd_partition(const TopoOptions& topo, const PartitionOptions& part,
                  const std::string& out) {
  OutputGuard guard;
  auto g = topo.build();
  log_debug("graph: " + std::to_string(g.node_count) + " nodes, " +
            std::to_string(g.links.size()) + " links");
  auto p = part.run(g, topo.seed);
  json j = partitioning_to_json(p);
  j["quality"] = quality_report(g, p);
  if (out.empty()) {
    std::cout << j.dump(2) << "\n";
  } else {
    guard.paths.push_back(out);
    std::ofstream f(out);
    if (!f) throw std::runtime_error("cannot write " + out);
    f << j.dump(2) << "\n";
    json params = topo.describe();
    params["partition"] = part.describe();
    write_provenance(out, "partition", params);
    log_info("partitioned into " + std::to_string(p.partition_count) +
             " partitions, " + std::to_string(p.popper_nodes.size()) +
             " poppers -> " + out);
  }
  guard.committed = true;
  return 0;
}

int cmd_headers(const TopoOptions& topo, const PartitionOptions& part,
                NodeId source, const std::vector<NodeId>& sinks,
                const std::string& out) {
  OutputGuard guard;
  auto g = topo.build();
  auto p = part.run(g, topo.seed);
  auto tree = build_multicast_tree(g, source, sinks);
  auto h = build_header(g, tree, p);
  auto bytes = serialize(h);

  std::ostringstream hex;
  for (std::size_t i = 0; i < bytes.size(); ++i) {
    char b[4];
    std::snprintf(b, sizeof b, "%02x", bytes[i]);
    hex << b << ((i + 1) % 16 == 0 ? "\n" : " ");
  }
  json j;
  j["tree_links"] = tree.links;
  j["entry_partition"] = h.entry_partition;
  j["partitions_carried"] = h.zbf.size();
  j["overhead_bits"] = h.overhead_bits();
  j["compressed_overhead_bits"] = compressed_overhead_bits(h);
  j["wire_bytes"] = bytes.size();
  j["hex"] = hex.str();
  if (out.empty()) {
    std::cout << j.dump(2) << "\n";
  } else {
    guard.paths.push_back(out);
    std::ofstream f(out);
    if (!f) throw std::runtime_error("cannot write " + out);
    f << j.dump(2) << "\n";
    json params = topo.describe();
    params["partition"] = part.describe();
    params["source"] = source;
    params["sinks"] = sinks;
    write_provenance(out, "headers", params);
  }
  guard.committed = true;
  return 0;
}

int cmd_simulate(const TopoOptions& topo, const PartitionOptions& part,
                 ExperimentConfig cfg, const std::string& out) {
  OutputGuard guard;
  auto g = topo.build();
  auto p = part.run(g, topo.seed);
  cfg.seed = topo.seed;
  auto rows = run_experiment(g, p, cfg);

  const std::string csv_path = out + ".csv";
  const std::string summary_path = out + ".summary.json";
  guard.paths = {csv_path, summary_path};
  std::ofstream csv(csv_path);
  if (!csv) throw std::runtime_error("cannot write " + csv_path);
  write_csv_header(csv);
  for (const auto& r : rows) write_csv_row(csv, r);
  std::ofstream summary(summary_path);
  summary << summary_to_json(rows).dump(2) << "\n";

  json params = topo.describe();
  params["partition"] = part.describe();
  params["scheme"] = cfg.scheme == Scheme::xbf ? "xbf" : "classical";
  params["sinks"] = cfg.sink_counts;
  params["trials"] = cfg.trials;
  params["classical_m"] = cfg.classical_m;
  params["classical_k"] = cfg.classical_k;
  write_provenance(csv_path, "simulate", params);
  write_provenance(summary_path, "simulate", params);
  log_info("wrote " + std::to_string(rows.size()) + " rows to " + csv_path);
  guard.committed = true;
  return 0;
}

int cmd_lps(const TopoOptions& topo, const std::vector<std::size_t>& sinks,
            const std::vector<double>& ps, std::size_t trials,
            const std::string& out) {
  OutputGuard guard;
  auto g = topo.build();
  std::ostringstream table;
  table << "p,sinks,min_filter_bits\n";
  for (double p : ps)
    for (std::size_t s : sinks) {
      auto m = min_filter_length(g, s, p, trials, topo.seed);
      table << p << ',' << s << ',' << m << '\n';
      log_debug("L_" + std::to_string(p) + "(" + std::to_string(s) + ") = " +
                std::to_string(m));
    }
  if (out.empty()) {
    std::cout << table.str();
  } else {
    guard.paths.push_back(out);
    std::ofstream f(out);
    if (!f) throw std::runtime_error("cannot write " + out);
    f << table.str();
    json params = topo.describe();
    params["sinks"] = sinks;
    params["p"] = ps;
    params["trials"] = trials;
    write_provenance(out, "lps", params);
  }
  guard.committed = true;
  return 0;
}

int cmd_compare(const TopoOptions& topo, const PartitionOptions& part,
                const std::string& out) {
  OutputGuard guard;
  auto g = topo.build();
  PartitionOptions jig = part, pg = part;
  jig.partitioner = "jigsaw";
  pg.partitioner = "powergraph";
  json j;
  j["jigsaw"] = quality_report(g, jig.run(g, topo.seed));
  j["powergraph"] = quality_report(g, pg.run(g, topo.seed));
  if (out.empty()) {
    std::cout << j.dump(2) << "\n";
  } else {
    guard.paths.push_back(out);
    std::ofstream f(out);
    if (!f) throw std::runtime_error("cannot write " + out);
    f << j.dump(2) << "\n";
    json params = topo.describe();
    params["partition"] = part.describe();
    write_provenance(out, "compare", params);
  }
  guard.committed = true;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"extensible Bloom-filter source routing toolkit"};
  app.require_subcommand(1);
  app.set_config("--config", "", "run descriptor file (TOML-style)");

  TopoOptions topo;
  PartitionOptions part;
  std::string out;

  auto* gen = app.add_subcommand("gen", "generate a topology edge list");
  topo.attach(gen);
  gen->add_option("--out", out, "output edge-list path")->required();

  auto* partition =
      app.add_subcommand("partition", "partition a topology's links");
  topo.attach(partition);
  part.attach(partition, true);
  partition->add_option("--out", out, "output partitioning JSON path");

  NodeId source = 0;
  std::vector<NodeId> sink_ids;
  auto* headers =
      app.add_subcommand("headers", "build and inspect a packet header");
  topo.attach(headers);
  part.attach(headers, true);
  headers->add_option("--source", source, "tree source node id")->required();
  headers->add_option("--sink-ids", sink_ids, "tree sink node ids")
      ->required();
  headers->add_option("--out", out, "output JSON path");

  ExperimentConfig cfg;
  std::string scheme = "xbf";
  auto* simulate =
      app.add_subcommand("simulate", "run a forwarding measurement campaign");
  topo.attach(simulate);
  part.attach(simulate, true);
  simulate->add_option("--scheme", scheme, "xbf or classical")
      ->check(CLI::IsMember({"xbf", "classical"}));
  simulate->add_option("--sinks", cfg.sink_counts, "sink counts to sweep");
  simulate->add_option("--trials", cfg.trials, "trees per sink count");
  simulate->add_option("--jobs", cfg.jobs, "worker threads");
  simulate->add_option("--classical-m", cfg.classical_m,
                       "classical filter bits");
  simulate->add_option("--classical-k", cfg.classical_k,
                       "classical bits per link id");
  simulate->add_option("--topology-name", cfg.topology_name,
                       "label for the CSV rows");
  simulate->add_option("--out", out, "output path prefix")->required();

  std::vector<std::size_t> lps_sinks{1};
  std::vector<double> lps_ps{0.95};
  std::size_t lps_trials = 500;
  auto* lps =
      app.add_subcommand("lps", "minimum filter length for false-positive-free trees");
  topo.attach(lps);
  lps->add_option("--sinks", lps_sinks, "sink counts");
  lps->add_option("--p", lps_ps, "required clean-tree fractions");
  lps->add_option("--trials", lps_trials, "sampled trees per evaluation");
  lps->add_option("--out", out, "output CSV path");

  auto* compare =
      app.add_subcommand("compare", "jigsaw vs powergraph quality report");
  topo.attach(compare);
  part.attach(compare, false);
  compare->add_option("--out", out, "output JSON path");

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) return cmd_gen(topo, out);
    if (partition->parsed()) return cmd_partition(topo, part, out);
    if (headers->parsed())
      return cmd_headers(topo, part, source, sink_ids, out);
    if (simulate->parsed()) {
      cfg.scheme = scheme == "classical" ? Scheme::classical : Scheme::xbf;
      return cmd_simulate(topo, part, cfg, out);
    }
    if (lps->parsed()) return cmd_lps(topo, lps_sinks, lps_ps, lps_trials, out);
    if (compare->parsed()) return cmd_compare(topo, part, out);
  } catch (const std::exception& e) {
    std::cerr << "xbf: error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
