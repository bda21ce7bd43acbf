#pragma once

#include <algorithm>
#include <cstdint>
#include <future>
#include <ostream>
#include <random>
#include <set>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "xbf/graph.hpp"
#include "xbf/header.hpp"
#include "xbf/partition.hpp"
#include "xbf/sim.hpp"

namespace xbf {

enum class Scheme { xbf, classical };

struct ExperimentConfig {
  std::string topology_name = "unnamed";
  Scheme scheme = Scheme::xbf;
  std::vector<std::size_t> sink_counts = {10};
  std::size_t trials = 1000;
  std::uint64_t seed = 0;
  std::size_t jobs = 1;
  // Classical-scheme filter parameters.
  std::size_t classical_m = 256;
  std::size_t classical_k = 5;

  void validate() const {
    if (trials < 1) throw std::invalid_argument("ExperimentConfig: trials < 1");
    if (sink_counts.empty())
      throw std::invalid_argument("ExperimentConfig: no sink counts");
  }
};

struct MetricsRow {
  std::string topology;
  std::string scheme;
  std::size_t sinks = 0;
  std::size_t trial = 0;
  std::size_t hdr_bits = 0;
  std::size_t hdr_bits_compressed = 0;
  std::size_t partitions = 0;       // partitions touched by the delivery
  std::size_t poppers_on_tree = 0;  // popper switches among tree nodes
  std::size_t pops = 0;
  std::size_t false_firings = 0;
  bool loop = false;
};

inline void write_csv_header(std::ostream& out) {
  out << "topology,scheme,sinks,trial,hdr_bits,hdr_bits_compressed,"
         "partitions,poppers_on_tree,pops,false_firings,loop\n";
}

inline void write_csv_row(std::ostream& out, const MetricsRow& r) {
  out << r.topology << ',' << r.scheme << ',' << r.sinks << ',' << r.trial
      << ',' << r.hdr_bits << ',' << r.hdr_bits_compressed << ','
      << r.partitions << ',' << r.poppers_on_tree << ',' << r.pops << ','
      << r.false_firings << ',' << (r.loop ? 1 : 0) << '\n';
}

struct MetricSummary {
  double mean = 0;
  double p5 = 0;
  double p95 = 0;
};

inline MetricSummary summarize(std::vector<double> values) {
  MetricSummary s;
  if (values.empty()) return s;
  std::sort(values.begin(), values.end());
  double sum = 0;
  for (double v : values) sum += v;
  s.mean = sum / values.size();
  auto pct = [&](double q) {
    double idx = q * (values.size() - 1);
    std::size_t lo = static_cast<std::size_t>(idx);
    std::size_t hi = std::min(lo + 1, values.size() - 1);
    double frac = idx - lo;
    return values[lo] * (1 - frac) + values[hi] * frac;
  };
  s.p5 = pct(0.05);
  s.p95 = pct(0.95);
  return s;
}

namespace detail {

inline MulticastTree sample_tree(const NetworkGraph& g, std::size_t sinks,
                                 std::uint64_t trial_seed) {
  std::mt19937_64 rng(trial_seed);
  std::uniform_int_distribution<NodeId> pick(0, static_cast<NodeId>(g.node_count - 1));
  NodeId source = pick(rng);
  std::set<NodeId> chosen;
  const std::size_t want = std::min<std::size_t>(sinks, g.node_count - 1);
  while (chosen.size() < want) {
    NodeId v = pick(rng);
    if (v != source) chosen.insert(v);
  }
  return build_multicast_tree(g, source,
                              std::vector<NodeId>(chosen.begin(), chosen.end()));
}

inline std::size_t poppers_on_tree(const NetworkGraph& g, const Partitioning& p,
                                   const MulticastTree& tree) {
  std::set<NodeId> nodes{tree.source};
  for (LinkIndex e : tree.links) {
    nodes.insert(g.links[e].src);
    nodes.insert(g.links[e].dst);
  }
  std::size_t n = 0;
  for (NodeId v : nodes)
    if (p.is_popper(v)) ++n;
  return n;
}

}  // namespace detail

// Runs one (topology, partitioning) campaign. Trials use per-trial derived
// seeds, so results are deterministic per seed and safe to parallelise.
inline std::vector<MetricsRow> run_experiment(const NetworkGraph& g,
                                              const Partitioning& p,
                                              const ExperimentConfig& cfg) {
  cfg.validate();
  const std::size_t ttl = 4 * std::max<std::size_t>(1, network_diameter(g));
  LinkIdAssignment classical_ids;
  if (cfg.scheme == Scheme::classical)
    classical_ids = gen_random_ids(g.links.size(), cfg.classical_m,
                                   cfg.classical_k, cfg.seed);

  std::vector<MetricsRow> rows(cfg.sink_counts.size() * cfg.trials);

  auto run_one = [&](std::size_t si, std::size_t trial) {
    const std::size_t sinks = cfg.sink_counts[si];
    const std::uint64_t trial_seed =
        cfg.seed ^ (0x9E3779B97F4A7C15ull * (si * cfg.trials + trial + 1));
    MulticastTree tree = detail::sample_tree(g, sinks, trial_seed);

    MetricsRow r;
    r.topology = cfg.topology_name;
    r.sinks = sinks;
    r.trial = trial;
    if (cfg.scheme == Scheme::xbf) {
      r.scheme = "xbf";
      XbfHeader h = build_header(g, tree, p);
      DeliveryTrace t = deliver_xbf(g, p, tree);
      r.hdr_bits = h.overhead_bits();
      r.hdr_bits_compressed = compressed_overhead_bits(h);
      r.partitions = t.partitions_touched.size();
      r.poppers_on_tree = detail::poppers_on_tree(g, p, tree);
      r.pops = t.pops.size();
      r.false_firings = t.false_firings.size();
      r.loop = t.loop_detected;
    } else {
      r.scheme = "classical";
      std::vector<BitFilter> tree_ids;
      for (LinkIndex e : tree.links) tree_ids.push_back(classical_ids.ids[e]);
      BitFilter f = bf_or(tree_ids, cfg.classical_m);
      DeliveryTrace t = deliver_classical(g, classical_ids, f, tree.source, ttl,
                                          &tree.links, &tree.sinks);
      r.hdr_bits = cfg.classical_m;
      r.hdr_bits_compressed = cfg.classical_m;
      r.partitions = 1;
      r.poppers_on_tree = 0;
      r.pops = 0;
      r.false_firings = t.false_firings.size();
      r.loop = t.loop_detected;
    }
    rows[si * cfg.trials + trial] = std::move(r);
  };

  if (cfg.jobs <= 1) {
    for (std::size_t si = 0; si < cfg.sink_counts.size(); ++si)
      for (std::size_t trial = 0; trial < cfg.trials; ++trial)
        run_one(si, trial);
  } else {
    const std::size_t total = cfg.sink_counts.size() * cfg.trials;
    std::vector<std::future<void>> futures;
    for (std::size_t j = 0; j < cfg.jobs; ++j) {
      futures.push_back(std::async(std::launch::async, [&, j] {
        for (std::size_t i = j; i < total; i += cfg.jobs)
          run_one(i / cfg.trials, i % cfg.trials);
      }));
    }
    for (auto& f : futures) f.get();
  }
  return rows;
}

}  // namespace xbf
