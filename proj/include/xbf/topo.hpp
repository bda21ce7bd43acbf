#pragma once

#include <cmath>
#include <cstdint>
#include <deque>
#include <numeric>
#include <random>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "xbf/graph.hpp"
#include "xbf/sim.hpp"

namespace xbf {

// Barabasi-Albert preferential attachment: m isolated seed nodes, each new
// node attaches to m distinct targets drawn proportionally to degree.
// Yields exactly m*(n-m) undirected edges, emitted as directed pairs.
inline NetworkGraph gen_ba(std::size_t n, std::size_t m, std::uint64_t seed) {
  if (n <= m || m < 1) throw std::invalid_argument("gen_ba: need n > m >= 1");
  std::mt19937_64 rng(seed);

  std::vector<RawEdge> edges;
  std::vector<std::size_t> targets(m);
  std::iota(targets.begin(), targets.end(), 0);
  std::vector<std::size_t> repeated;  // degree-proportional sampling pool
  for (std::size_t s = m; s < n; ++s) {
    for (std::size_t t : targets) {
      edges.push_back({std::to_string(s), std::to_string(t), 1.0});
      edges.push_back({std::to_string(t), std::to_string(s), 1.0});
      repeated.push_back(t);
      repeated.push_back(s);
    }
    std::set<std::size_t> next;
    while (next.size() < m) {
      std::uniform_int_distribution<std::size_t> d(0, repeated.size() - 1);
      next.insert(repeated[d(rng)]);
    }
    targets.assign(next.begin(), next.end());
  }
  return build_network_graph(edges);
}

// Erdos-Renyi G(n, p); each undirected pair kept independently, largest
// component retained.
inline NetworkGraph gen_er(std::size_t n, double p, std::uint64_t seed) {
  if (p <= 0 || p > 1) throw std::invalid_argument("gen_er: need 0 < p <= 1");
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution keep(p);

  std::vector<RawEdge> edges;
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = a + 1; b < n; ++b)
      if (keep(rng)) {
        edges.push_back({std::to_string(a), std::to_string(b), 1.0});
        edges.push_back({std::to_string(b), std::to_string(a), 1.0});
      }
  if (edges.empty()) throw std::runtime_error("gen_er: generated empty graph");
  return build_network_graph(edges);
}

// Table-1 style ER probability: (1 + eps) * ln(n) / n.
inline double er_default_p(std::size_t n, double eps = 0.1) {
  return (1.0 + eps) * std::log(static_cast<double>(n)) / n;
}

enum class TrafficKind { uniform, high_demand, spatial_cluster };

struct TrafficModel {
  TrafficKind kind = TrafficKind::uniform;
  double fraction = 0.1;    // share of high-demand nodes
  double multiplier = 10.0; // their traffic weight
  std::uint64_t seed = 0;
  std::size_t max_sinks = 20;  // sink count drawn uniformly from 1..max_sinks

  void validate() const {
    if (fraction <= 0 || fraction >= 1)
      throw std::invalid_argument("TrafficModel: fraction must be in (0,1)");
    if (multiplier < 1)
      throw std::invalid_argument("TrafficModel: multiplier must be >= 1");
  }
};

// Synthesises a per-link traffic matrix by routing sampled multicast trees
// and counting packets per link. High-demand nodes are sampled as sources
// with `multiplier` weight; the spatial variant clusters them in a BFS ball.
inline std::vector<double> gen_traffic(const NetworkGraph& g,
                                       const TrafficModel& model,
                                       std::size_t trials_per_node) {
  model.validate();
  std::mt19937_64 rng(model.seed);
  std::vector<double> tau(g.links.size(), 0.0);

  std::vector<double> source_weight(g.node_count, 1.0);
  if (model.kind != TrafficKind::uniform) {
    std::size_t demand_count = std::max<std::size_t>(
        1, static_cast<std::size_t>(model.fraction * g.node_count));
    std::vector<NodeId> demand;
    if (model.kind == TrafficKind::high_demand) {
      std::vector<NodeId> order(g.node_count);
      std::iota(order.begin(), order.end(), 0);
      std::shuffle(order.begin(), order.end(), rng);
      demand.assign(order.begin(), order.begin() + demand_count);
    } else {
      // BFS ball around a random centre.
      std::uniform_int_distribution<NodeId> pick(0, static_cast<NodeId>(g.node_count - 1));
      NodeId centre = pick(rng);
      std::vector<bool> seen(g.node_count, false);
      std::deque<NodeId> q{centre};
      seen[centre] = true;
      while (!q.empty() && demand.size() < demand_count) {
        NodeId v = q.front();
        q.pop_front();
        demand.push_back(v);
        for (LinkIndex e : g.out_links[v]) {
          NodeId w = g.links[e].dst;
          if (!seen[w]) {
            seen[w] = true;
            q.push_back(w);
          }
        }
      }
    }
    for (NodeId v : demand) source_weight[v] = model.multiplier;
  }
  std::discrete_distribution<std::size_t> pick_source(source_weight.begin(),
                                                      source_weight.end());
  std::uniform_int_distribution<std::size_t> pick_sinks(1, model.max_sinks);
  std::uniform_int_distribution<NodeId> pick_node(0, static_cast<NodeId>(g.node_count - 1));

  const std::size_t samples = trials_per_node * g.node_count;
  for (std::size_t i = 0; i < samples; ++i) {
    NodeId source = static_cast<NodeId>(pick_source(rng));
    std::size_t want =
        std::min<std::size_t>(pick_sinks(rng), g.node_count - 1);
    std::set<NodeId> sinks;
    while (sinks.size() < want) {
      NodeId v = pick_node(rng);
      if (v != source) sinks.insert(v);
    }
    MulticastTree tree = build_multicast_tree(
        g, source, std::vector<NodeId>(sinks.begin(), sinks.end()));
    for (LinkIndex e : tree.links) tau[e] += 1.0;
  }
  return tau;
}

}  // namespace xbf
