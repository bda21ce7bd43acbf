#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <set>
#include <stdexcept>
#include <vector>

#include "xbf/bitfilter.hpp"
#include "xbf/graph.hpp"
#include "xbf/sim.hpp"

namespace xbf {

using KRule = std::function<std::size_t(std::size_t m, std::size_t tree_links)>;

// Per-tree optimal k: round(m / n * ln 2), clamped to [1, m].
inline std::size_t default_k_rule(std::size_t m, std::size_t tree_links) {
  double k = std::round(static_cast<double>(m) / tree_links * std::log(2.0));
  return std::max<std::size_t>(1, std::min<std::size_t>(m, static_cast<std::size_t>(k)));
}

constexpr std::size_t kMaxFilterLength = std::size_t{1} << 20;

namespace detail {

inline std::vector<MulticastTree> sample_trees(const NetworkGraph& g,
                                               std::size_t sinks,
                                               std::size_t trials,
                                               std::uint64_t seed) {
  std::vector<MulticastTree> trees;
  trees.reserve(trials);
  for (std::size_t t = 0; t < trials; ++t) {
    std::mt19937_64 rng(seed + t);  // per-trial derived seed
    std::uniform_int_distribution<NodeId> pick(0, static_cast<NodeId>(g.node_count - 1));
    NodeId source = pick(rng);
    std::set<NodeId> chosen;
    const std::size_t want = std::min<std::size_t>(sinks, g.node_count - 1);
    while (chosen.size() < want) {
      NodeId v = pick(rng);
      if (v != source) chosen.insert(v);
    }
    trees.push_back(build_multicast_tree(
        g, source, std::vector<NodeId>(chosen.begin(), chosen.end())));
  }
  return trees;
}

}  // namespace detail

// Fraction of sampled trees whose full delivery is free of false link
// firings when encoded in an m-bit random-k filter.
inline double false_positive_free_fraction(const NetworkGraph& g,
                                           const std::vector<MulticastTree>& trees,
                                           std::size_t m, const KRule& k_rule,
                                           std::uint64_t seed,
                                           std::size_t ttl) {
  std::size_t clean = 0;
  for (std::size_t t = 0; t < trees.size(); ++t) {
    const auto& tree = trees[t];
    std::size_t k = k_rule(m, tree.links.size());
    auto ids = gen_random_ids(g.links.size(), m, k,
                              seed ^ (0x9E3779B97F4A7C15ull * (t + 1)) ^ m);
    std::vector<BitFilter> tree_ids;
    for (LinkIndex e : tree.links) tree_ids.push_back(ids.ids[e]);
    BitFilter f = bf_or(tree_ids, m);
    DeliveryTrace trace =
        deliver_classical(g, ids, f, tree.source, ttl, &tree.links, &tree.sinks);
    if (trace.false_firings.empty()) ++clean;
  }
  return static_cast<double>(clean) / trees.size();
}

// L_p(s): smallest filter bit-length m such that at least fraction p of
// `trials` random s-sink multicast trees deliver without any false firing.
// Exponential search for an upper bound, then binary search.
inline std::size_t min_filter_length(const NetworkGraph& g, std::size_t sinks,
                                     double p, std::size_t trials,
                                     std::uint64_t seed,
                                     const KRule& k_rule = default_k_rule) {
  if (p <= 0 || p >= 1)
    throw std::invalid_argument("min_filter_length: need 0 < p < 1");
  if (sinks < 1) throw std::invalid_argument("min_filter_length: sinks < 1");
  if (trials < 100)
    throw std::invalid_argument("min_filter_length: need trials >= 100");

  const auto trees = detail::sample_trees(g, sinks, trials, seed);
  const std::size_t ttl = 4 * std::max<std::size_t>(1, network_diameter(g));
  auto ok = [&](std::size_t m) {
    return false_positive_free_fraction(g, trees, m, k_rule, seed, ttl) >= p;
  };

  std::size_t hi = 8;
  while (!ok(hi)) {
    if (hi >= kMaxFilterLength)
      throw std::runtime_error(
          "min_filter_length: unsatisfiable within 2^20 bits");
    hi *= 2;
  }
  std::size_t lo = 1;
  while (lo < hi) {
    std::size_t mid = lo + (hi - lo) / 2;
    if (ok(mid)) hi = mid;
    else lo = mid + 1;
  }
  return lo;
}

}  // namespace xbf
