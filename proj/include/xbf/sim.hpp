#pragma once

#include <cstdint>
#include <deque>
#include <set>
#include <stdexcept>
#include <unordered_set>
#include <vector>

#include "xbf/bitfilter.hpp"
#include "xbf/graph.hpp"
#include "xbf/header.hpp"
#include "xbf/partition.hpp"

namespace xbf {

// Union of shortest paths from the source to every sink. Shared prefixes
// merge, so the links form a directed tree rooted at the source.
struct MulticastTree {
  NodeId source = 0;
  std::vector<NodeId> sinks;      // ascending
  std::vector<LinkIndex> links;   // ascending
};

struct DeliveryTrace {
  std::vector<LinkIndex> traversed_links;       // multiset, traversal order
  std::vector<NodeId> delivered;                // sinks reached, ascending
  std::vector<std::pair<NodeId, std::uint32_t>> pops;  // (node, partition)
  std::vector<LinkIndex> false_firings;
  bool loop_detected = false;
  bool duplicate_traversal = false;
  std::vector<std::uint32_t> partitions_touched;  // ascending
};

// BFS shortest paths, ties broken toward the lowest predecessor id, then
// merged into one tree.
inline MulticastTree build_multicast_tree(const NetworkGraph& g, NodeId source,
                                          const std::vector<NodeId>& sinks) {
  if (sinks.empty())
    throw std::invalid_argument("build_multicast_tree: no sinks");

  std::vector<int> dist(g.node_count, -1);
  dist[source] = 0;
  std::deque<NodeId> q{source};
  while (!q.empty()) {
    NodeId v = q.front();
    q.pop_front();
    for (LinkIndex e : g.out_links[v]) {
      NodeId w = g.links[e].dst;
      if (dist[w] < 0) {
        dist[w] = dist[v] + 1;
        q.push_back(w);
      }
    }
  }

  std::set<LinkIndex> links;
  for (NodeId sink : sinks) {
    if (sink == source) continue;
    if (dist[sink] < 0)
      throw std::runtime_error("build_multicast_tree: sink unreachable");
    NodeId cur = sink;
    while (cur != source) {
      LinkIndex chosen = kNoLink;
      for (LinkIndex e : g.in_links[cur]) {
        NodeId u = g.links[e].src;
        if (dist[u] == dist[cur] - 1 && (chosen == kNoLink || u < g.links[chosen].src))
          chosen = e;
      }
      links.insert(chosen);
      cur = g.links[chosen].src;
    }
  }

  MulticastTree t;
  t.source = source;
  t.sinks.assign(sinks.begin(), sinks.end());
  std::sort(t.sinks.begin(), t.sinks.end());
  t.sinks.erase(std::unique(t.sinks.begin(), t.sinks.end()), t.sinks.end());
  t.links.assign(links.begin(), links.end());
  return t;
}

namespace detail {

// Entry partition: partition of the source's lowest-index outgoing tree link.
inline std::uint32_t entry_partition_of(const NetworkGraph& g,
                                        const MulticastTree& tree,
                                        const Partitioning& p) {
  for (LinkIndex e : tree.links)
    if (g.links[e].src == tree.source) return p.assignment[e];
  throw std::invalid_argument("tree has no link leaving its source");
}

}  // namespace detail

inline XbfHeader build_header(const NetworkGraph& g, const MulticastTree& tree,
                              const Partitioning& p) {
  return build_header(tree.links, p, detail::entry_partition_of(g, tree, p));
}

// XBF forwarding. The zBF is shared and immutable; each packet copy tracks
// only which partition its iBF currently holds. A popper pops once per
// distinct foreign partition per node visit, exactly when that partition is
// in the bitmap and the node has a candidate out-link in it.
inline DeliveryTrace deliver_xbf(const NetworkGraph& g, const Partitioning& p,
                                 const MulticastTree& tree) {
  const std::uint32_t entry = detail::entry_partition_of(g, tree, p);
  const XbfHeader header = build_header(tree.links, p, entry);

  DeliveryTrace trace;
  std::set<NodeId> reached;
  std::set<std::uint32_t> touched{entry};
  std::set<std::pair<NodeId, LinkIndex>> visited;
  std::vector<std::size_t> link_hits(g.links.size(), 0);

  struct Copy {
    NodeId node;
    LinkIndex in_link;  // kNoLink at the source
    std::uint32_t partition;
  };
  std::deque<Copy> queue{{tree.source, kNoLink, entry}};

  while (!queue.empty()) {
    Copy c = queue.front();
    queue.pop_front();

    if (!visited.insert({c.node, c.in_link}).second) {
      trace.loop_detected = true;
      continue;
    }
    reached.insert(c.node);

    const NodeId reverse_dst =
        c.in_link == kNoLink ? static_cast<NodeId>(-1) : g.links[c.in_link].src;

    // Popping: one event per distinct foreign bitmap partition with a
    // candidate out-link at this node.
    std::set<std::uint32_t> foreign;
    for (LinkIndex e : g.out_links[c.node]) {
      if (g.links[e].dst == reverse_dst) continue;
      std::uint32_t q = p.assignment[e];
      if (q != c.partition && header.filter_bitmap[q]) foreign.insert(q);
    }
    for (std::uint32_t q : foreign) trace.pops.emplace_back(c.node, q);

    for (LinkIndex e : g.out_links[c.node]) {
      if (g.links[e].dst == reverse_dst) continue;
      const std::uint32_t q = p.assignment[e];
      const BitFilter* filter = nullptr;
      if (q == c.partition) filter = header.find_filter(q);
      else if (header.filter_bitmap[q]) filter = header.find_filter(q);
      if (!filter || !filter->test(p.bit_of_link[e])) continue;

      trace.traversed_links.push_back(e);
      if (++link_hits[e] > 1) trace.duplicate_traversal = true;
      touched.insert(q);
      queue.push_back({g.links[e].dst, e, q});
    }
  }

  for (NodeId s : tree.sinks)
    if (reached.count(s)) trace.delivered.push_back(s);
  trace.partitions_touched.assign(touched.begin(), touched.end());
  return trace;
}

// Classical Bloom-filter flooding with filter F. `tree_links`, when given,
// classifies firings outside the tree as false positives; `sinks` filters
// the delivered set (otherwise every reached node is reported).
inline DeliveryTrace deliver_classical(const NetworkGraph& g,
                                       const LinkIdAssignment& ids,
                                       const BitFilter& f, NodeId source,
                                       std::size_t ttl,
                                       const std::vector<LinkIndex>* tree_links = nullptr,
                                       const std::vector<NodeId>* sinks = nullptr) {
  if (ttl < 1) throw std::invalid_argument("deliver_classical: ttl < 1");

  DeliveryTrace trace;
  std::set<NodeId> reached;
  std::set<std::pair<NodeId, LinkIndex>> visited;
  std::set<LinkIndex> tree_set;
  if (tree_links) tree_set.insert(tree_links->begin(), tree_links->end());

  struct Copy {
    NodeId node;
    LinkIndex in_link;
    std::size_t hops;
  };
  std::deque<Copy> queue{{source, kNoLink, 0}};

  while (!queue.empty()) {
    Copy c = queue.front();
    queue.pop_front();
    reached.insert(c.node);

    if (!visited.insert({c.node, c.in_link}).second) {
      trace.loop_detected = true;
      continue;
    }
    if (c.hops >= ttl) continue;

    const NodeId reverse_dst =
        c.in_link == kNoLink ? static_cast<NodeId>(-1) : g.links[c.in_link].src;
    for (LinkIndex e : g.out_links[c.node]) {
      if (g.links[e].dst == reverse_dst) continue;
      if (!bf_member(f, ids.ids[e])) continue;
      trace.traversed_links.push_back(e);
      if (tree_links && !tree_set.count(e)) trace.false_firings.push_back(e);
      queue.push_back({g.links[e].dst, e, c.hops + 1});
    }
  }

  if (sinks) {
    for (NodeId s : *sinks)
      if (reached.count(s)) trace.delivered.push_back(s);
  } else {
    trace.delivered.assign(reached.begin(), reached.end());
  }
  return trace;
}

// Independent static pop count per Eq.-1 set arithmetic: walk the tree,
// and at each node visit count the distinct foreign bitmap partitions among
// the node's candidate out-links.
inline std::size_t static_pop_count(const NetworkGraph& g,
                                    const Partitioning& p,
                                    const MulticastTree& tree) {
  const std::uint32_t entry = detail::entry_partition_of(g, tree, p);
  std::vector<bool> bitmap(p.partition_count, false);
  bitmap[entry] = true;
  for (LinkIndex e : tree.links) bitmap[p.assignment[e]] = true;

  std::size_t pops = 0;
  // Node visits: the source (no in-link) plus one visit per tree link.
  auto count_at = [&](NodeId v, NodeId exclude_dst, std::uint32_t arrival) {
    std::set<std::uint32_t> foreign;
    for (LinkIndex e : g.out_links[v]) {
      if (g.links[e].dst == exclude_dst) continue;
      std::uint32_t q = p.assignment[e];
      if (q != arrival && bitmap[q]) foreign.insert(q);
    }
    return foreign.size();
  };
  pops += count_at(tree.source, static_cast<NodeId>(-1), entry);
  for (LinkIndex e : tree.links)
    pops += count_at(g.links[e].dst, g.links[e].src, p.assignment[e]);
  return pops;
}

// Network diameter over the undirected reachability (hop count); used to
// derive the classical-mode ttl default of 4 * diameter.
inline std::size_t network_diameter(const NetworkGraph& g) {
  std::size_t diameter = 0;
  std::vector<int> dist(g.node_count);
  for (NodeId s = 0; s < g.node_count; ++s) {
    std::fill(dist.begin(), dist.end(), -1);
    dist[s] = 0;
    std::deque<NodeId> q{s};
    while (!q.empty()) {
      NodeId v = q.front();
      q.pop_front();
      diameter = std::max(diameter, static_cast<std::size_t>(dist[v]));
      for (LinkIndex e : g.out_links[v]) {
        NodeId w = g.links[e].dst;
        if (dist[w] < 0) {
          dist[w] = dist[v] + 1;
          q.push_back(w);
        }
      }
    }
  }
  return diameter;
}

}  // namespace xbf
