#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <functional>
#include <map>
#include <numeric>
#include <queue>
#include <sstream>
#include <stack>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace xbf {

using NodeId = std::uint32_t;
using LinkIndex = std::uint32_t;

constexpr LinkIndex kNoLink = static_cast<LinkIndex>(-1);

struct DirectedLink {
  NodeId src;
  NodeId dst;
  double traffic;  // packets per time unit, >= 0
};

// Directed network graph G_n. Nodes are dense 0..n-1; at most one link per
// ordered (src, dst) pair; always the largest weakly connected component of
// the input.
struct NetworkGraph {
  std::size_t node_count = 0;
  std::vector<DirectedLink> links;
  std::vector<std::vector<LinkIndex>> out_links;  // per node, ascending dst
  std::vector<std::vector<LinkIndex>> in_links;
  std::size_t dropped_nodes = 0;   // removed by largest-component filtering
  std::size_t dropped_links = 0;

  LinkIndex find_link(NodeId a, NodeId b) const {
    for (LinkIndex e : out_links[a])
      if (links[e].dst == b) return e;
    return kNoLink;
  }

  // Index of the opposite-direction link, or kNoLink if absent.
  LinkIndex reverse_of(LinkIndex e) const {
    return find_link(links[e].dst, links[e].src);
  }
};

struct RawEdge {
  std::string src;
  std::string dst;
  double traffic;
};

namespace detail {

inline void finalize_adjacency(NetworkGraph& g) {
  g.out_links.assign(g.node_count, {});
  g.in_links.assign(g.node_count, {});
  for (LinkIndex e = 0; e < g.links.size(); ++e) {
    g.out_links[g.links[e].src].push_back(e);
    g.in_links[g.links[e].dst].push_back(e);
  }
  auto by_dst = [&](LinkIndex a, LinkIndex b) {
    return g.links[a].dst < g.links[b].dst;
  };
  auto by_src = [&](LinkIndex a, LinkIndex b) {
    return g.links[a].src < g.links[b].src;
  };
  for (auto& v : g.out_links) std::sort(v.begin(), v.end(), by_dst);
  for (auto& v : g.in_links) std::sort(v.begin(), v.end(), by_src);
}

}  // namespace detail

// Builds a NetworkGraph from raw (src, dst, traffic) tuples. Node ids are
// densified in first-appearance order, parallel links merged with traffic
// summed, and everything outside the largest weakly connected component
// dropped.
inline NetworkGraph build_network_graph(const std::vector<RawEdge>& edges) {
  if (edges.empty())
    throw std::invalid_argument("build_network_graph: empty edge list");

  std::unordered_map<std::string, NodeId> ids;
  auto intern = [&](const std::string& name) {
    auto [it, inserted] = ids.emplace(name, static_cast<NodeId>(ids.size()));
    return it->second;
  };

  std::map<std::pair<NodeId, NodeId>, double> merged;
  for (std::size_t i = 0; i < edges.size(); ++i) {
    const auto& e = edges[i];
    if (e.src == e.dst)
      throw std::invalid_argument("build_network_graph: self-loop at entry " +
                                  std::to_string(i));
    if (e.traffic < 0)
      throw std::invalid_argument("build_network_graph: negative traffic at entry " +
                                  std::to_string(i));
    merged[{intern(e.src), intern(e.dst)}] += e.traffic;
  }

  const std::size_t n_all = ids.size();

  // Largest weakly connected component via union-find.
  std::vector<NodeId> parent(n_all);
  std::iota(parent.begin(), parent.end(), 0);
  std::function<NodeId(NodeId)> find = [&](NodeId x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (const auto& [key, _] : merged) parent[find(key.first)] = find(key.second);

  std::unordered_map<NodeId, std::size_t> comp_size;
  for (NodeId v = 0; v < n_all; ++v) comp_size[find(v)]++;
  NodeId best_root = 0;
  std::size_t best_size = 0;
  for (NodeId v = 0; v < n_all; ++v) {
    NodeId r = find(v);
    if (comp_size[r] > best_size) { best_size = comp_size[r]; best_root = r; }
  }

  // Re-densify the surviving nodes, keeping first-appearance order.
  std::vector<NodeId> remap(n_all, static_cast<NodeId>(-1));
  NodeId next = 0;
  for (NodeId v = 0; v < n_all; ++v)
    if (find(v) == best_root) remap[v] = next++;

  NetworkGraph g;
  g.node_count = next;
  g.dropped_nodes = n_all - next;
  for (const auto& [key, traffic] : merged) {
    if (remap[key.first] == static_cast<NodeId>(-1)) {
      g.dropped_links++;
      continue;
    }
    g.links.push_back({remap[key.first], remap[key.second], traffic});
  }
  detail::finalize_adjacency(g);
  return g;
}

// Edge-list text format: one `src<TAB>dst<TAB>traffic` per line, `#`
// comments ignored. With symmetrize, the reverse of every link is added
// with equal traffic unless listed explicitly.
inline std::vector<RawEdge> parse_edge_list(std::istream& in,
                                            bool symmetrize = false) {
  std::vector<RawEdge> edges;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string src, dst;
    double traffic;
    if (!(ls >> src)) continue;  // blank line
    if (!(ls >> dst >> traffic))
      throw std::runtime_error("edge list: malformed line " +
                               std::to_string(lineno));
    edges.push_back({src, dst, traffic});
  }
  if (symmetrize) {
    std::map<std::pair<std::string, std::string>, double> seen;
    for (const auto& e : edges) seen[{e.src, e.dst}] += e.traffic;
    std::vector<RawEdge> extra;
    for (const auto& [key, traffic] : seen)
      if (!seen.count({key.second, key.first}))
        extra.push_back({key.second, key.first, traffic});
    edges.insert(edges.end(), extra.begin(), extra.end());
  }
  return edges;
}

inline NetworkGraph load_edge_list(const std::string& path,
                                   bool symmetrize = false) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open edge list: " + path);
  return build_network_graph(parse_edge_list(in, symmetrize));
}

inline void write_edge_list(std::ostream& out, const NetworkGraph& g) {
  for (const auto& l : g.links)
    out << l.src << '\t' << l.dst << '\t' << l.traffic << '\n';
}

// Connectivity graph G_c: one vertex per directed network link (or several
// collapsed into a super-vertex), an edge (v_a,v_b)->(v_b,v_c) iff v_a != v_c.
struct ConnectivityVertex {
  std::vector<LinkIndex> member_links;  // original links, ascending
  double weight = 0;                    // summed traffic of members
};

struct ConnectivityGraph {
  std::vector<ConnectivityVertex> vertices;
  std::vector<std::vector<std::uint32_t>> out_edges;  // deduplicated, ascending
  std::vector<std::vector<std::uint32_t>> in_edges;
  std::vector<std::uint32_t> vertex_of_link;  // original link -> vertex

  std::size_t total_multiplicity() const {
    std::size_t n = 0;
    for (const auto& v : vertices) n += v.member_links.size();
    return n;
  }
  double total_weight() const {
    double w = 0;
    for (const auto& v : vertices) w += v.weight;
    return w;
  }
};

namespace detail {

inline void rebuild_edges(ConnectivityGraph& cg, const NetworkGraph& g) {
  const std::size_t n = cg.vertices.size();
  cg.out_edges.assign(n, {});
  cg.in_edges.assign(n, {});
  for (LinkIndex e = 0; e < g.links.size(); ++e) {
    const auto& link = g.links[e];
    for (LinkIndex next : g.out_links[link.dst]) {
      if (g.links[next].dst == link.src) continue;  // reverse-link exclusion
      std::uint32_t u = cg.vertex_of_link[e];
      std::uint32_t v = cg.vertex_of_link[next];
      if (u == v) continue;  // collapsed into the same super-vertex
      cg.out_edges[u].push_back(v);
      cg.in_edges[v].push_back(u);
    }
  }
  auto dedup = [](std::vector<std::uint32_t>& v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
  };
  for (auto& v : cg.out_edges) dedup(v);
  for (auto& v : cg.in_edges) dedup(v);
}

}  // namespace detail

inline ConnectivityGraph build_connectivity_graph(const NetworkGraph& g) {
  if (g.links.empty())
    throw std::invalid_argument("build_connectivity_graph: empty graph");
  ConnectivityGraph cg;
  cg.vertices.resize(g.links.size());
  cg.vertex_of_link.resize(g.links.size());
  for (LinkIndex e = 0; e < g.links.size(); ++e) {
    cg.vertices[e].member_links = {e};
    cg.vertices[e].weight = g.links[e].traffic;
    cg.vertex_of_link[e] = e;
  }
  detail::rebuild_edges(cg, g);
  return cg;
}

// Merges every connectivity vertex whose link touches a legacy switch into
// one super-vertex per connected group of legacy switches. The super-vertex
// counts as its member multiplicity against the partition size cap.
inline ConnectivityGraph collapse_legacy(const ConnectivityGraph& cg,
                                         const NetworkGraph& g,
                                         const std::vector<NodeId>& legacy,
                                         std::size_t max_partition_size) {
  std::vector<bool> is_legacy(g.node_count, false);
  for (NodeId v : legacy) {
    if (v >= g.node_count)
      throw std::invalid_argument("collapse_legacy: unknown node id");
    is_legacy[v] = true;
  }

  // Union-find over connectivity vertices; links sharing a legacy endpoint
  // merge, which also merges groups of legacy switches joined by a link.
  const std::size_t n = cg.vertices.size();
  std::vector<std::uint32_t> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  std::function<std::uint32_t(std::uint32_t)> find = [&](std::uint32_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };

  std::vector<std::uint32_t> anchor(g.node_count, static_cast<std::uint32_t>(-1));
  for (std::uint32_t v = 0; v < n; ++v) {
    for (LinkIndex e : cg.vertices[v].member_links) {
      for (NodeId end : {g.links[e].src, g.links[e].dst}) {
        if (!is_legacy[end]) continue;
        if (anchor[end] == static_cast<std::uint32_t>(-1)) anchor[end] = v;
        else parent[find(anchor[end])] = find(v);
      }
    }
  }

  ConnectivityGraph out;
  out.vertex_of_link.resize(cg.vertex_of_link.size());
  std::unordered_map<std::uint32_t, std::uint32_t> root_to_new;
  for (std::uint32_t v = 0; v < n; ++v) {
    std::uint32_t r = find(v);
    auto [it, inserted] = root_to_new.emplace(r, out.vertices.size());
    if (inserted) out.vertices.emplace_back();
    auto& sv = out.vertices[it->second];
    sv.weight += cg.vertices[v].weight;
    sv.member_links.insert(sv.member_links.end(),
                           cg.vertices[v].member_links.begin(),
                           cg.vertices[v].member_links.end());
  }
  for (auto& v : out.vertices)
    std::sort(v.member_links.begin(), v.member_links.end());
  for (const auto& v : out.vertices) {
    if (v.member_links.size() > max_partition_size)
      throw std::runtime_error(
          "collapse_legacy: super-vertex of " +
          std::to_string(v.member_links.size()) +
          " links exceeds the partition size cap, graph unpartitionable");
  }
  for (std::uint32_t v = 0; v < n; ++v)
    for (LinkIndex e : cg.vertices[v].member_links)
      out.vertex_of_link[e] = root_to_new[find(v)];
  detail::rebuild_edges(out, g);
  return out;
}

// Shortest-path edge betweenness (Brandes), per directed link, normalised by
// n(n-1): the fraction of all-pairs shortest paths through the link, with
// even split across equal-length paths.
inline std::vector<double> betweenness_weights(const NetworkGraph& g) {
  const std::size_t n = g.node_count;
  std::vector<double> bc(g.links.size(), 0.0);

  std::vector<int> dist(n);
  std::vector<double> sigma(n), delta(n);
  std::vector<NodeId> order;
  order.reserve(n);

  for (NodeId s = 0; s < n; ++s) {
    std::fill(dist.begin(), dist.end(), -1);
    std::fill(sigma.begin(), sigma.end(), 0.0);
    std::fill(delta.begin(), delta.end(), 0.0);
    order.clear();

    dist[s] = 0;
    sigma[s] = 1.0;
    std::queue<NodeId> q;
    q.push(s);
    while (!q.empty()) {
      NodeId v = q.front();
      q.pop();
      order.push_back(v);
      for (LinkIndex e : g.out_links[v]) {
        NodeId w = g.links[e].dst;
        if (dist[w] < 0) {
          dist[w] = dist[v] + 1;
          q.push(w);
        }
        if (dist[w] == dist[v] + 1) sigma[w] += sigma[v];
      }
    }
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
      NodeId w = *it;
      for (LinkIndex e : g.in_links[w]) {
        NodeId v = g.links[e].src;
        if (dist[v] >= 0 && dist[v] + 1 == dist[w]) {
          double c = sigma[v] / sigma[w] * (1.0 + delta[w]);
          bc[e] += c;
          delta[v] += c;
        }
      }
    }
  }
  const double norm = static_cast<double>(n) * (n - 1);
  if (norm > 0)
    for (auto& x : bc) x /= norm;
  return bc;
}

}  // namespace xbf
