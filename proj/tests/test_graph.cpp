#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <map>
#include <random>
#include <sstream>

#include "xbf/graph.hpp"

using namespace xbf;

static NetworkGraph from(const std::vector<RawEdge>& edges) {
  return build_network_graph(edges);
}

TEST_CASE("two-way pair") {
  auto g = from({{"a", "b", 1}, {"b", "a", 1}});
  CHECK(g.node_count == 2);
  CHECK(g.links.size() == 2);
  CHECK(g.reverse_of(0) == 1);
}

TEST_CASE("self-loops rejected with entry index") {
  CHECK_THROWS_WITH_AS(from({{"a", "b", 1}, {"x", "x", 1}}),
                       "build_network_graph: self-loop at entry 1",
                       std::invalid_argument);
  CHECK_THROWS_AS(from({}), std::invalid_argument);
  CHECK_THROWS_AS(from({{"a", "b", -1}}), std::invalid_argument);
}

TEST_CASE("parallel links merged with traffic summed") {
  auto g = from({{"a", "b", 1}, {"a", "b", 2.5}, {"b", "a", 1}});
  CHECK(g.links.size() == 2);
  CHECK(g.links[g.find_link(0, 1)].traffic == doctest::Approx(3.5));
}

TEST_CASE("smaller component dropped") {
  auto g = from({{"a", "b", 1}, {"b", "a", 1}, {"b", "c", 1}, {"c", "b", 1},
                 {"x", "y", 1}, {"y", "x", 1}});
  CHECK(g.node_count == 3);
  CHECK(g.links.size() == 4);
  CHECK(g.dropped_nodes == 2);
  CHECK(g.dropped_links == 2);
}

TEST_CASE("node ids follow first appearance") {
  auto g = from({{"z", "q", 1}, {"q", "z", 1}, {"z", "a", 1}, {"a", "z", 1}});
  // z=0, q=1, a=2
  CHECK(g.find_link(0, 1) != kNoLink);
  CHECK(g.find_link(0, 2) != kNoLink);
}

TEST_CASE("edge list parsing with comments and symmetrize") {
  std::istringstream in("# comment\na\tb\t2\n\nb\tc\t1 # trailing\n");
  auto edges = parse_edge_list(in, true);
  REQUIRE(edges.size() == 4);  // two listed + two reverses
  std::istringstream bad("a\tb\n");
  CHECK_THROWS_AS(parse_edge_list(bad), std::runtime_error);
}

TEST_CASE("edge list write/parse roundtrip") {
  auto g = from({{"a", "b", 1.5}, {"b", "a", 2}, {"b", "c", 3}, {"c", "b", 1}});
  std::ostringstream out;
  write_edge_list(out, g);
  std::istringstream in(out.str());
  auto g2 = build_network_graph(parse_edge_list(in));
  CHECK(g2.node_count == g.node_count);
  REQUIRE(g2.links.size() == g.links.size());
}

TEST_CASE("one-way 3-cycle maps to a connectivity 3-cycle") {
  auto g = from({{"a", "b", 1}, {"b", "c", 1}, {"c", "a", 1}});
  auto cg = build_connectivity_graph(g);
  CHECK(cg.vertices.size() == 3);
  std::size_t total_edges = 0;
  for (const auto& v : cg.out_edges) total_edges += v.size();
  CHECK(total_edges == 3);
  for (std::uint32_t v = 0; v < 3; ++v) CHECK(cg.out_edges[v].size() == 1);
}

TEST_CASE("bidirectional triangle splits into two 3-cycles") {
  auto g = from({{"a", "b", 1}, {"b", "a", 1}, {"b", "c", 1}, {"c", "b", 1},
                 {"c", "a", 1}, {"a", "c", 1}});
  auto cg = build_connectivity_graph(g);
  CHECK(cg.vertices.size() == g.links.size());

  auto vx = [&](NodeId s, NodeId d) { return cg.vertex_of_link[g.find_link(s, d)]; };
  // forward cycle ab -> bc -> ca and backward cycle ac -> cb -> ba
  CHECK(cg.out_edges[vx(0, 1)] == std::vector<std::uint32_t>{vx(1, 2)});
  CHECK(cg.out_edges[vx(1, 2)] == std::vector<std::uint32_t>{vx(2, 0)});
  CHECK(cg.out_edges[vx(2, 0)] == std::vector<std::uint32_t>{vx(0, 1)});
  CHECK(cg.out_edges[vx(0, 2)] == std::vector<std::uint32_t>{vx(2, 1)});
}

TEST_CASE("vertex count equals link count before collapsing") {
  auto g = from({{"a", "b", 1}, {"b", "a", 1}, {"b", "c", 1}, {"c", "b", 1},
                 {"a", "c", 2}, {"c", "a", 2}});
  auto cg = build_connectivity_graph(g);
  CHECK(cg.vertices.size() == g.links.size());
  CHECK(cg.total_weight() == doctest::Approx(8.0));
}

TEST_CASE("no connectivity edge onto the reverse link") {
  auto g = from({{"a", "b", 1}, {"b", "a", 1}, {"b", "c", 1}, {"c", "b", 1}});
  auto cg = build_connectivity_graph(g);
  for (LinkIndex e = 0; e < g.links.size(); ++e) {
    LinkIndex rev = g.reverse_of(e);
    for (std::uint32_t u : cg.out_edges[cg.vertex_of_link[e]])
      CHECK(u != cg.vertex_of_link[rev]);
  }
}

TEST_CASE("collapse with no legacy switches is the identity") {
  auto g = from({{"a", "b", 1}, {"b", "a", 1}, {"b", "c", 1}, {"c", "b", 1}});
  auto cg = build_connectivity_graph(g);
  auto out = collapse_legacy(cg, g, {}, 256);
  CHECK(out.vertices.size() == cg.vertices.size());
  CHECK(out.total_weight() == doctest::Approx(cg.total_weight()));
}

TEST_CASE("legacy switch merges its incident links into one super-vertex") {
  // star centre c with three leaves, bidirectional: 6 links touch c
  auto g = from({{"c", "x", 1}, {"x", "c", 1}, {"c", "y", 1}, {"y", "c", 1},
                 {"c", "z", 1}, {"z", "c", 1}});
  auto cg = build_connectivity_graph(g);
  auto out = collapse_legacy(cg, g, {0}, 256);
  CHECK(out.vertices.size() == 1);
  CHECK(out.vertices[0].member_links.size() == 6);
  CHECK(out.total_multiplicity() == cg.total_multiplicity());
  CHECK(out.total_weight() == doctest::Approx(cg.total_weight()));
  CHECK_THROWS_AS(collapse_legacy(cg, g, {0}, 4), std::runtime_error);
  CHECK_THROWS_AS(collapse_legacy(cg, g, {99}, 256), std::invalid_argument);
}

TEST_CASE("two legacy switches sharing a link merge transitively") {
  auto g = from({{"a", "b", 1}, {"b", "a", 1}, {"b", "c", 1}, {"c", "b", 1},
                 {"c", "d", 1}, {"d", "c", 1}});
  auto cg = build_connectivity_graph(g);
  auto out = collapse_legacy(cg, g, {1, 2}, 256);  // b and c
  // every link touches b or c, so all six collapse together
  CHECK(out.vertices.size() == 1);
}

// exhaustive shortest-path enumeration, written independently of the library
static std::vector<double> brute_betweenness(const NetworkGraph& g) {
  std::vector<double> bc(g.links.size(), 0.0);
  const std::size_t n = g.node_count;
  for (NodeId s = 0; s < n; ++s) {
    for (NodeId t = 0; t < n; ++t) {
      if (s == t) continue;
      // collect all shortest s->t paths by BFS layers + DFS
      std::vector<int> dist(n, -1);
      dist[s] = 0;
      std::vector<NodeId> q{s};
      for (std::size_t i = 0; i < q.size(); ++i)
        for (LinkIndex e : g.out_links[q[i]])
          if (dist[g.links[e].dst] < 0) {
            dist[g.links[e].dst] = dist[q[i]] + 1;
            q.push_back(g.links[e].dst);
          }
      if (dist[t] < 0) continue;
      std::vector<std::vector<LinkIndex>> paths;
      std::vector<LinkIndex> cur;
      std::function<void(NodeId)> dfs = [&](NodeId v) {
        if (v == t) {
          paths.push_back(cur);
          return;
        }
        for (LinkIndex e : g.out_links[v])
          if (dist[g.links[e].dst] == dist[v] + 1) {
            cur.push_back(e);
            dfs(g.links[e].dst);
            cur.pop_back();
          }
      };
      dfs(s);
      for (const auto& path : paths)
        for (LinkIndex e : path) bc[e] += 1.0 / paths.size();
    }
  }
  for (auto& x : bc) x /= static_cast<double>(n) * (n - 1);
  return bc;
}

TEST_CASE("betweenness on a two-node pair is symmetric and maximal") {
  auto g = from({{"a", "b", 1}, {"b", "a", 1}});
  auto w = betweenness_weights(g);
  CHECK(w[0] == doctest::Approx(w[1]));
  CHECK(w[0] == doctest::Approx(0.5));  // 1 path of 2 ordered pairs
}

TEST_CASE("betweenness matches exhaustive enumeration on a star") {
  auto g = from({{"c", "x", 1}, {"x", "c", 1}, {"c", "y", 1}, {"y", "c", 1},
                 {"c", "z", 1}, {"z", "c", 1}});
  auto w = betweenness_weights(g);
  auto expected = brute_betweenness(g);
  for (LinkIndex e = 0; e < g.links.size(); ++e)
    CHECK(w[e] == doctest::Approx(expected[e]));
}

TEST_CASE("betweenness matches exhaustive enumeration on random graphs") {
  std::mt19937_64 rng(5);
  auto name = [](std::size_t i) { return std::string(1, char('a' + i)); };
  for (int t = 0; t < 10; ++t) {
    std::size_t n = 4 + rng() % 4;
    std::vector<RawEdge> edges;
    for (std::size_t i = 1; i < n; ++i) {
      std::size_t j = rng() % i;
      edges.push_back({name(i), name(j), 1});
      edges.push_back({name(j), name(i), 1});
    }
    if (rng() & 1) {
      edges.push_back({name(0), name(n - 1), 1});  // may duplicate, merged
      edges.push_back({name(n - 1), name(0), 1});
    }
    auto g = from(edges);
    auto w = betweenness_weights(g);
    auto expected = brute_betweenness(g);
    for (LinkIndex e = 0; e < g.links.size(); ++e)
      CHECK(w[e] == doctest::Approx(expected[e]));
  }
}

TEST_CASE("symmetric path has equal betweenness on mirrored links") {
  auto g = from({{"a", "b", 1}, {"b", "a", 1}, {"b", "c", 1}, {"c", "b", 1}});
  auto w = betweenness_weights(g);
  CHECK(w[g.find_link(0, 1)] == doctest::Approx(w[g.find_link(1, 0)]));
  CHECK(w[g.find_link(1, 2)] == doctest::Approx(w[g.find_link(2, 1)]));
}
