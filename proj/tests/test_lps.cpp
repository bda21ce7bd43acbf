#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "xbf/lps.hpp"
#include "xbf/topo.hpp"

using namespace xbf;

TEST_CASE("default k rule") {
  CHECK(default_k_rule(256, 36) == 5);   // round(256/36 * ln2) = round(4.93)
  CHECK(default_k_rule(8, 1000) == 1);   // clamped below
  CHECK(default_k_rule(8, 1) == 6);      // round(8 * ln2)
  CHECK(default_k_rule(4, 1) <= 4);      // clamped above
}

TEST_CASE("argument validation") {
  auto g = gen_ba(30, 2, 1);
  CHECK_THROWS_AS(min_filter_length(g, 1, 0.0, 200, 0), std::invalid_argument);
  CHECK_THROWS_AS(min_filter_length(g, 1, 1.0, 200, 0), std::invalid_argument);
  CHECK_THROWS_AS(min_filter_length(g, 0, 0.5, 200, 0), std::invalid_argument);
  CHECK_THROWS_AS(min_filter_length(g, 1, 0.5, 99, 0), std::invalid_argument);
}

TEST_CASE("two-node network needs only a few bits") {
  auto g = build_network_graph({{"a", "b", 1}, {"b", "a", 1}});
  // every tree is the single connecting link; tiny filters already suffice
  auto m = min_filter_length(g, 1, 0.5, 100, 1);
  CHECK(m <= 8);
  CHECK(m >= 1);
}

TEST_CASE("returned length is the exact threshold") {
  auto g = gen_ba(60, 2, 3);
  const std::size_t trials = 150;
  const double p = 0.9;
  auto m = min_filter_length(g, 2, p, trials, 7);
  auto trees = detail::sample_trees(g, 2, trials, 7);
  const std::size_t ttl = 4 * network_diameter(g);
  CHECK(false_positive_free_fraction(g, trees, m, default_k_rule, 7, ttl) >= p);
  if (m > 1)
    CHECK(false_positive_free_fraction(g, trees, m - 1, default_k_rule, 7, ttl) < p);
}

TEST_CASE("length grows with the sink count") {
  auto g = gen_ba(120, 2, 5);
  auto m1 = min_filter_length(g, 1, 0.95, 200, 11);
  auto m8 = min_filter_length(g, 8, 0.95, 200, 11);
  auto m20 = min_filter_length(g, 20, 0.95, 200, 11);
  CHECK(m1 <= m8);
  CHECK(m8 <= m20);
  CHECK(m20 > m1);
}

TEST_CASE("length grows with the success requirement") {
  auto g = gen_ba(120, 2, 6);
  auto lo = min_filter_length(g, 5, 0.5, 200, 13);
  auto hi = min_filter_length(g, 5, 0.99, 200, 13);
  CHECK(lo <= hi);
}

TEST_CASE("free fraction is monotone in the filter length on average") {
  auto g = gen_ba(100, 2, 8);
  auto trees = detail::sample_trees(g, 10, 150, 8);
  const std::size_t ttl = 4 * network_diameter(g);
  double f64 = false_positive_free_fraction(g, trees, 64, default_k_rule, 8, ttl);
  double f512 = false_positive_free_fraction(g, trees, 512, default_k_rule, 8, ttl);
  CHECK(f512 >= f64);
  CHECK(f512 > 0.9);
}
