#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sstream>

#include "xbf/json_io.hpp"
#include "xbf/topo.hpp"

using namespace xbf;

TEST_CASE("partitioning json roundtrip") {
  auto g = gen_ba(90, 2, 1);
  auto p = jigsaw(g, {}, {.max_partition_size = 32, .seed = 1,
                          .traffic_aware = false});
  auto j = partitioning_to_json(p);
  CHECK(j["partition_count"] == p.partition_count);
  CHECK(j["one_bit_ids"].size() == g.links.size());
  auto p2 = partitioning_from_json(j, g);
  CHECK(p2.assignment == p.assignment);
  CHECK(p2.bit_of_link == p.bit_of_link);
  CHECK(p2.popper_nodes == p.popper_nodes);
  CHECK(p2.max_partition_size == p.max_partition_size);
}

TEST_CASE("partitioning json roundtrips through text") {
  auto g = gen_ba(50, 2, 2);
  auto p = jigsaw(g, {}, {.max_partition_size = 16, .seed = 2,
                          .traffic_aware = false});
  auto text = partitioning_to_json(p).dump();
  auto p2 = partitioning_from_json(nlohmann::json::parse(text), g);
  CHECK(p2.assignment == p.assignment);
}

TEST_CASE("tampered json is rejected") {
  auto g = gen_ba(60, 2, 3);
  auto p = jigsaw(g, {}, {.max_partition_size = 16, .seed = 3,
                          .traffic_aware = false});
  auto j = partitioning_to_json(p);

  auto bad = j;
  bad["assignment"].erase(0);
  CHECK_THROWS_AS(partitioning_from_json(bad, g), std::runtime_error);

  bad = j;
  bad["one_bit_ids"][0]["bit"] = 999;
  CHECK_THROWS_AS(partitioning_from_json(bad, g), std::runtime_error);

  bad = j;
  bad["poppers"] = nlohmann::json::array();
  if (!p.popper_nodes.empty())
    CHECK_THROWS_AS(partitioning_from_json(bad, g), std::runtime_error);

  bad = j;
  bad.erase("assignment");
  CHECK_THROWS_AS(partitioning_from_json(bad, g), nlohmann::json::exception);
}

TEST_CASE("csv schema and rows") {
  std::ostringstream out;
  write_csv_header(out);
  CHECK(out.str() ==
        "topology,scheme,sinks,trial,hdr_bits,hdr_bits_compressed,"
        "partitions,poppers_on_tree,pops,false_firings,loop\n");
  MetricsRow r;
  r.topology = "ba500";
  r.scheme = "xbf";
  r.sinks = 10;
  r.trial = 3;
  r.hdr_bits = 2075;
  r.hdr_bits_compressed = 529;
  r.partitions = 7;
  r.poppers_on_tree = 19;
  r.pops = 21;
  r.false_firings = 0;
  r.loop = false;
  std::ostringstream row;
  write_csv_row(row, r);
  CHECK(row.str() == "ba500,xbf,10,3,2075,529,7,19,21,0,0\n");
}

TEST_CASE("summary json groups by scheme and sink count") {
  auto g = gen_ba(70, 2, 4);
  auto p = jigsaw(g, {}, {.max_partition_size = 24, .seed = 4,
                          .traffic_aware = false});
  ExperimentConfig cfg{.sink_counts = {2, 5}, .trials = 30, .seed = 5};
  auto rows = run_experiment(g, p, cfg);
  auto j = summary_to_json(rows);
  REQUIRE(j.size() == 2);
  for (const auto& group : j) {
    CHECK(group["scheme"] == "xbf");
    CHECK((group["sinks"] == 2 || group["sinks"] == 5));
    for (const char* metric : {"hdr_bits", "hdr_bits_compressed", "partitions",
                               "poppers_on_tree", "pops", "false_firings"}) {
      REQUIRE(group.contains(metric));
      CHECK(group[metric].contains("mean"));
      CHECK(group[metric]["p5"].get<double>() <=
            group[metric]["p95"].get<double>());
    }
    CHECK(group["false_firings"]["mean"] == 0.0);
  }
}

TEST_CASE("summary of an empty campaign is empty") {
  CHECK(summary_to_json({}).empty());
}
