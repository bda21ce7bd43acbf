#pragma once

#include <string>

#include <json.hpp>

#include "xbf/experiment.hpp"
#include "xbf/partition.hpp"

namespace xbf {

// Partitioning export format consumed by the header and sim tooling.
inline nlohmann::json partitioning_to_json(const Partitioning& p) {
  nlohmann::json j;
  j["partition_count"] = p.partition_count;
  j["max_partition_size"] = p.max_partition_size;
  j["assignment"] = p.assignment;
  auto& ids = j["one_bit_ids"] = nlohmann::json::array();
  for (LinkIndex e = 0; e < p.assignment.size(); ++e)
    ids.push_back({{"link", e},
                   {"partition", p.assignment[e]},
                   {"bit", p.bit_of_link[e]}});
  j["poppers"] = p.popper_nodes;
  return j;
}

inline Partitioning partitioning_from_json(const nlohmann::json& j,
                                           const NetworkGraph& g) {
  std::vector<std::uint32_t> assignment =
      j.at("assignment").get<std::vector<std::uint32_t>>();
  if (assignment.size() != g.links.size())
    throw std::runtime_error("partitioning json does not match graph");
  Partitioning p = detail::derive_partitioning(
      g, std::move(assignment), j.at("partition_count").get<std::size_t>(),
      j.at("max_partition_size").get<std::size_t>());
  // Cross-check the stored bit layout and popper set.
  for (const auto& entry : j.at("one_bit_ids")) {
    LinkIndex e = entry.at("link").get<LinkIndex>();
    if (p.bit_of_link[e] != entry.at("bit").get<std::uint32_t>())
      throw std::runtime_error("partitioning json: bit layout mismatch");
  }
  if (p.popper_nodes != j.at("poppers").get<std::vector<NodeId>>())
    throw std::runtime_error("partitioning json: popper set mismatch");
  return p;
}

inline nlohmann::json summary_to_json(const std::vector<MetricsRow>& rows) {
  nlohmann::json out = nlohmann::json::array();
  std::set<std::pair<std::string, std::size_t>> groups;
  for (const auto& r : rows) groups.insert({r.scheme, r.sinks});
  for (const auto& [scheme, sinks] : groups) {
    auto collect = [&](auto getter) {
      std::vector<double> v;
      for (const auto& r : rows)
        if (r.scheme == scheme && r.sinks == sinks)
          v.push_back(static_cast<double>(getter(r)));
      return summarize(std::move(v));
    };
    auto to_json = [](const MetricSummary& s) {
      return nlohmann::json{{"mean", s.mean}, {"p5", s.p5}, {"p95", s.p95}};
    };
    nlohmann::json g;
    g["scheme"] = scheme;
    g["sinks"] = sinks;
    g["hdr_bits"] = to_json(collect([](const MetricsRow& r) { return r.hdr_bits; }));
    g["hdr_bits_compressed"] =
        to_json(collect([](const MetricsRow& r) { return r.hdr_bits_compressed; }));
    g["partitions"] = to_json(collect([](const MetricsRow& r) { return r.partitions; }));
    g["poppers_on_tree"] =
        to_json(collect([](const MetricsRow& r) { return r.poppers_on_tree; }));
    g["pops"] = to_json(collect([](const MetricsRow& r) { return r.pops; }));
    g["false_firings"] =
        to_json(collect([](const MetricsRow& r) { return r.false_firings; }));
    out.push_back(std::move(g));
  }
  return out;
}

}  // namespace xbf
