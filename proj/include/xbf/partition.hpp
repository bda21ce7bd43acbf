#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <stdexcept>
#include <vector>

#include "xbf/bitfilter.hpp"
#include "xbf/graph.hpp"

namespace xbf {

struct PartitionConfig {
  std::size_t max_partition_size = 256;
  double imbalance = 1.1;  // partition-count multiplier nu
  std::uint64_t seed = 0;
  bool traffic_aware = true;

  void validate() const {
    if (max_partition_size < 1)
      throw std::invalid_argument("PartitionConfig: max_partition_size < 1");
    if (imbalance < 1.0)
      throw std::invalid_argument("PartitionConfig: imbalance must be >= 1");
  }
};

// An assignment of every directed link to a partition, with the derived
// popper set and per-partition one-bit link identifiers.
struct Partitioning {
  std::size_t max_partition_size = 256;
  std::size_t partition_count = 0;
  std::vector<std::uint32_t> assignment;             // link -> partition id
  std::vector<std::vector<LinkIndex>> partition_links;  // ascending per pid
  std::vector<std::uint32_t> bit_of_link;            // link -> bit position
  std::vector<NodeId> popper_nodes;                  // ascending
  std::vector<bool> popper_flags;                    // per node

  bool is_popper(NodeId v) const { return popper_flags[v]; }
};

struct PartitionQuality {
  double totalv = 0;
  std::vector<std::uint32_t> phi;  // per link
  std::size_t popper_count = 0;
  std::size_t max_fill = 0;
  std::size_t min_fill = 0;
};

namespace detail {

inline std::vector<NodeId> compute_poppers(const NetworkGraph& g,
                                           const std::vector<std::uint32_t>& assignment,
                                           std::vector<bool>& flags) {
  flags.assign(g.node_count, false);
  std::vector<NodeId> poppers;
  for (NodeId v = 0; v < g.node_count; ++v) {
    std::uint32_t first = static_cast<std::uint32_t>(-1);
    bool mixed = false;
    auto scan = [&](const std::vector<LinkIndex>& links) {
      for (LinkIndex e : links) {
        if (first == static_cast<std::uint32_t>(-1)) first = assignment[e];
        else if (assignment[e] != first) mixed = true;
      }
    };
    scan(g.out_links[v]);
    scan(g.in_links[v]);
    if (mixed) {
      flags[v] = true;
      poppers.push_back(v);
    }
  }
  return poppers;
}

inline Partitioning derive_partitioning(const NetworkGraph& g,
                                        std::vector<std::uint32_t> assignment,
                                        std::size_t partition_count,
                                        std::size_t cap) {
  Partitioning p;
  p.max_partition_size = cap;
  p.partition_count = partition_count;
  p.assignment = std::move(assignment);
  p.partition_links.assign(partition_count, {});
  for (LinkIndex e = 0; e < p.assignment.size(); ++e)
    p.partition_links[p.assignment[e]].push_back(e);
  p.bit_of_link.assign(p.assignment.size(), 0);
  for (auto& links : p.partition_links) {
    if (links.size() > cap)
      throw std::logic_error("derive_partitioning: size cap violated");
    // ascending link-index order is already guaranteed by the fill loop
    for (std::size_t b = 0; b < links.size(); ++b)
      p.bit_of_link[links[b]] = static_cast<std::uint32_t>(b);
  }
  p.popper_nodes = compute_poppers(g, p.assignment, p.popper_flags);
  return p;
}

// One coarsening level of the connectivity graph used by the multilevel
// scheme: vertex traffic weight, link multiplicity, and directed adjacency.
struct Level {
  std::vector<double> weight;
  std::vector<std::uint32_t> mult;
  std::vector<std::vector<std::uint32_t>> out;
  std::vector<std::vector<std::uint32_t>> in;
  // Undirected weighted adjacency used only by heavy-edge matching. At the
  // finest level an edge carries tau_u + tau_v; merged edges sum.
  std::vector<std::vector<std::pair<std::uint32_t, double>>> und;
  std::vector<std::uint32_t> coarse_of;  // maps this level's vertices upward

  std::size_t size() const { return weight.size(); }

  void build_und() {
    const std::size_t n = size();
    std::vector<std::map<std::uint32_t, double>> acc(n);
    for (std::uint32_t v = 0; v < n; ++v)
      for (std::uint32_t u : out[v]) {
        const double w = weight[v] + weight[u];
        acc[v][u] += w;
        acc[u][v] += w;
      }
    und.assign(n, {});
    for (std::uint32_t v = 0; v < n; ++v)
      und[v].assign(acc[v].begin(), acc[v].end());
  }
};

inline Level level_from(const ConnectivityGraph& cg,
                        const std::vector<double>& vertex_weight) {
  Level l;
  const std::size_t n = cg.vertices.size();
  l.weight = vertex_weight;
  l.mult.resize(n);
  for (std::size_t v = 0; v < n; ++v)
    l.mult[v] = static_cast<std::uint32_t>(cg.vertices[v].member_links.size());
  l.out = cg.out_edges;
  l.in = cg.in_edges;
  l.build_und();
  return l;
}

// Heavy-edge matching on summed traffic weights, capped by multiplicity so
// a coarse vertex always still fits one partition.
inline Level coarsen(const Level& fine, std::size_t cap, std::mt19937_64& rng,
                     std::vector<std::uint32_t>& match_out) {
  const std::size_t n = fine.size();
  std::vector<std::uint32_t> visit(n);
  std::iota(visit.begin(), visit.end(), 0);
  std::shuffle(visit.begin(), visit.end(), rng);

  constexpr auto kUnmatched = static_cast<std::uint32_t>(-1);
  std::vector<std::uint32_t> mate(n, kUnmatched);
  for (std::uint32_t v : visit) {
    if (mate[v] != kUnmatched) continue;
    std::uint32_t best = kUnmatched;
    double best_w = -1;
    // Keep super-vertices small relative to the cap so the initial
    // partitioning can still pack them.
    const std::size_t grain = std::max<std::size_t>(1, cap / 8);
    for (const auto& [u, w] : fine.und[v]) {
      if (u == v || mate[u] != kUnmatched) continue;
      if (fine.mult[v] + fine.mult[u] > grain) continue;
      if (w > best_w || (w == best_w && u < best)) { best_w = w; best = u; }
    }
    if (best != kUnmatched) {
      mate[v] = best;
      mate[best] = v;
    }
  }

  match_out.assign(n, kUnmatched);
  std::uint32_t next = 0;
  for (std::uint32_t v = 0; v < n; ++v) {
    if (match_out[v] != kUnmatched) continue;
    match_out[v] = next;
    if (mate[v] != kUnmatched) match_out[mate[v]] = next;
    ++next;
  }

  Level coarse;
  coarse.weight.assign(next, 0);
  coarse.mult.assign(next, 0);
  coarse.out.assign(next, {});
  coarse.in.assign(next, {});
  for (std::uint32_t v = 0; v < n; ++v) {
    coarse.weight[match_out[v]] += fine.weight[v];
    coarse.mult[match_out[v]] += fine.mult[v];
  }
  for (std::uint32_t v = 0; v < n; ++v)
    for (std::uint32_t u : fine.out[v]) {
      std::uint32_t cv = match_out[v], cu = match_out[u];
      if (cv != cu) {
        coarse.out[cv].push_back(cu);
        coarse.in[cu].push_back(cv);
      }
    }
  auto dedup = [](std::vector<std::uint32_t>& v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
  };
  for (auto& v : coarse.out) dedup(v);
  for (auto& v : coarse.in) dedup(v);

  std::vector<std::map<std::uint32_t, double>> acc(next);
  for (std::uint32_t v = 0; v < n; ++v)
    for (const auto& [u, w] : fine.und[v]) {
      std::uint32_t cv = match_out[v], cu = match_out[u];
      if (cv != cu) acc[cv][cu] += w;  // both directions present in fine.und
    }
  coarse.und.assign(next, {});
  for (std::uint32_t v = 0; v < next; ++v)
    coarse.und[v].assign(acc[v].begin(), acc[v].end());
  return coarse;
}

// Communication-volume term of one vertex: weight * distinct out-neighbour
// partitions other than its own.
inline double vertex_volume(const Level& l,
                            const std::vector<std::uint32_t>& part,
                            std::uint32_t v, std::uint32_t pv) {
  std::set<std::uint32_t> others;
  for (std::uint32_t u : l.out[v])
    if (part[u] != pv) others.insert(part[u]);
  return l.weight[v] * static_cast<double>(others.size());
}

inline double total_volume(const Level& l,
                           const std::vector<std::uint32_t>& part) {
  double t = 0;
  for (std::uint32_t v = 0; v < l.size(); ++v)
    t += vertex_volume(l, part, v, part[v]);
  return t;
}

// Greedy region growing ("grow" initial partitioning): partitions are grown
// one at a time, each step adding the unassigned vertex most strongly
// attached to the region (ties toward the lowest id), under a hard size cap.
inline std::vector<std::uint32_t> initial_partition(const Level& l,
                                                    std::size_t k,
                                                    std::size_t cap,
                                                    std::mt19937_64& rng) {
  const std::size_t n = l.size();
  std::size_t total_mult = 0;
  for (auto m : l.mult) total_mult += m;
  if (k * cap < total_mult)
    throw std::invalid_argument("vertex_partition: k * cap < total vertex multiplicity");
  constexpr auto kUnassigned = static_cast<std::uint32_t>(-1);
  std::vector<std::uint32_t> part(n, kUnassigned);

  // Scan order doubles as the tie-break, so restarts explore different
  // regions even when weights are uniform.
  std::vector<std::uint32_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);

  // Grow toward the balanced target first; if super-vertex granularity leaves
  // unplaceable leftovers, retry with a looser target up to the cap.
  for (std::size_t target = std::min(cap, (total_mult + k - 1) / k);;
       target = std::min(cap, target + std::max<std::size_t>(1, target / 8))) {
    std::fill(part.begin(), part.end(), kUnassigned);
    std::vector<std::size_t> load(k, 0);
    std::vector<double> attach(n, 0.0);  // und-weight toward the growing region
    std::size_t assigned = 0;

    for (std::uint32_t p = 0; p < k && assigned < n; ++p) {
      std::fill(attach.begin(), attach.end(), 0.0);
      bool seeded = false;
      while (load[p] < target && assigned < n) {
        std::uint32_t v = kUnassigned;
        double best = -1;
        for (std::uint32_t u : order) {
          if (part[u] != kUnassigned || load[p] + l.mult[u] > target) continue;
          double score = seeded ? attach[u] : l.weight[u];
          if (score > best) { best = score; v = u; }
        }
        if (v == kUnassigned) break;  // nothing fits this partition anymore
        part[v] = p;
        load[p] += l.mult[v];
        ++assigned;
        seeded = true;
        for (const auto& [u, w] : l.und[v]) attach[u] += w;
      }
    }

    // Leftovers (possible with super-vertices): least-loaded partition with room.
    bool ok = true;
    for (std::uint32_t v = 0; v < n && ok; ++v) {
      if (part[v] != kUnassigned) continue;
      std::uint32_t best = kUnassigned;
      for (std::uint32_t p = 0; p < k; ++p)
        if (load[p] + l.mult[v] <= cap &&
            (best == kUnassigned || load[p] < load[best]))
          best = p;
      if (best == kUnassigned) {
        ok = false;
        break;
      }
      part[v] = best;
      load[best] += l.mult[v];
    }
    if (ok) return part;
    if (target >= cap)
      throw std::runtime_error("vertex_partition: infeasible k/cap combination");
  }
}

// Boundary-vertex refinement: first-improvement moves that strictly decrease
// totalv under the size cap; stops after a full pass without improvement.
inline void refine(const Level& l, std::vector<std::uint32_t>& part,
                   std::size_t k, std::size_t cap, std::mt19937_64& rng) {
  const std::size_t n = l.size();
  std::vector<std::size_t> load(k, 0);
  for (std::uint32_t v = 0; v < n; ++v) load[part[v]] += l.mult[v];

  std::vector<std::uint32_t> order(n);
  std::iota(order.begin(), order.end(), 0);

  bool improved = true;
  while (improved) {
    improved = false;
    std::shuffle(order.begin(), order.end(), rng);
    for (std::uint32_t v : order) {
      const std::uint32_t pv = part[v];
      std::set<std::uint32_t> candidates;
      for (std::uint32_t u : l.out[v]) candidates.insert(part[u]);
      for (std::uint32_t u : l.in[v]) candidates.insert(part[u]);
      candidates.erase(pv);
      if (candidates.empty()) continue;

      // Affected totalv terms: v itself plus v's in-neighbours.
      auto affected_volume = [&](std::uint32_t pv_now) {
        double t = vertex_volume(l, part, v, pv_now);
        for (std::uint32_t u : l.in[v])
          t += vertex_volume(l, part, u, u == v ? pv_now : part[u]);
        return t;
      };
      const double before = affected_volume(pv);
      std::uint32_t best_q = pv;
      double best_after = before;
      for (std::uint32_t q : candidates) {
        if (load[q] + l.mult[v] > cap) continue;
        part[v] = q;
        const double after = affected_volume(q);
        if (after < best_after) {
          best_after = after;
          best_q = q;
        }
        part[v] = pv;
      }
      if (best_q != pv) {
        part[v] = best_q;
        load[pv] -= l.mult[v];
        load[best_q] += l.mult[v];
        improved = true;
      }
    }

    // Pairwise swaps unblock tight caps, where every single move into the
    // profitable partition is full. Quadratic, so only at small sizes.
    if (n <= 64) {
      for (std::uint32_t u = 0; u < n; ++u) {
        for (std::uint32_t v = u + 1; v < n; ++v) {
          const std::uint32_t pu = part[u], pv2 = part[v];
          if (pu == pv2) continue;
          if (load[pu] - l.mult[u] + l.mult[v] > cap ||
              load[pv2] - l.mult[v] + l.mult[u] > cap)
            continue;
          std::set<std::uint32_t> affected{u, v};
          for (std::uint32_t w : l.in[u]) affected.insert(w);
          for (std::uint32_t w : l.in[v]) affected.insert(w);
          auto vol = [&]() {
            double t = 0;
            for (std::uint32_t w : affected)
              t += vertex_volume(l, part, w, part[w]);
            return t;
          };
          const double before = vol();
          part[u] = pv2;
          part[v] = pu;
          if (vol() < before - 1e-12) {
            load[pu] += l.mult[v] - l.mult[u];
            load[pv2] += l.mult[u] - l.mult[v];
            improved = true;
          } else {
            part[u] = pu;
            part[v] = pv2;
          }
        }
      }
    }
  }
}

// Popper-placement polish on the finest level: moves that keep totalv equal
// (within fp tolerance) but strictly reduce the number of switches with
// incident links in several partitions. Runs after refinement has converged,
// so totalv never increases.
inline void popper_polish(const NetworkGraph& g, const ConnectivityGraph& cg,
                          const Level& l, std::vector<std::uint32_t>& part,
                          std::size_t k, std::size_t cap) {
  const std::size_t n = l.size();
  std::vector<std::size_t> load(k, 0);
  for (std::uint32_t v = 0; v < n; ++v) load[part[v]] += l.mult[v];

  std::vector<std::uint32_t> link_part(g.links.size());
  auto sync_links = [&](std::uint32_t v) {
    for (LinkIndex e : cg.vertices[v].member_links) link_part[e] = part[v];
  };
  for (std::uint32_t v = 0; v < n; ++v) sync_links(v);

  auto node_is_split = [&](NodeId nd) {
    std::uint32_t first = static_cast<std::uint32_t>(-1);
    auto scan = [&](const std::vector<LinkIndex>& links) {
      for (LinkIndex e : links) {
        if (first == static_cast<std::uint32_t>(-1)) first = link_part[e];
        else if (link_part[e] != first) return true;
      }
      return false;
    };
    return scan(g.out_links[nd]) || scan(g.in_links[nd]);
  };

  // Group moves: pull every incident link of one switch into a single
  // partition at once. Single-vertex moves cannot un-split a well-connected
  // switch whose links are already spread out.
  auto try_node_moves = [&]() {
    bool any = false;
    for (NodeId nd = 0; nd < g.node_count; ++nd) {
      if (!node_is_split(nd)) continue;
      std::set<std::uint32_t> vs;
      std::set<std::uint32_t> present;
      for (LinkIndex e : g.out_links[nd]) { vs.insert(cg.vertex_of_link[e]); present.insert(link_part[e]); }
      for (LinkIndex e : g.in_links[nd]) { vs.insert(cg.vertex_of_link[e]); present.insert(link_part[e]); }

      std::set<std::uint32_t> affected(vs.begin(), vs.end());
      std::set<NodeId> touched;
      for (std::uint32_t v : vs) {
        for (std::uint32_t u : l.in[v]) affected.insert(u);
        for (LinkIndex e : cg.vertices[v].member_links) {
          touched.insert(g.links[e].src);
          touched.insert(g.links[e].dst);
        }
      }
      auto volume = [&]() {
        double t = 0;
        for (std::uint32_t v : affected) t += vertex_volume(l, part, v, part[v]);
        return t;
      };
      auto splits = [&]() {
        std::size_t s = 0;
        for (NodeId t : touched)
          if (node_is_split(t)) s += g.out_links[t].size() + g.in_links[t].size();
        return s;
      };
      const double vol_before = volume();
      const std::size_t split_before = splits();
      std::vector<std::uint32_t> saved;
      for (std::uint32_t v : vs) saved.push_back(part[v]);

      for (std::uint32_t q : present) {
        std::size_t extra = 0;
        for (std::uint32_t v : vs)
          if (part[v] != q) extra += l.mult[v];
        if (extra == 0 || load[q] + extra > cap) continue;
        for (std::uint32_t v : vs) { part[v] = q; sync_links(v); }
        if (volume() <= vol_before + 1e-12 && splits() < split_before) {
          std::size_t i = 0;
          for (std::uint32_t v : vs) {
            load[saved[i++]] -= l.mult[v];
            load[q] += l.mult[v];
          }
          any = true;
          break;
        }
        std::size_t i = 0;
        for (std::uint32_t v : vs) { part[v] = saved[i++]; sync_links(v); }
      }
    }
    return any;
  };

  bool improved = true;
  while (improved) {
    improved = try_node_moves();
    for (std::uint32_t v = 0; v < n; ++v) {
      const std::uint32_t pv = part[v];
      std::set<std::uint32_t> candidates;
      for (std::uint32_t u : l.out[v]) candidates.insert(part[u]);
      for (std::uint32_t u : l.in[v]) candidates.insert(part[u]);
      std::set<NodeId> touched;
      for (LinkIndex e : cg.vertices[v].member_links) {
        touched.insert(g.links[e].src);
        touched.insert(g.links[e].dst);
      }
      for (NodeId nd : touched) {
        for (LinkIndex e : g.out_links[nd]) candidates.insert(link_part[e]);
        for (LinkIndex e : g.in_links[nd]) candidates.insert(link_part[e]);
      }
      candidates.erase(pv);
      if (candidates.empty()) continue;

      auto affected_volume = [&](std::uint32_t pv_now) {
        double t = vertex_volume(l, part, v, pv_now);
        for (std::uint32_t u : l.in[v]) t += vertex_volume(l, part, u, part[u]);
        return t;
      };
      // Split switches are weighted by degree: shortest paths concentrate on
      // well-connected switches, so un-splitting those pays off the most.
      auto splits = [&]() {
        std::size_t s = 0;
        for (NodeId nd : touched)
          if (node_is_split(nd))
            s += g.out_links[nd].size() + g.in_links[nd].size();
        return s;
      };
      const double vol_before = affected_volume(pv);
      const std::size_t split_before = splits();
      for (std::uint32_t q : candidates) {
        if (load[q] + l.mult[v] > cap) continue;
        part[v] = q;
        sync_links(v);
        if (affected_volume(q) <= vol_before + 1e-12 && splits() < split_before) {
          load[pv] -= l.mult[v];
          load[q] += l.mult[v];
          improved = true;
          break;
        }
        part[v] = pv;
        sync_links(v);
      }
    }
  }
}

}  // namespace detail

// Multilevel k-way vertex partitioning of a connectivity graph: heavy-edge
// coarsening, greedy region growing, totalv-decreasing boundary refinement.
// vertex_weight overrides the connectivity graph's own weights.
inline std::vector<std::uint32_t> vertex_partition(
    const ConnectivityGraph& cg, const std::vector<double>& vertex_weight,
    std::size_t k, std::size_t cap, std::uint64_t seed) {
  if (k < 1) throw std::invalid_argument("vertex_partition: k < 1");
  if (vertex_weight.size() != cg.vertices.size())
    throw std::invalid_argument("vertex_partition: weight size mismatch");

  std::mt19937_64 rng(seed);
  std::vector<detail::Level> levels;
  levels.push_back(detail::level_from(cg, vertex_weight));

  const std::size_t coarse_target = std::max<std::size_t>(2 * k, 64);
  while (levels.back().size() > coarse_target) {
    std::vector<std::uint32_t> match;
    detail::Level coarse = detail::coarsen(levels.back(), cap, rng, match);
    if (coarse.size() >= levels.back().size()) break;  // no progress
    levels.back().coarse_of = std::move(match);
    levels.push_back(std::move(coarse));
  }

  std::vector<std::uint32_t> part =
      detail::initial_partition(levels.back(), k, cap, rng);
  detail::refine(levels.back(), part, k, cap, rng);

  for (std::size_t li = levels.size() - 1; li-- > 0;) {
    std::vector<std::uint32_t> fine_part(levels[li].size());
    for (std::uint32_t v = 0; v < levels[li].size(); ++v)
      fine_part[v] = part[levels[li].coarse_of[v]];
    part = std::move(fine_part);
    detail::refine(levels[li], part, k, cap, rng);
  }

  // Tiny instances sit in rugged landscapes where single moves and swaps
  // stall; perturb a few vertices and re-refine, keeping improvements.
  const detail::Level& l0 = levels.front();
  if (l0.size() <= 64 && k > 1) {
    double best_vol = detail::total_volume(l0, part);
    for (int kick = 0; kick < 16; ++kick) {
      std::vector<std::uint32_t> cand = part;
      std::vector<std::size_t> load(k, 0);
      for (std::uint32_t v = 0; v < l0.size(); ++v) load[cand[v]] += l0.mult[v];
      const std::size_t moves = 1 + rng() % 3;
      for (std::size_t i = 0; i < moves; ++i) {
        const std::uint32_t v = static_cast<std::uint32_t>(rng() % l0.size());
        const std::uint32_t q = static_cast<std::uint32_t>(rng() % k);
        if (q == cand[v] || load[q] + l0.mult[v] > cap) continue;
        load[cand[v]] -= l0.mult[v];
        load[q] += l0.mult[v];
        cand[v] = q;
      }
      detail::refine(l0, cand, k, cap, rng);
      const double vol = detail::total_volume(l0, cand);
      if (vol < best_vol - 1e-12) {
        best_vol = vol;
        part = std::move(cand);
      }
    }
  }
  return part;
}

// Requested partition count: ceil((|E| / cap) * nu), at least 1.
inline std::size_t jigsaw_partition_count(std::size_t link_count,
                                          const PartitionConfig& cfg) {
  double raw = static_cast<double>(link_count) / cfg.max_partition_size *
               cfg.imbalance;
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(raw - 1e-9)));
}

// Jigsaw: traffic-aware balanced edge partitioning via vertex partitioning
// of the connectivity graph. `weights` maps each directed link to its
// traffic weight; ignored when cfg.traffic_aware is false. `legacy` lists
// switches that cannot pop; their incident links are collapsed first.
inline Partitioning jigsaw(const NetworkGraph& g,
                           const std::vector<double>& weights,
                           const PartitionConfig& cfg,
                           const std::vector<NodeId>& legacy = {}) {
  cfg.validate();
  if (g.links.empty()) throw std::invalid_argument("jigsaw: empty graph");
  if (cfg.traffic_aware && weights.size() != g.links.size())
    throw std::invalid_argument("jigsaw: weights must cover all links");

  std::vector<double> w(g.links.size(), 1.0);
  if (cfg.traffic_aware) w = weights;

  ConnectivityGraph cg = build_connectivity_graph(g);
  for (std::size_t v = 0; v < cg.vertices.size(); ++v)
    cg.vertices[v].weight = w[cg.vertices[v].member_links.front()];
  if (!legacy.empty())
    cg = collapse_legacy(cg, g, legacy, cfg.max_partition_size);

  std::vector<double> vertex_weight(cg.vertices.size(), 0);
  for (std::size_t v = 0; v < cg.vertices.size(); ++v)
    for (LinkIndex e : cg.vertices[v].member_links)
      vertex_weight[v] += w[e];

  const std::size_t k = jigsaw_partition_count(g.links.size(), cfg);
  const detail::Level l0 = detail::level_from(cg, vertex_weight);

  // Restarts with derived seeds; each result gets a popper placement polish,
  // then the best (totalv, popper count) wins. Small instances are cheap to
  // re-solve and benefit the most from restart diversity.
  const std::size_t kRestarts =
      cg.vertices.size() <= 64 ? 128 : cg.vertices.size() <= 512 ? 32 : 4;
  std::vector<std::uint32_t> best_assignment;
  double best_vol = 0;
  std::size_t best_poppers = 0;
  for (std::size_t r = 0; r < kRestarts; ++r) {
    const std::uint64_t restart_seed =
        cfg.seed ^ (0x9E3779B97F4A7C15ull * (r + 1));
    std::vector<std::uint32_t> vpart = vertex_partition(
        cg, vertex_weight, k, cfg.max_partition_size, restart_seed);
    detail::popper_polish(g, cg, l0, vpart, k, cfg.max_partition_size);
    const double vol = detail::total_volume(l0, vpart);

    std::vector<std::uint32_t> assignment(g.links.size());
    for (std::size_t v = 0; v < cg.vertices.size(); ++v)
      for (LinkIndex e : cg.vertices[v].member_links) assignment[e] = vpart[v];
    std::vector<bool> flags;
    std::size_t poppers = 0;
    for (NodeId v : detail::compute_poppers(g, assignment, flags))
      poppers += g.out_links[v].size() + g.in_links[v].size();
    if (best_assignment.empty() || vol < best_vol - 1e-9 ||
        (vol <= best_vol + 1e-9 && poppers < best_poppers)) {
      best_assignment = std::move(assignment);
      best_vol = vol;
      best_poppers = poppers;
    }
  }
  return detail::derive_partitioning(g, std::move(best_assignment), k,
                                     cfg.max_partition_size);
}

// Powergraph baseline: greedy streaming placement minimising introduced
// endpoint replication, oversized partitions re-split recursively.
inline Partitioning powergraph_partition(const NetworkGraph& g,
                                         std::size_t target,
                                         std::uint64_t /*seed*/ = 0) {
  if (target < 1)
    throw std::invalid_argument("powergraph_partition: target < 1");
  if (g.links.empty())
    throw std::invalid_argument("powergraph_partition: empty graph");

  auto greedy = [&](const std::vector<LinkIndex>& links, std::size_t k,
                    std::size_t cap) {
    std::vector<std::uint32_t> out(links.size());
    std::vector<std::size_t> load(k, 0);
    std::vector<std::vector<bool>> present(k,
                                           std::vector<bool>(g.node_count, false));
    for (std::size_t i = 0; i < links.size(); ++i) {
      const auto& link = g.links[links[i]];
      std::uint32_t best = static_cast<std::uint32_t>(-1);
      int best_rep = 3;
      for (std::uint32_t p = 0; p < k; ++p) {
        if (cap && load[p] >= cap) continue;
        int rep = (!present[p][link.src]) + (!present[p][link.dst]);
        if (rep < best_rep ||
            (rep == best_rep && best != static_cast<std::uint32_t>(-1) &&
             load[p] < load[best])) {
          best_rep = rep;
          best = p;
        }
      }
      if (best == static_cast<std::uint32_t>(-1))
        throw std::runtime_error("powergraph_partition: no partition with room");
      out[i] = best;
      load[best]++;
      present[best][link.src] = present[best][link.dst] = true;
    }
    return out;
  };

  const std::size_t k0 = (g.links.size() + target - 1) / target;
  std::vector<LinkIndex> all(g.links.size());
  std::iota(all.begin(), all.end(), 0);
  std::vector<std::uint32_t> assignment(g.links.size());
  auto first = greedy(all, k0, 0);  // classic heuristic, uncapped
  for (std::size_t i = 0; i < all.size(); ++i) assignment[i] = first[i];
  std::size_t partition_count = k0;

  // Re-split any partition that exceeds the target, capped this time.
  for (std::uint32_t p = 0; p < partition_count; ++p) {
    std::vector<LinkIndex> members;
    for (LinkIndex e = 0; e < g.links.size(); ++e)
      if (assignment[e] == p) members.push_back(e);
    if (members.size() <= target) continue;
    const std::size_t sub_k = (members.size() + target - 1) / target;
    auto sub = greedy(members, sub_k, target);
    std::vector<std::uint32_t> sub_pid(sub_k);
    sub_pid[0] = p;
    for (std::size_t s = 1; s < sub_k; ++s)
      sub_pid[s] = static_cast<std::uint32_t>(partition_count++);
    for (std::size_t i = 0; i < members.size(); ++i)
      assignment[members[i]] = sub_pid[sub[i]];
  }
  return detail::derive_partitioning(g, std::move(assignment), partition_count,
                                     target);
}

// phi_e: distinct next-hop partitions a packet traversing link e may enter,
// excluding e's own partition; next hops exclude the reverse link.
inline std::uint32_t phi(const NetworkGraph& g, const Partitioning& p,
                         LinkIndex e) {
  const auto& link = g.links[e];
  std::set<std::uint32_t> parts;
  for (LinkIndex next : g.out_links[link.dst]) {
    if (g.links[next].dst == link.src) continue;
    if (p.assignment[next] != p.assignment[e]) parts.insert(p.assignment[next]);
  }
  return static_cast<std::uint32_t>(parts.size());
}

// totalv and popper statistics of a partitioning, evaluated over the given
// connectivity graph's vertex weights.
inline PartitionQuality quality(const NetworkGraph& g, const Partitioning& p,
                                const ConnectivityGraph& cg) {
  PartitionQuality q;
  for (const auto& v : cg.vertices) {
    const std::uint32_t pv = p.assignment[v.member_links.front()];
    for (LinkIndex e : v.member_links)
      if (p.assignment[e] != pv)
        throw std::invalid_argument("quality: super-vertex split across partitions");
  }
  for (std::size_t v = 0; v < cg.vertices.size(); ++v) {
    const std::uint32_t pv = p.assignment[cg.vertices[v].member_links.front()];
    std::set<std::uint32_t> others;
    for (std::uint32_t u : cg.out_edges[v]) {
      std::uint32_t pu = p.assignment[cg.vertices[u].member_links.front()];
      if (pu != pv) others.insert(pu);
    }
    q.totalv += cg.vertices[v].weight * static_cast<double>(others.size());
  }
  q.phi.resize(g.links.size());
  for (LinkIndex e = 0; e < g.links.size(); ++e) q.phi[e] = phi(g, p, e);

  std::vector<bool> flags;
  auto poppers = detail::compute_poppers(g, p.assignment, flags);
  if (poppers != p.popper_nodes)
    throw std::logic_error("quality: stored popper set inconsistent with assignment");
  q.popper_count = poppers.size();

  q.max_fill = 0;
  q.min_fill = p.assignment.size();
  for (const auto& links : p.partition_links) {
    q.max_fill = std::max(q.max_fill, links.size());
    q.min_fill = std::min(q.min_fill, links.size());
  }
  return q;
}

// One-bit link identifiers: m = max partition size, each link gets its
// unique bit within its partition.
inline LinkIdAssignment one_bit_ids_for(const Partitioning& p) {
  LinkIdAssignment a{LinkIdMode::one_bit, p.max_partition_size, 1, {}};
  a.ids.reserve(p.assignment.size());
  for (LinkIndex e = 0; e < p.assignment.size(); ++e) {
    BitFilter id(p.max_partition_size);
    id.set(p.bit_of_link[e]);
    a.ids.push_back(std::move(id));
  }
  return a;
}

}  // namespace xbf
