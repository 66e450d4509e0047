#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "bierstar/geogrid.hpp"
#include "bierstar/membership.hpp"
#include "bierstar/routing/protocol.hpp"
#include "bierstar/terminals.hpp"

namespace bierstar {

// ---------------------------------------------------------------------------
// Bitstring baselines

inline std::size_t traditional_bitstring_bits(std::size_t terminal_count) { return terminal_count; }

enum class PartitionKind { GeoCells, SatFootprint };

struct PartitionScheme {
  PartitionKind kind = PartitionKind::GeoCells;
  int resolution = 0;  // GeoCells only

  static PartitionScheme geo(int r) { return {PartitionKind::GeoCells, r}; }
  static PartitionScheme sat_footprint() { return {PartitionKind::SatFootprint, 0}; }
};

struct SegmentedResult {
  std::size_t bits = 0;            // largest partition
  std::size_t partitions = 0;
  std::size_t uncovered = 0;       // SatFootprint terminals with no serving satellite
  int segment_id_bits = 0;         // bits to name one segment
};

inline SegmentedResult segmented_bitstring_bits(const std::vector<GeoPoint>& terminals, const PartitionScheme& scheme,
                                                const Snapshot* snap = nullptr, double mask_deg = 25.0) {
  SegmentedResult res;
  std::map<std::uint64_t, std::size_t> count;
  if (scheme.kind == PartitionKind::GeoCells) {
    for (const auto& p : terminals) ++count[cell_index(p, scheme.resolution).index];
    res.segment_id_bits = hex_bits(scheme.resolution);
  } else {
    if (!snap) fail(ErrorKind::InvalidArgument, "satellite-footprint partitioning needs a snapshot");
    for (const auto& p : terminals) {
      if (auto s = find_serving_satellite(p, *snap, mask_deg)) {
        ++count[static_cast<std::uint64_t>(*s)];
      } else {
        ++res.uncovered;
      }
    }
    const std::size_t n = snap->sats.size();
    res.segment_id_bits = n <= 1 ? 0 : static_cast<int>(std::bit_width(n - 1));
  }
  res.partitions = count.size();
  for (const auto& [k, c] : count) res.bits = std::max(res.bits, c);
  return res;
}

// ---------------------------------------------------------------------------
// Greedy geographic forwarding (approximations of geographic baselines)

enum class GreedyKind { PureGreedy, GreedyWithSwitch, GreedyPerimeter };

struct GreedyVariant {
  GreedyKind kind = GreedyKind::PureGreedy;
  double switch_slack_km = 250.0;  // GreedyWithSwitch: lateral move may lose this much
  int perimeter_steps = 4;         // GreedyPerimeter: recovery walk length
};

inline std::string to_string(GreedyKind k) {
  switch (k) {
    case GreedyKind::PureGreedy: return "PureGreedy";
    case GreedyKind::GreedyWithSwitch: return "GreedyWithSwitch";
    case GreedyKind::GreedyPerimeter: return "GreedyPerimeter";
  }
  return "?";
}

// Strict-progress step: the live, unvisited neighbor closest to the target, if
// it is closer than `current`.
inline std::optional<NodeId> greedy_next_hop(NodeId current, const GeoPoint& target, const Snapshot& snap,
                                             const std::set<NodeId>& visited, const Failures& f = {}) {
  const double here = great_circle_km(snap.sats[static_cast<std::size_t>(current)].sub, target);
  std::optional<NodeId> best;
  double best_d = here;
  for (const Link& l : snap.adj[static_cast<std::size_t>(current)]) {
    if (!f.link_up(current, l.to) || visited.count(l.to)) continue;
    const double d = great_circle_km(snap.sats[static_cast<std::size_t>(l.to)].sub, target);
    if (d < best_d) {
      best_d = d;
      best = l.to;
    }
  }
  return best;
}

struct GreedyWalk {
  std::vector<NodeId> path;
  bool reached = false;
};

// One unicast walk from src to dst under the variant's rules.
inline GreedyWalk greedy_walk(const GreedyVariant& v, NodeId src, NodeId dst, const Snapshot& snap, const Failures& f = {}) {
  const GeoPoint target = snap.sats[static_cast<std::size_t>(dst)].sub;
  auto dist = [&](NodeId n) { return great_circle_km(snap.sats[static_cast<std::size_t>(n)].sub, target); };
  GreedyWalk w;
  w.path.push_back(src);
  std::set<NodeId> visited{src};
  bool switched = false;
  while (w.path.back() != dst) {
    const NodeId cur = w.path.back();
    if (auto nxt = greedy_next_hop(cur, target, snap, visited, f)) {
      w.path.push_back(*nxt);
      visited.insert(*nxt);
      continue;
    }
    if (v.kind == GreedyKind::GreedyWithSwitch && !switched) {
      // one lateral move, to the best unvisited neighbor within the slack
      std::optional<NodeId> side;
      double side_d = dist(cur) + v.switch_slack_km;
      for (const Link& l : snap.adj[static_cast<std::size_t>(cur)]) {
        if (!f.link_up(cur, l.to) || visited.count(l.to)) continue;
        if (const double d = dist(l.to); d <= side_d) {
          side_d = d;
          side = l.to;
        }
      }
      if (side) {
        switched = true;
        w.path.push_back(*side);
        visited.insert(*side);
        continue;
      }
    }
    if (v.kind == GreedyKind::GreedyPerimeter) {
      // right-hand walk: take the first live neighbor counter-clockwise from
      // the bearing to the target, until something beats the stuck distance
      const double stuck = dist(cur);
      bool recovered = false;
      for (int step = 0; step < v.perimeter_steps; ++step) {
        const NodeId at = w.path.back();
        const GeoPoint here = snap.sats[static_cast<std::size_t>(at)].sub;
        const double ref = bearing(here, target);
        std::optional<NodeId> pick;
        double pick_turn = 0;
        for (const Link& l : snap.adj[static_cast<std::size_t>(at)]) {
          if (!f.link_up(at, l.to) || visited.count(l.to)) continue;
          double turn = std::fmod(ref - bearing(here, snap.sats[static_cast<std::size_t>(l.to)].sub), 2 * kPi);
          if (turn < 0) turn += 2 * kPi;
          if (!pick || turn < pick_turn) {
            pick = l.to;
            pick_turn = turn;
          }
        }
        if (!pick) break;
        w.path.push_back(*pick);
        visited.insert(*pick);
        if (*pick == dst || dist(*pick) < stuck) {
          recovered = true;
          break;
        }
      }
      if (recovered) continue;
    }
    return w;  // stuck
  }
  w.reached = true;
  return w;
}

// Per-destination walks merged on shared prefixes; a node replicates once per
// distinct continuation.
inline DeliveryReport greedy_multicast(const GreedyVariant& v, NodeId src, const std::set<NodeId>& dests, const Snapshot& snap,
                                       const Failures& f = {}) {
  DeliveryReport rep;
  std::map<NodeId, std::set<NodeId>> next;
  for (NodeId d : dests) {
    const GreedyWalk w = greedy_walk(v, src, d, snap, f);
    for (std::size_t k = 0; k + 1 < w.path.size(); ++k) next[w.path[k]].insert(w.path[k + 1]);
    if (w.reached) {
      rep.delivered.insert(d);
      rep.hops[d] = static_cast<int>(w.path.size()) - 1;
    }
  }
  for (const auto& [n, outs] : next) {
    rep.transmissions += static_cast<int>(outs.size());
    if (outs.size() > 1) rep.replications += static_cast<int>(outs.size()) - 1;
  }
  return rep;
}

}  // namespace bierstar
