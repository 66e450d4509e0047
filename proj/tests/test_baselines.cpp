#include <gtest/gtest.h>

#include <map>

#include "bierstar/baselines.hpp"
#include "support.hpp"

using namespace bierstar;
using bierstar::testing::custom_snapshot;

namespace {

std::size_t brute_max_partition(const std::vector<GeoPoint>& pts, int r) {
  std::map<CellId, std::size_t> n;
  std::size_t best = 0;
  for (const auto& p : pts) best = std::max(best, ++n[cell_index(p, r)]);
  return best;
}

std::vector<GeoPoint> points_of(const std::vector<Terminal>& ts) {
  std::vector<GeoPoint> out;
  for (const auto& t : ts) out.push_back(t.track[0].where);
  return out;
}

}  // namespace

TEST(Traditional, OneBitPerTerminal) {
  EXPECT_EQ(traditional_bitstring_bits(1000), 1000u);
  EXPECT_EQ(traditional_bitstring_bits(0), 0u);
  EXPECT_EQ(traditional_bitstring_bits(12345), 12345u);
}

TEST(Segmented, SingleCellHoldsEveryone) {
  const std::vector<GeoPoint> pts(37, GeoPoint{48.85, 2.35});
  const auto r = segmented_bitstring_bits(pts, PartitionScheme::geo(0));
  EXPECT_EQ(r.bits, 37u);
  EXPECT_EQ(r.partitions, 1u);
  EXPECT_EQ(r.segment_id_bits, 7);
}

TEST(Segmented, OnePerCell) {
  std::vector<GeoPoint> pts;
  for (std::uint64_t k = 0; k < 122; k += 3) pts.push_back(cell_center(hex_cell(0, k)));
  const auto r = segmented_bitstring_bits(pts, PartitionScheme::geo(0));
  EXPECT_EQ(r.bits, 1u);
  EXPECT_EQ(r.partitions, pts.size());
}

TEST(Segmented, RefinementNeverGrowsTheLargestSegment) {
  Rng rng(4);
  const auto pts = points_of(clustered_terminals(10000, {{48.8566, 2.3522}}, 100, rng));
  const auto r0 = segmented_bitstring_bits(pts, PartitionScheme::geo(0));
  const auto r1 = segmented_bitstring_bits(pts, PartitionScheme::geo(1));
  EXPECT_EQ(r0.bits, brute_max_partition(pts, 0));
  EXPECT_EQ(r1.bits, brute_max_partition(pts, 1));
  EXPECT_LE(r1.bits, r0.bits);
}

TEST(Segmented, SatFootprintGroupsByServingSatellite) {
  const Constellation c = build_walker(starlink_like_shell());
  const Snapshot s = propagate(c, 0);
  Rng rng(6);
  const auto pts = points_of(uniform_sphere_terminals(2000, rng));
  const auto r = segmented_bitstring_bits(pts, PartitionScheme::sat_footprint(), &s, 25);
  std::map<NodeId, std::size_t> n;
  std::size_t uncovered = 0, best = 0;
  for (const auto& p : pts) {
    if (auto sat = find_serving_satellite(p, s, 25)) {
      best = std::max(best, ++n[*sat]);
    } else {
      ++uncovered;
    }
  }
  EXPECT_EQ(r.bits, best);
  EXPECT_EQ(r.uncovered, uncovered);
  EXPECT_EQ(r.partitions, n.size());
  EXPECT_EQ(r.segment_id_bits, 11);  // 1584 satellites
  EXPECT_THROW(segmented_bitstring_bits(pts, PartitionScheme::sat_footprint()), Error);
}

TEST(Greedy, PicksAlignedNeighbour) {
  const auto g = custom_snapshot({{0, 0}, {2, 0}, {0, 2}, {-2, 0}, {0, -2}}, {{0, 1}, {0, 2}, {0, 3}, {0, 4}});
  EXPECT_EQ(greedy_next_hop(0, {0, 10}, g.snap, {0}), 2);
  EXPECT_EQ(greedy_next_hop(0, {10, 0}, g.snap, {0}), 1);
  EXPECT_EQ(greedy_next_hop(0, {0, -10}, g.snap, {0}), 4);
  // visited neighbours are skipped
  EXPECT_EQ(greedy_next_hop(0, {10, 0}, g.snap, {0, 1}), std::nullopt);
  // already at the target
  EXPECT_EQ(greedy_next_hop(0, {0, 0}, g.snap, {0}), std::nullopt);
  const auto w = greedy_walk({}, 0, 0, g.snap);
  EXPECT_TRUE(w.reached);
  EXPECT_EQ(w.path.size(), 1u);
}

TEST(Greedy, ArgminOnStarlink) {
  const Constellation c = build_walker(starlink_like_shell());
  const Snapshot s = propagate(c, 100);
  Rng rng(12);
  for (int k = 0; k < 300; ++k) {
    const NodeId cur = static_cast<NodeId>(rng.below(static_cast<std::uint64_t>(s.size())));
    const GeoPoint tgt = random_sphere_point(rng);
    const auto got = greedy_next_hop(cur, tgt, s, {cur});
    double best = great_circle_km(s.sats[static_cast<std::size_t>(cur)].sub, tgt);
    std::optional<NodeId> want;
    for (const Link& l : s.adj[static_cast<std::size_t>(cur)]) {
      const double d = great_circle_km(s.sats[static_cast<std::size_t>(l.to)].sub, tgt);
      if (d < best) best = d, want = l.to;
    }
    EXPECT_EQ(got, want);
  }
}

TEST(Greedy, StraightLineReachesAll) {
  const auto g = custom_snapshot({{0, 0}, {0, 5}, {0, 10}, {0, 15}}, {{0, 1}, {1, 2}, {2, 3}});
  for (auto kind : {GreedyKind::PureGreedy, GreedyKind::GreedyWithSwitch, GreedyKind::GreedyPerimeter}) {
    const DeliveryReport rep = greedy_multicast({kind}, 0, {2, 3}, g.snap);
    EXPECT_EQ(rep.delivered, (std::set<NodeId>{2, 3}));
    EXPECT_EQ(rep.transmissions, 3);
    EXPECT_EQ(rep.hops.at(3), 3);
  }
}

TEST(Greedy, BranchesAtDivergence) {
  const auto g = custom_snapshot({{0, 0}, {0, 10}, {10, 20}, {-10, 20}}, {{0, 1}, {1, 2}, {1, 3}});
  const DeliveryReport rep = greedy_multicast({}, 0, {2, 3}, g.snap);
  EXPECT_EQ(rep.delivered.size(), 2u);
  EXPECT_EQ(rep.transmissions, 3);
  EXPECT_EQ(rep.replications, 1);
}

TEST(Greedy, LocalMinimumAndRecoveries) {
  // 0 is stuck: its only links lead away from the target, while a detour exists
  //   target 3 at lon 10; 0 at lon 0 links to 1 (north-west) and 1 to 2, 2 to 3
  const auto g = custom_snapshot({{0, 0}, {3, -0.5}, {6, 5}, {0, 10}}, {{0, 1}, {1, 2}, {2, 3}});
  EXPECT_FALSE(greedy_walk({GreedyKind::PureGreedy}, 0, 3, g.snap).reached);
  EXPECT_TRUE(greedy_walk({GreedyKind::GreedyWithSwitch, 400.0}, 0, 3, g.snap).reached);
  EXPECT_FALSE(greedy_walk({GreedyKind::GreedyWithSwitch, 10.0}, 0, 3, g.snap).reached);
  EXPECT_TRUE(greedy_walk({GreedyKind::GreedyPerimeter}, 0, 3, g.snap).reached);
}

TEST(Greedy, SeamDefeatsPureGreedyOnOneWeb) {
  const Constellation c = build_walker(oneweb_like_shell());
  const Snapshot s = propagate(c, 0);
  const int S = 36;
  int stuck = 0;
  std::set<NodeId> dests;
  NodeId src = -1;
  // plane 0 and plane 17 run side by side in opposite directions across the seam
  for (int slot = 0; slot < S && stuck < 3; ++slot) {
    const NodeId a = slot;
    NodeId b = -1;
    double best = 1e9;
    for (int k = 0; k < S; ++k) {
      const NodeId cand = 17 * S + k;
      const double d = great_circle_km(s.sats[static_cast<std::size_t>(a)].sub, s.sats[static_cast<std::size_t>(cand)].sub);
      if (d < best) best = d, b = cand;
    }
    const auto w = greedy_walk({GreedyKind::PureGreedy}, a, b, s);
    if (!w.reached) {
      // exhaustive search: a path exists in the connected constellation
      EXPECT_TRUE(shortest_path_tree(s, a).reachable(b));
      ++stuck;
      if (src < 0) src = a;
      if (a == src) dests.insert(b);
    }
  }
  EXPECT_GE(stuck, 1);
  ASSERT_GE(src, 0);
  dests.insert(src + 1);
  const DeliveryReport rep = greedy_multicast({GreedyKind::PureGreedy}, src, dests, s);
  EXPECT_LT(reach_rate(rep.delivered, dests), 1.0);
  for (NodeId d : rep.delivered) EXPECT_TRUE(dests.count(d));
}

TEST(Greedy, DeliveredIsSubsetOfDestinations) {
  const Constellation c = build_walker(oneweb_like_shell());
  const Snapshot s = propagate(c, 700);
  Rng rng(9);
  for (int k = 0; k < 30; ++k) {
    std::set<NodeId> dests;
    while (dests.size() < 8) dests.insert(static_cast<NodeId>(rng.below(static_cast<std::uint64_t>(s.size()))));
    const NodeId src = static_cast<NodeId>(rng.below(static_cast<std::uint64_t>(s.size())));
    for (auto kind : {GreedyKind::PureGreedy, GreedyKind::GreedyWithSwitch, GreedyKind::GreedyPerimeter}) {
      const DeliveryReport rep = greedy_multicast({kind}, src, dests, s);
      for (NodeId d : rep.delivered) EXPECT_TRUE(dests.count(d));
    }
  }
}
