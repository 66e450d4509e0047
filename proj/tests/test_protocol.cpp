#include <gtest/gtest.h>

#include <map>
#include <set>

#include "bierstar/routing/protocol.hpp"
#include "support.hpp"

using namespace bierstar;
using bierstar::testing::custom_snapshot;
using bierstar::testing::random_geometric;

namespace {

std::vector<double> bellman_ford(const Snapshot& s, NodeId src) {
  std::vector<double> d(s.sats.size(), kInf);
  d[static_cast<std::size_t>(src)] = 0;
  for (std::size_t it = 0; it < s.sats.size(); ++it) {
    bool changed = false;
    for (const Edge& e : s.edges) {
      const auto a = static_cast<std::size_t>(e.a), b = static_cast<std::size_t>(e.b);
      if (d[a] + e.km < d[b]) d[b] = d[a] + e.km, changed = true;
      if (d[b] + e.km < d[a]) d[a] = d[b] + e.km, changed = true;
    }
    if (!changed) break;
  }
  return d;
}

double path_cost(const Snapshot& s, const std::vector<NodeId>& path) {
  double c = 0;
  for (std::size_t k = 1; k < path.size(); ++k) {
    bool edge = false;
    for (const Link& l : s.adj[static_cast<std::size_t>(path[k - 1])])
      if (l.to == path[k]) c += l.km, edge = true;
    EXPECT_TRUE(edge) << path[k - 1] << "-" << path[k];
  }
  return c;
}

std::set<NodeId> reachable_from(const Snapshot& s, NodeId src) {
  const Spt t = shortest_path_tree(s, src);
  std::set<NodeId> out;
  for (NodeId n = 0; n < s.size(); ++n)
    if (t.reachable(n)) out.insert(n);
  return out;
}

std::set<NodeId> pick(const std::set<NodeId>& from, std::size_t k, Rng& rng) {
  std::vector<NodeId> v(from.begin(), from.end());
  std::set<NodeId> out;
  while (out.size() < std::min(k, v.size())) out.insert(v[rng.below(v.size())]);
  return out;
}

// S -> F1 -> F2, then F2 branches to D1 and D2.
bierstar::testing::Custom branching() {
  return custom_snapshot({{0, 0}, {0, 15}, {0, 30}, {15, 45}, {-15, 45}}, {{0, 1}, {1, 2}, {2, 3}, {2, 4}});
}

const Snapshot& starlink_at(double t) {
  static std::map<double, std::pair<std::unique_ptr<Constellation>, Snapshot>> cache;
  auto it = cache.find(t);
  if (it == cache.end()) {
    auto con = std::make_unique<Constellation>(build_walker(starlink_like_shell()));
    Snapshot s = propagate(*con, t);
    it = cache.emplace(t, std::make_pair(std::move(con), std::move(s))).first;
  }
  return it->second.second;
}

}  // namespace

TEST(Spt, LineGraph) {
  const auto g = custom_snapshot({{0, 0}, {0, 5}, {0, 10}}, {{0, 1}, {1, 2}});
  const Spt t = shortest_path_tree(g.snap, 0);
  EXPECT_EQ(t.parent[1], 0);
  EXPECT_EQ(t.parent[2], 1);
  EXPECT_EQ(reconstruct_path(t, 2), (std::vector<NodeId>{0, 1, 2}));
  EXPECT_EQ(reconstruct_path(t, 0), (std::vector<NodeId>{0}));
}

TEST(Spt, IsolatedSource) {
  const auto g = custom_snapshot({{0, 0}, {0, 5}, {0, 10}}, {{1, 2}});
  const Spt t = shortest_path_tree(g.snap, 0);
  EXPECT_FALSE(t.reachable(1));
  EXPECT_FALSE(t.reachable(2));
  EXPECT_EQ(t.parent[1], -1);
  try {
    reconstruct_path(t, 2);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Unreachable);
  }
}

TEST(Spt, EqualCostTieGoesToLowerId) {
  // mirror images across the equator give bit-identical chord lengths
  const auto g = custom_snapshot({{0, 0}, {-3, 3}, {3, 3}, {0, 6}}, {{0, 1}, {0, 2}, {1, 3}, {2, 3}});
  const Spt t = shortest_path_tree(g.snap, 0);
  EXPECT_EQ(t.parent[3], 1);
  const auto h = custom_snapshot({{0, 0}, {3, 3}, {-3, 3}, {0, 6}}, {{0, 1}, {0, 2}, {1, 3}, {2, 3}});
  EXPECT_EQ(shortest_path_tree(h.snap, 0).parent[3], 1);
}

TEST(Spt, MatchesBellmanFordOnRandomGraphs) {
  Rng rng(42);
  for (int k = 0; k < 30; ++k) {
    const auto g = random_geometric(50, 3, rng);
    const NodeId src = static_cast<NodeId>(rng.below(50));
    const Spt t = shortest_path_tree(g.snap, src);
    const auto bf = bellman_ford(g.snap, src);
    for (NodeId n = 0; n < 50; ++n) {
      const auto i = static_cast<std::size_t>(n);
      if (bf[i] == kInf) {
        EXPECT_FALSE(t.reachable(n));
        continue;
      }
      EXPECT_NEAR(t.dist[i], bf[i], 1e-6);
      EXPECT_NEAR(path_cost(g.snap, reconstruct_path(t, n)), bf[i], 1e-6);
    }
  }
}

TEST(Spt, MatchesBellmanFordOnStarlink) {
  const Snapshot& s = starlink_at(500);
  const Spt t = shortest_path_tree(s, 123);
  const auto bf = bellman_ford(s, 123);
  for (NodeId n = 0; n < s.size(); n += 7) EXPECT_NEAR(t.dist[static_cast<std::size_t>(n)], bf[static_cast<std::size_t>(n)], 1e-6);
}

TEST(Encode, SameCellGivesFlaggedRoot) {
  const auto g = custom_snapshot({{10, 10}, {10.1, 10.1}}, {{0, 1}});
  const Header h = encode(g.snap, 0, {1}, 0, 5);
  ASSERT_EQ(h.shells.size(), 1u);
  const CellTree& t = h.shells[0].tree;
  EXPECT_EQ(t.size(), 1u);
  EXPECT_TRUE(t.root().dest);
  EXPECT_EQ(h.group_id, 5u);
}

TEST(Encode, LineThroughThreeCells) {
  const CellId a = cell_index({0, 0}, 1);
  const auto nb = neighbors(a);
  const CellId b = nb[0];
  CellId c{};
  for (const CellId& x : neighbors(b))
    if (x != a && std::find(nb.begin(), nb.end(), x) == nb.end()) c = x;
  const auto g = custom_snapshot({cell_center(a), cell_center(b), cell_center(c)}, {{0, 1}, {1, 2}});
  const CellTree t = encode(g.snap, 0, {2}, 1, 1).shells[0].tree;
  ASSERT_EQ(t.size(), 3u);
  EXPECT_EQ(t.root().cell, a);
  ASSERT_EQ(t.root().children.size(), 1u);
  const TreeNode& mid = t.node(t.root().children[0]);
  EXPECT_EQ(mid.cell, b);
  ASSERT_EQ(mid.children.size(), 1u);
  EXPECT_EQ(t.node(mid.children[0]).cell, c);
  EXPECT_EQ(t.dest_cells(), std::vector<CellId>{c});
}

TEST(Encode, BranchesAtF2) {
  const auto g = branching();
  const CellMap cm(g.snap);
  std::set<CellId> distinct;
  for (NodeId n = 0; n < 5; ++n) distinct.insert(cm.cell(n, 1));
  ASSERT_EQ(distinct.size(), 5u);
  const CellTree t = encode(g.snap, 0, {3, 4}, 1, 1).shells[0].tree;
  ASSERT_EQ(t.size(), 5u);
  const int f2 = t.find(cm.cell(2, 1));
  ASSERT_GE(f2, 0);
  EXPECT_EQ(t.node(f2).children.size(), 2u);
  for (int c : t.node(f2).children) EXPECT_TRUE(t.node(c).dest);
  EXPECT_EQ(t.dest_cells().size(), 2u);
}

TEST(Encode, Errors) {
  const auto g = custom_snapshot({{0, 0}, {0, 5}, {0, 10}}, {{0, 1}});
  EXPECT_THROW(encode(g.snap, 0, {}, 0, 1), Error);
  try {
    encode(g.snap, 0, {1, 2}, 0, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Unreachable);
    EXPECT_NE(std::string(e.what()).find("2"), std::string::npos);
  }
  EXPECT_THROW(encode(g.snap, 0, {1}, 6, 1), Error);
}

TEST(Encode, TreeInvariantsOnStarlink) {
  Rng rng(77);
  const Snapshot& s = starlink_at(0);
  const CellMap cm(s);
  for (int k = 0; k < 40; ++k) {
    const NodeId src = static_cast<NodeId>(rng.below(static_cast<std::uint64_t>(s.size())));
    std::set<NodeId> dests;
    while (dests.size() < 15) dests.insert(static_cast<NodeId>(rng.below(static_cast<std::uint64_t>(s.size()))));
    const int r = static_cast<int>(rng.below(4));
    const Header h = encode(s, src, dests, r, 9, &cm);
    const CellTree& t = h.shells[0].tree;
    EXPECT_EQ(t.root().cell, cm.cell(src, r));
    const auto all = t.cells();
    const std::set<CellId> cells(all.begin(), all.end());
    EXPECT_EQ(cells.size(), t.size());
    // every destination's cell is flagged, and every tree cell lies on some SPT path
    const auto flagged = t.dest_cells();
    std::set<CellId> on_paths;
    const Spt spt = shortest_path_tree(s, src);
    for (NodeId d : dests) {
      EXPECT_TRUE(std::binary_search(flagged.begin(), flagged.end(), cm.cell(d, r)));
      for (NodeId v : reconstruct_path(spt, d)) on_paths.insert(cm.cell(v, r));
    }
    for (const CellId& c : cells) EXPECT_TRUE(on_paths.count(c));
    for (const auto& n : t.nodes()) EXPECT_LE(n.children.size(), 7u);
    EXPECT_EQ(parse(serialize(h).bytes), h);
    // same inputs, same header
    EXPECT_EQ(encode(s, src, dests, r, 9), h);
  }
}

TEST(Table, OwnCellHasNoEntry) {
  const Snapshot& s = starlink_at(0);
  const CellMap cm(s);
  const auto t = build_target_cell_table(s, 10, {cm.cell(10, 2)}, cm);
  EXPECT_TRUE(t.entries.empty());
}

TEST(Table, EastwardTargetPicksEastNeighbour) {
  // centre plus N, E, S, W at 2 degrees
  const auto g = custom_snapshot({{0, 0}, {2, 0}, {0, 2}, {-2, 0}, {0, -2}}, {{0, 1}, {0, 2}, {0, 3}, {0, 4}});
  const CellMap cm(g.snap);
  const CellId east = cell_index({0, 20}, 1);
  const auto t = build_target_cell_table(g.snap, 0, {east}, cm);
  ASSERT_EQ(t.entries.count(east), 1u);
  EXPECT_EQ(t.entries.at(east).primary, 2);
  // north and south make a little progress too; west makes none
  for (NodeId b : t.entries.at(east).backups) EXPECT_NE(b, 4);
  // a target due west from the westernmost node: nobody closer, no entry
  const CellId far_east = cell_index({0, 60}, 1);
  EXPECT_TRUE(build_target_cell_table(g.snap, 2, {far_east}, cm).entries.empty());
}

TEST(Table, PrimaryIsBruteForceArgmin) {
  Rng rng(5);
  for (double t : {0.0, 900.0, 2500.0}) {
    const Snapshot& s = starlink_at(t);
    const CellMap cm(s);
    for (int k = 0; k < 200; ++k) {
      const NodeId sat = static_cast<NodeId>(rng.below(static_cast<std::uint64_t>(s.size())));
      const CellId target = cell_index(random_sphere_point(rng), static_cast<int>(rng.below(4)));
      const auto e = table_entry(s, sat, target, cm);
      const GeoPoint c = cell_center(target);
      const double own = central_angle(s.sats[static_cast<std::size_t>(sat)].sub, c);
      double best = own;
      NodeId arg = -1;
      std::set<NodeId> nbrs;
      for (const Link& l : s.adj[static_cast<std::size_t>(sat)]) {
        nbrs.insert(l.to);
        const double d = central_angle(s.sats[static_cast<std::size_t>(l.to)].sub, c);
        if (d < best) best = d, arg = l.to;
      }
      if (cm.cell(sat, target.resolution) == target || arg < 0) {
        EXPECT_FALSE(e.has_value());
        continue;
      }
      ASSERT_TRUE(e.has_value());
      EXPECT_EQ(e->primary, arg);
      EXPECT_LE(e->backups.size(), 2u);
      std::set<NodeId> all{e->primary};
      for (NodeId b : e->backups) {
        EXPECT_TRUE(nbrs.count(b));
        EXPECT_TRUE(all.insert(b).second);
        EXPECT_LT(central_angle(s.sats[static_cast<std::size_t>(b)].sub, c), own);
      }
    }
  }
}

TEST(Forward, LeafDeliversWithoutCopies) {
  const auto g = branching();
  const CellMap cm(g.snap);
  Packet p;
  p.header = {1, 1, {{0, 1, CellTree(cm.cell(3, 1))}}};
  p.header.shells[0].tree.set_dest(0);
  const Failures none;
  const std::set<NodeId> members{3};
  const ForwardContext ctx(g.snap, none, members);
  const ForwardResult r = forward(3, p, ctx);
  EXPECT_TRUE(r.delivered);
  EXPECT_TRUE(r.out.empty());
}

TEST(Forward, ReplicatesAtF2) {
  const auto g = branching();
  const Header h = encode(g.snap, 0, {3, 4}, 1, 1);
  const CellMap cm(g.snap);
  const int f2 = h.shells[0].tree.find(cm.cell(2, 1));
  Packet p;
  p.header = {1, 1, {{0, 1, h.shells[0].tree.subtree(f2)}}};
  const Failures none;
  const std::set<NodeId> members{3, 4};
  const ForwardContext ctx(g.snap, none, members);
  const ForwardResult r = forward(2, p, ctx);
  ASSERT_EQ(r.out.size(), 2u);
  std::set<NodeId> hops{r.out[0].first, r.out[1].first};
  EXPECT_EQ(hops, (std::set<NodeId>{3, 4}));
  const auto c0 = r.out[0].second.shell().tree.cells(), c1 = r.out[1].second.shell().tree.cells();
  for (const CellId& c : c0) EXPECT_TRUE(std::find(c1.begin(), c1.end(), c) == c1.end());
  for (const auto& o : r.out) EXPECT_EQ(o.second.hop_count, 1);
  // pure function of its inputs
  EXPECT_EQ(forward(2, p, ctx), r);
  const ForwardContext fresh(g.snap, none, members);
  EXPECT_EQ(forward(2, p, fresh), r);
}

TEST(Forward, EndToEndBranching) {
  const auto g = branching();
  const Header h = encode(g.snap, 0, {3, 4}, 1, 1);
  const DeliveryReport rep = run_multicast(g.snap, h, 0, {3, 4});
  EXPECT_EQ(rep.delivered, (std::set<NodeId>{3, 4}));
  EXPECT_EQ(rep.hops.at(3), 3);
  EXPECT_EQ(rep.transmissions, 4);
  EXPECT_EQ(rep.replications, 1);
}

TEST(Forward, TtlDropsFarDestination) {
  const auto g = custom_snapshot({{0, 0}, {0, 12}, {0, 24}, {0, 36}}, {{0, 1}, {1, 2}, {2, 3}});
  const Header h = encode(g.snap, 0, {3}, 1, 1);
  const DeliveryReport low = run_multicast(g.snap, h, 0, {3}, {}, 1);
  EXPECT_TRUE(low.delivered.empty());
  EXPECT_EQ(low.ttl_drops, 1);
  const DeliveryReport ok = run_multicast(g.snap, h, 0, {3}, {}, 3);
  EXPECT_EQ(ok.delivered, (std::set<NodeId>{3}));
  EXPECT_EQ(ok.ttl_drops, 0);
}

TEST(Delivery, EqualsEncodedSetOnRandomGraphs) {
  Rng rng(1001);
  for (int k = 0; k < 100; ++k) {
    const int n = 8 + static_cast<int>(rng.below(57));
    const auto g = random_geometric(n, 3, rng);
    const NodeId src = static_cast<NodeId>(rng.below(static_cast<std::uint64_t>(n)));
    auto reach = reachable_from(g.snap, src);
    const auto dests = pick(reach, 1 + rng.below(6), rng);
    const int r = static_cast<int>(rng.below(3));
    const Header h = encode(g.snap, src, dests, r, 1);
    const DeliveryReport rep = run_multicast(g.snap, h, src, dests);
    ASSERT_EQ(rep.delivered, dests) << "case " << k;
    EXPECT_EQ(rep.ttl_drops, 0);
    EXPECT_TRUE(rep.unroutable.empty());
  }
}

TEST(Delivery, LoopFreeOnStarlink) {
  Rng rng(8);
  for (int k = 0; k < 100; ++k) {
    const Snapshot& s = starlink_at(static_cast<double>(k % 5) * 600.0);
    const NodeId src = static_cast<NodeId>(rng.below(static_cast<std::uint64_t>(s.size())));
    std::set<NodeId> dests;
    while (dests.size() < 10) dests.insert(static_cast<NodeId>(rng.below(static_cast<std::uint64_t>(s.size()))));
    const Header h = encode(s, src, dests, 2, 1);
    const DeliveryReport rep = run_multicast(s, h, src, dests);
    // a satellite sees a subtree again only after the packet moved to a later phase
    std::map<std::pair<NodeId, CellId>, Phase> last;
    for (const VisitKey& v : rep.trace) {
      auto [it, fresh] = last.try_emplace({v.sat, v.root}, v.phase);
      if (!fresh) {
        EXPECT_GT(static_cast<int>(v.phase), static_cast<int>(it->second)) << "run " << k;
        it->second = v.phase;
      }
    }
    EXPECT_EQ(rep.loop_drops, 0);
    EXPECT_EQ(rep.delivered, dests);
  }
}

TEST(Delivery, BackupLinkKeepsDeliverySet) {
  Rng rng(31);
  int tested = 0;
  for (int k = 0; k < 2000 && tested < 50; ++k) {
    const Snapshot& s = starlink_at(300);
    const CellMap cm(s);
    const NodeId src = static_cast<NodeId>(rng.below(static_cast<std::uint64_t>(s.size())));
    std::set<NodeId> dests;
    while (dests.size() < 5) dests.insert(static_cast<NodeId>(rng.below(static_cast<std::uint64_t>(s.size()))));
    const Header h = encode(s, src, dests, 2, 1, &cm);
    const DeliveryReport base = run_multicast(s, h, src, dests);
    // first transit step whose table entry has a backup
    Failures f;
    for (const VisitKey& v : base.trace) {
      if (v.phase != Phase::Transit || cm.cell(v.sat, 2) == v.root) continue;
      const auto e = table_entry(s, v.sat, v.root, cm);
      if (e && !e->backups.empty()) {
        f.links.insert(edge_key(v.sat, e->primary));
        break;
      }
    }
    if (f.empty()) continue;
    ++tested;
    const DeliveryReport failed = run_multicast(s, h, src, dests, f);
    EXPECT_EQ(failed.delivered, base.delivered) << "case " << k;
  }
  EXPECT_EQ(tested, 50);
}

TEST(Delivery, ReachRate) {
  std::set<NodeId> dests, got;
  for (NodeId n = 0; n < 20; ++n) dests.insert(n);
  got = {1, 5, 9};
  EXPECT_DOUBLE_EQ(reach_rate(got, dests), 0.15);
  EXPECT_DOUBLE_EQ(reach_rate(dests, dests), 1.0);
  EXPECT_DOUBLE_EQ(reach_rate({}, dests), 0.0);
  EXPECT_THROW(reach_rate(got, {}), Error);
}
