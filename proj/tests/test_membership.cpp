#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <sstream>

#include "bierstar/membership.hpp"
#include "bierstar/terminals.hpp"

using namespace bierstar;

namespace {

// brute force: every satellite above the mask, smallest slant range, lowest node on ties
std::optional<NodeId> oracle_serving(const GeoPoint& p, const Snapshot& s, double mask) {
  std::optional<NodeId> best;
  double best_r = 1e300;
  const Vec3 g = to_ecef(p, kEarthRadiusKm);
  for (NodeId n = 0; n < s.size(); ++n) {
    const auto& st = s.sats[static_cast<std::size_t>(n)];
    if (elevation_deg(st.ecef, p) < mask) continue;
    const double r = distance(st.ecef, g);
    if (r < best_r) {
      best_r = r;
      best = n;
    }
  }
  return best;
}

MembershipEvent ev(EventType t, const std::string& id, SatId s = {}, GroupId g = 1) { return {t, g, id, s}; }

}  // namespace

TEST(Serving, MatchesBruteForceOnStarlinkSnapshot) {
  const Snapshot s = propagate(build_walker(starlink_like_shell()), 321);
  Rng rng(11);
  int covered = 0;
  for (int k = 0; k < 500; ++k) {
    const GeoPoint p = random_sphere_point(rng);
    const auto want = oracle_serving(p, s, 25);
    const auto got = find_serving_satellite(p, s, 25);
    ASSERT_EQ(got, want) << p.lat << "," << p.lon;
    covered += got.has_value();
  }
  EXPECT_GT(covered, 300);
}

TEST(Serving, SubSatellitePointPicksThatSatellite) {
  const Snapshot s = propagate(build_walker(starlink_like_shell()), 0);
  for (NodeId n : {0, 100, 777}) EXPECT_EQ(assign_serving_satellite(s.sats[static_cast<std::size_t>(n)].sub, s, 25), n);
}

TEST(Serving, TieGoesToLowerNode) {
  // two identical shells put two satellites at exactly the same position
  ShellSpec a{0, 1200, 53, 2, 4, 1, WalkerPattern::Delta};
  ShellSpec b = a;
  b.shell_id = 1;
  const Constellation c = build_constellation({b, a});
  const Snapshot s = propagate(c, 100);
  const GeoPoint under = s.sats[5].sub;
  const auto got = find_serving_satellite(under, s, 10);
  ASSERT_TRUE(got.has_value());
  EXPECT_EQ(*got, 5);
  EXPECT_EQ(s.sat_id(*got).shell, 0);
}

TEST(Serving, NoCoverageThrows) {
  const ShellSpec sh{0, 550, 53, 1, 1, 0, WalkerPattern::Delta};
  const Snapshot s = propagate(build_walker(sh), 0);
  EXPECT_FALSE(find_serving_satellite({0, 180}, s, 25).has_value());
  try {
    assign_serving_satellite({0, 180}, s, 25);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NoCoverage);
  }
}

TEST(Registry, JoinThenTimeoutPrunes) {
  IngressRegistry reg;
  reg.add_group(1);
  reg.process(ev(EventType::Join, "t1", {0, 1, 2}), 0);
  EXPECT_EQ(reg.prune(89.9), 0u);
  EXPECT_NE(reg.find(1, "t1"), nullptr);
  EXPECT_EQ(reg.prune(90), 1u);
  EXPECT_EQ(reg.find(1, "t1"), nullptr);
}

TEST(Registry, HandoverKeepsOneRecord) {
  IngressRegistry reg;
  reg.add_group(1);
  reg.process(ev(EventType::Join, "t1", {0, 1, 2}), 0);
  reg.process(ev(EventType::Handover, "t1", {0, 3, 4}), 10);
  ASSERT_EQ(reg.records(1).size(), 1u);
  EXPECT_EQ(reg.records(1)[0].serving_sat, (SatId{0, 3, 4}));
  EXPECT_EQ(reg.records(1)[0].last_refresh_s, 10);
}

TEST(Registry, LeaveAfterJoinEmpties) {
  IngressRegistry reg;
  reg.add_group(1);
  reg.process(ev(EventType::Join, "t1", {0, 1, 2}), 0);
  reg.process(ev(EventType::Leave, "t1"), 1);
  EXPECT_EQ(reg.member_count(1), 0u);
  EXPECT_TRUE(reg.active_destination_sats(1, 1).empty());
  EXPECT_EQ(reg.warnings(), 0u);
}

TEST(Registry, AbsentLeaveOrRefreshOnlyWarns) {
  IngressRegistry reg;
  reg.add_group(1);
  reg.process(ev(EventType::Leave, "ghost"), 0);
  reg.process(ev(EventType::Refresh, "ghost"), 0);
  EXPECT_EQ(reg.warnings(), 2u);
  EXPECT_EQ(reg.member_count(1), 0u);
  EXPECT_THROW(reg.process(ev(EventType::Join, "t", {}, 9), 0), Error);
}

TEST(Registry, RefreshExtendsLifetime) {
  IngressRegistry reg;
  reg.add_group(1);
  reg.process(ev(EventType::Join, "t1", {0, 0, 1}), 0);
  reg.process(ev(EventType::Refresh, "t1"), 60);
  EXPECT_EQ(reg.prune(120), 0u);
  EXPECT_EQ(reg.prune(150), 1u);
}

TEST(Registry, DefaultsMatchTheProtocol) {
  IngressRegistry reg;
  EXPECT_EQ(reg.refresh_interval_s, 30);
  EXPECT_EQ(reg.timeout_s, 90);
}

TEST(Destinations, DeduplicatesSatellites) {
  IngressRegistry reg;
  reg.add_group(1);
  reg.process(ev(EventType::Join, "a", {0, 1, 1}), 0);
  reg.process(ev(EventType::Join, "b", {0, 1, 1}), 0);
  reg.process(ev(EventType::Join, "c", {0, 2, 5}), 0);
  EXPECT_EQ(reg.active_destination_sats(1, 0), (std::set<SatId>{{0, 1, 1}, {0, 2, 5}}));
  EXPECT_TRUE(reg.active_destination_sats(42, 0).empty());
}

TEST(Destinations, ExpiredRecordsAreInvisibleBeforePrune) {
  IngressRegistry reg;
  reg.add_group(1);
  reg.process(ev(EventType::Join, "a", {0, 1, 1}), 0);
  reg.process(ev(EventType::Join, "b", {0, 2, 2}), 50);
  EXPECT_EQ(reg.active_destination_sats(1, 95), (std::set<SatId>{{0, 2, 2}}));
}

TEST(Destinations, RandomTerminalsMatchGrouping) {
  const Constellation c = build_walker(starlink_like_shell());
  const Snapshot s = propagate(c, 0);
  Rng rng(3);
  const auto terms = uniform_sphere_terminals(10000, rng);
  IngressRegistry reg;
  reg.add_group(1);
  std::set<SatId> want;
  for (const auto& t : terms) {
    const auto n = find_serving_satellite(t.location_at(0), s, 25);
    if (!n) continue;
    reg.process(ev(EventType::Join, t.id, s.sat_id(*n)), 0);
    want.insert(s.sat_id(*n));
  }
  EXPECT_EQ(reg.active_destination_sats(1, 0), want);
  std::set<NodeId> nodes;
  for (const SatId& id : want) nodes.insert(c.node_of(id));
  EXPECT_EQ(member_nodes(reg, 1, 0, c), nodes);
}

TEST(Properties, HandoverConservesCount) {
  Rng rng(8);
  IngressRegistry reg;
  reg.add_group(1);
  for (int k = 0; k < 50; ++k) reg.process(ev(EventType::Join, "t" + std::to_string(k), {0, 0, k}), 0);
  for (int k = 0; k < 200; ++k) {
    const auto id = "t" + std::to_string(rng.below(50));
    reg.process(ev(EventType::Handover, id, {0, 1, static_cast<int>(rng.below(20))}), 1);
    ASSERT_EQ(reg.member_count(1), 50u);
  }
}

TEST(Properties, ExpiryIsMonotone) {
  Rng rng(9);
  IngressRegistry reg;
  reg.add_group(1);
  for (int k = 0; k < 100; ++k) reg.process(ev(EventType::Join, "t" + std::to_string(k), {0, 0, k}), rng.uniform(0, 100));
  std::size_t prev = 1000;
  for (double t = 0; t <= 200; t += 5) {
    const std::size_t n = reg.active_destination_sats(1, t).size();
    EXPECT_LE(n, prev);
    prev = n;
  }
  EXPECT_EQ(prev, 0u);
}

TEST(Properties, EventsTouchOnlyTheirTerminal) {
  IngressRegistry reg;
  reg.add_group(1);
  reg.add_group(2);
  reg.process(ev(EventType::Join, "a", {0, 1, 1}), 0);
  reg.process(ev(EventType::Join, "b", {0, 2, 2}, 2), 0);
  const auto before_a = *reg.find(1, "a");
  const auto before_b = *reg.find(2, "b");
  reg.process(ev(EventType::Join, "c", {0, 3, 3}), 5);
  reg.process(ev(EventType::Handover, "c", {0, 3, 4}), 6);
  reg.process(ev(EventType::Leave, "c"), 7);
  EXPECT_EQ(*reg.find(1, "a"), before_a);
  EXPECT_EQ(*reg.find(2, "b"), before_b);
}

TEST(Terminals, CsvWithTrajectories) {
  std::istringstream in("terminal_id,lat,lon,time_s\nx,10,20,30\ny,0,0,\nx,11,21,0\n");
  const auto t = load_terminals_csv(in);
  ASSERT_EQ(t.size(), 2u);
  EXPECT_EQ(t[0].id, "x");
  ASSERT_EQ(t[0].track.size(), 2u);
  EXPECT_EQ(t[0].location_at(0).lat, 11);
  EXPECT_EQ(t[0].location_at(29).lat, 11);
  EXPECT_EQ(t[0].location_at(30).lat, 10);
  EXPECT_EQ(t[1].location_at(1000).lon, 0);
}

TEST(Terminals, CsvRejectsBadRows) {
  std::istringstream bad("terminal_id,lat,lon\nx,95,0\n");
  EXPECT_THROW(load_terminals_csv(bad), Error);
  std::istringstream missing("id,lat,lon\nx,1,0\n");
  EXPECT_THROW(load_terminals_csv(missing), Error);
}

TEST(Terminals, GeneratorsAreDeterministicAndBounded) {
  Rng a(5), b(5);
  const auto u1 = uniform_sphere_terminals(200, a), u2 = uniform_sphere_terminals(200, b);
  ASSERT_EQ(u1.size(), 200u);
  for (std::size_t k = 0; k < u1.size(); ++k) {
    EXPECT_EQ(u1[k].id, u2[k].id);
    EXPECT_EQ(u1[k].track[0].where.lat, u2[k].track[0].where.lat);
  }
  const GeoPoint paris{48.8566, 2.3522};
  Rng c(1);
  for (const auto& t : clustered_terminals(500, {paris}, 100, c)) EXPECT_LT(great_circle_km(t.track[0].where, paris), 800);
  Rng d(2);
  const GeoPoint nyc{40.7, -74.0};
  const double span = great_circle_km(paris, nyc);
  for (const auto& t : corridor_terminals(300, nyc, paris, 50, d)) {
    const auto& p = t.track[0].where;
    EXPECT_LT(great_circle_km(p, paris) + great_circle_km(p, nyc), span + 200);
  }
}

TEST(Terminals, UniformSphereHasNoPolarBias) {
  Rng rng(17);
  int north_cap = 0;
  const int n = 20000;
  for (const auto& t : uniform_sphere_terminals(n, rng)) north_cap += t.track[0].where.lat > 30;
  // area fraction above 30N is (1 - sin 30)/2 = 0.25
  EXPECT_NEAR(north_cap / double(n), 0.25, 0.02);
}
