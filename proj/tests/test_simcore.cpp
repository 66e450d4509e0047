#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "bierstar/simcore.hpp"

using namespace bierstar;
namespace fs = std::filesystem;

namespace {

ScenarioSpec tiny(const std::vector<std::string>& sets = {}) { return load_scenario(SCENARIO_DIR "/tiny.toml", sets); }

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("bierstar_simcore_" + name);
  fs::remove_all(p);
  return p;
}

int count_methods(const ScenarioSpec& s, bool routing) {
  int n = 0;
  for (Method m : s.methods) n += routing ? (m == Method::BierStar || greedy_kind(m).has_value()) : is_bitstring_method(m) || m == Method::BierStar;
  return n;
}

}  // namespace

TEST(Simcore, NoFailuresBierStarReachesEveryone) {
  const auto traces = run(tiny());
  ASSERT_EQ(traces.size(), 3u);
  int rows = 0;
  for (const auto& tr : traces) {
    EXPECT_TRUE(tr.summary.connected);
    for (const auto& r : tr.reach) {
      if (r.method != "BierStar") continue;
      ++rows;
      EXPECT_GT(r.destinations, 0);
      EXPECT_EQ(r.reached, r.destinations) << "epoch " << tr.summary.epoch;
      EXPECT_EQ(r.unroutable, 0);
    }
  }
  EXPECT_EQ(rows, 3);
}

TEST(Simcore, StarlinkEpochLosesOnlyToTtl) {
  // one epoch of the bundled Starlink-like scenario: a cell can hold satellites
  // from both the ascending and the descending sheet, and spreading inside such
  // a cell may run past the hop limit; nothing else is lost
  const auto traces = run(load_scenario(SCENARIO_DIR "/starlink_like.toml", {"duration_s=15"}));
  ASSERT_EQ(traces.size(), 1u);
  for (const auto& r : traces[0].reach) {
    if (r.method != "BierStar") continue;
    EXPECT_EQ(r.unroutable, 0);
    EXPECT_GE(r.reached + r.ttl_drops, r.destinations) << "group " << r.group_id;
  }
  const auto relaxed = run(load_scenario(SCENARIO_DIR "/starlink_like.toml", {"duration_s=15", "ttl=256"}));
  for (const auto& r : relaxed[0].reach) {
    if (r.method != "BierStar") continue;
    EXPECT_EQ(r.reached, r.destinations) << "group " << r.group_id;
    EXPECT_EQ(r.ttl_drops, 0);
  }
}

TEST(Simcore, RowsAreComplete) {
  const ScenarioSpec s = tiny();
  const auto traces = run(s);
  const std::size_t groups = s.groups.size();
  for (const auto& tr : traces) {
    EXPECT_EQ(tr.headers.size(), groups);
    EXPECT_EQ(tr.reach.size(), groups * static_cast<std::size_t>(count_methods(s, true)));
    EXPECT_EQ(tr.bits.size(), groups * static_cast<std::size_t>(count_methods(s, false)));
    EXPECT_EQ(tr.summary.satellites, 16);
    EXPECT_EQ(tr.summary.isls, 32);
    for (const auto& h : tr.headers) {
      EXPECT_EQ(h.source_sat, "0-0-0");
      EXPECT_GT(h.bits, 0u);
      EXPECT_EQ(h.hex.size(), 2 * ((h.bits + 7) / 8));
      EXPECT_EQ(h.bits, 40u + 24u + static_cast<std::size_t>(h.tree_nodes) * (7u + 4u));
    }
    for (const auto& b : tr.bits) {
      if (b.method == "Traditional") {
        EXPECT_EQ(b.bits, static_cast<std::size_t>(b.terminals));
      } else if (b.method == "GeoR0" || b.method == "GeoR1") {
        EXPECT_LE(b.bits, static_cast<std::size_t>(b.terminals));
      }
    }
  }
}

TEST(Simcore, MembershipBookkeeping) {
  const ScenarioSpec s = tiny();
  Simulation sim(s);
  const EpochTrace e0 = sim.step(0);
  EXPECT_EQ(e0.summary.joins + e0.summary.uncovered, 40);
  EXPECT_EQ(sim.registry().member_count(1), static_cast<std::size_t>(e0.summary.joins));
  EXPECT_EQ(e0.summary.leaves, 0);
  const EpochTrace e1 = sim.step(1);
  EXPECT_EQ(e1.summary.refreshes, 0);  // 15 s is below the refresh interval
  const EpochTrace e2 = sim.step(2);
  // every covered terminal either moved, refreshed, or just joined
  const auto recs = sim.registry().records(1);
  const int touched_at_15 = static_cast<int>(
      std::count_if(recs.begin(), recs.end(), [](const MembershipRecord& r) { return r.last_refresh_s == 15; }));
  EXPECT_EQ(e2.summary.joins + e2.summary.handovers + e2.summary.refreshes + e2.summary.uncovered + touched_at_15, 40);
  EXPECT_EQ(e2.summary.pruned, 0);
}

TEST(Simcore, Deterministic) {
  const auto a = run(tiny({"failures.model=random", "failures.link_rate=0.1"}));
  const auto b = run(tiny({"failures.model=random", "failures.link_rate=0.1"}), 3);
  const fs::path da = scratch("det_a"), db = scratch("det_b");
  write_run_outputs(da, a, false);
  write_run_outputs(db, b, false);
  for (const auto& f : run_output_files()) EXPECT_EQ(slurp(da / f), slurp(db / f)) << f;
  const auto c = run(tiny({"seed=8"}));
  const fs::path dc = scratch("det_c");
  write_run_outputs(dc, c, false);
  EXPECT_NE(slurp(da / "headers.csv") + slurp(da / "epochs.csv"), slurp(dc / "headers.csv") + slurp(dc / "epochs.csv"));
  fs::remove_all(da);
  fs::remove_all(db);
  fs::remove_all(dc);
}

TEST(Simcore, AllLinksDownStopsDelivery) {
  const auto traces = run(tiny({"failures.model=random", "failures.link_rate=1.0"}));
  for (const auto& tr : traces) {
    EXPECT_EQ(tr.summary.failed_links, 32);
    for (const auto& r : tr.reach) {
      if (r.method != "BierStar") continue;
      // only a destination on the source satellite itself can still be served
      EXPECT_LE(r.reached, 1);
      EXPECT_LT(r.reached, r.destinations);
      EXPECT_GT(r.unroutable, 0);
    }
  }
}

TEST(Simcore, FailureSampling) {
  const ScenarioSpec s = tiny();
  const Constellation c = build_constellation(s.shells);
  const Snapshot snap = propagate(c, 0);
  FailureSpec f{"random", 0.0, 0.0};
  EXPECT_TRUE(sample_failures(f, snap, 1).empty());
  f = {"random", 1.0, 1.0};
  const Failures all = sample_failures(f, snap, 1);
  EXPECT_EQ(all.links.size(), snap.edges.size());
  EXPECT_EQ(all.nodes.size(), 16u);
  f = {"random", 0.5, 0.2};
  const Failures x = sample_failures(f, snap, 42), y = sample_failures(f, snap, 42);
  EXPECT_EQ(x.links, y.links);
  EXPECT_EQ(x.nodes, y.nodes);
  f.model = "none";
  EXPECT_TRUE(sample_failures(f, snap, 42).empty());
}

TEST(Simcore, PopulationFilters) {
  const Population all = make_population(tiny());
  EXPECT_EQ(all.terminals.size(), 40u);
  EXPECT_EQ(all.members.at(1).size(), 40u);
  const Population frac = make_population(tiny({"groups.0.members=fraction", "groups.0.fraction=0.25"}));
  EXPECT_EQ(frac.members.at(1).size(), 10u);
  EXPECT_EQ(make_population(tiny({"groups.0.members=fraction", "groups.0.fraction=0.25"})).members.at(1), frac.members.at(1));
  const ScenarioSpec reg = tiny({"groups.0.members=region", "groups.0.region_center=[0, 0]", "groups.0.region_radius_km=6000"});
  const Population r = make_population(reg);
  for (std::size_t k : r.members.at(1)) EXPECT_LE(great_circle_km(r.terminals[k].location_at(0), {0, 0}), 6000);
  EXPECT_THROW(make_population(tiny({"groups.0.members=region", "groups.0.region_center=[0, 0]", "groups.0.region_radius_km=1"})),
               ValidationError);
}

TEST(Simcore, InvalidSpecRejectedBeforeBuilding) {
  ScenarioSpec s = tiny();
  s.shells.clear();
  EXPECT_THROW(Simulation{s}, ValidationError);
}

TEST(Simcore, OutputsRefuseOverwrite) {
  const fs::path d = scratch("force");
  const auto traces = run(tiny());
  write_run_outputs(d, traces, false);
  EXPECT_THROW(write_run_outputs(d, traces, false), Error);
  EXPECT_NO_THROW(write_run_outputs(d, traces, true));
  const std::string head = slurp(d / "run_reach.csv").substr(0, 80);
  EXPECT_EQ(head.rfind("epoch,time_s,group_id,method,destinations,reached,rate", 0), 0u);
  fs::remove_all(d);
  EXPECT_EQ(detail::fmt_rate(0, 0), "NA");
  EXPECT_EQ(detail::fmt_rate(3, 20), "0.15");
}
