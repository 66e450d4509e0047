#pragma once

// Drivers for the four evaluation experiments. Each returns plain rows; the
// CLI writes them as CSV and the acceptance checks read them directly.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "bierstar/baselines.hpp"
#include "bierstar/csv.hpp"
#include "bierstar/metrics.hpp"
#include "bierstar/routing/protocol.hpp"
#include "bierstar/scenario.hpp"
#include "bierstar/simcore.hpp"

namespace bierstar {

// ---------------------------------------------------------------------------
// Bitstring length

struct BitstringRow {
  std::string method;
  int terminals = 0;
  int resolution = -1;
  std::size_t bits = 0;
  int segment_id_bits = 0;
  std::size_t partitions = 0;
  int destination_sats = 0;
  int destination_cells = 0;
};

// All terminals sit in one cluster, which is the worst case for segmented
// schemes; the group is sourced from the scenario's bitstring gateway.
inline std::vector<BitstringRow> bitstring_experiment(const ScenarioSpec& spec) {
  const ExperimentSpec& x = spec.experiments;
  const Constellation c = build_constellation(spec.shells);
  const Snapshot snap = propagate(c, spec.epoch_start_s);
  const CellMap cells(snap);
  const NodeId src = assign_serving_satellite(x.bitstring_gateway, snap, spec.elevation_mask_deg);
  std::vector<BitstringRow> rows;
  for (int n : x.bitstring_counts) {
    Rng rng(derive_seed(spec.seed_value(), "bitstring", {static_cast<std::uint64_t>(n)}));
    std::vector<GeoPoint> pts;
    for (const auto& t : clustered_terminals(n, {x.bitstring_center}, x.bitstring_sigma_km, rng)) pts.push_back(t.location_at(0));
    for (Method m : spec.methods) {
      BitstringRow row;
      row.method = to_string(m);
      row.terminals = n;
      if (m == Method::Traditional) {
        row.bits = traditional_bitstring_bits(pts.size());
        row.partitions = 1;
      } else if (m == Method::GeoR0 || m == Method::GeoR1 || m == Method::SatFoot) {
        const PartitionScheme ps = m == Method::SatFoot ? PartitionScheme::sat_footprint() : PartitionScheme::geo(m == Method::GeoR0 ? 0 : 1);
        const SegmentedResult sr = segmented_bitstring_bits(pts, ps, &snap, spec.elevation_mask_deg);
        row.resolution = m == Method::SatFoot ? -1 : ps.resolution;
        row.bits = sr.bits;
        row.segment_id_bits = sr.segment_id_bits;
        row.partitions = sr.partitions;
      } else if (m == Method::BierStar) {
        std::set<NodeId> dests;
        for (const auto& p : pts)
          if (auto s = find_serving_satellite(p, snap, spec.elevation_mask_deg)) dests.insert(*s);
        if (dests.empty()) fail(ErrorKind::NoCoverage, "no clustered terminal is covered");
        const Header h = encode(snap, src, dests, spec.resolution, 1, &cells);
        row.resolution = spec.resolution;
        row.bits = serialize(h).bit_length;
        row.partitions = 1;
        row.destination_sats = static_cast<int>(dests.size());
        row.destination_cells = static_cast<int>(h.shells.front().tree.dest_cells().size());
      } else {
        continue;
      }
      rows.push_back(row);
    }
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Reach rate

struct ReachRow {
  std::string method;
  std::string constellation;
  int seed = 0;
  int destinations = 0;
  int reached = 0;
  bool connected = true;  // every destination reachable from the source on the live graph
  int transmissions = 0;
  int max_hops = 0;

  double rate() const { return destinations ? static_cast<double>(reached) / destinations : 0.0; }
};

// Destinations drawn in three strata: high-latitude satellites, satellites in
// the first and last planes (the seam of a Star pattern), and the rest.
inline std::set<NodeId> reach_destinations(const Snapshot& snap, NodeId src, int count, Rng& rng) {
  const Constellation& c = *snap.constellation;
  std::vector<NodeId> polar, seam, any;
  for (NodeId n = 0; n < snap.size(); ++n) {
    if (n == src) continue;
    const ShellSpec& sh = c.shell_of(n);
    const double turn = std::min(sh.inclination_deg, 180.0 - sh.inclination_deg);
    if (std::abs(snap.sats[static_cast<std::size_t>(n)].sub.lat) >= 0.75 * turn) polar.push_back(n);
    const int p = snap.sat_id(n).plane;
    if (p == 0 || p == sh.planes - 1) seam.push_back(n);
    any.push_back(n);
  }
  std::set<NodeId> out;
  const int want = std::min<int>(count, static_cast<int>(any.size()));
  auto draw = [&](const std::vector<NodeId>& pool, int k) {
    for (int tries = 0; k > 0 && !pool.empty() && tries < 64 * count; ++tries)
      if (out.insert(pool[rng.below(pool.size())]).second) --k;
  };
  draw(polar, want / 3);
  draw(seam, want / 3);
  while (static_cast<int>(out.size()) < want) out.insert(any[rng.below(any.size())]);
  return out;
}

inline std::vector<ReachRow> reach_experiment(const ScenarioSpec& spec, int threads = 1) {
  const ExperimentSpec& x = spec.experiments;
  const Constellation c = build_constellation(spec.shells);
  const double period = orbital_period_s(spec.shells.front().altitude_km);
  std::vector<std::vector<ReachRow>> per_seed(static_cast<std::size_t>(x.reach_seeds));
  parallel_for(x.reach_seeds, threads, [&](int seed) {
    Rng rng(derive_seed(spec.seed_value(), "reach", {static_cast<std::uint64_t>(seed)}));
    const Snapshot snap = propagate(c, spec.epoch_start_s + rng.uniform(0.0, period));
    const NodeId src = static_cast<NodeId>(rng.below(static_cast<std::uint64_t>(snap.size())));
    const std::set<NodeId> dests = reach_destinations(snap, src, x.reach_destinations, rng);
    const Failures failures = sample_failures(spec.failures, snap, derive_seed(spec.seed_value(), "reach-failures", {static_cast<std::uint64_t>(seed)}));
    const Spt live = shortest_path_tree(snap, src, &failures);
    bool connected = true;
    for (NodeId d : dests) connected = connected && live.reachable(d);
    const CellMap cells(snap);
    for (Method m : spec.methods) {
      if (m != Method::BierStar && !greedy_kind(m)) continue;
      DeliveryReport rep;
      if (m == Method::BierStar) {
        const Spt nominal = shortest_path_tree(snap, src);
        std::set<NodeId> encodable;
        for (NodeId d : dests)
          if (nominal.reachable(d) && snap.sat_id(d).shell == snap.sat_id(src).shell) encodable.insert(d);
        if (!encodable.empty()) rep = run_multicast(snap, encode(snap, src, encodable, spec.resolution, 1, &cells), src, dests, failures, spec.ttl);
      } else {
        GreedyVariant v = spec.greedy;
        v.kind = *greedy_kind(m);
        rep = greedy_multicast(v, src, dests, snap, failures);
      }
      ReachRow row{to_string(m), spec.name, seed, static_cast<int>(dests.size()), 0, connected, rep.transmissions, 0};
      for (NodeId d : dests)
        if (rep.delivered.count(d)) {
          ++row.reached;
          row.max_hops = std::max(row.max_hops, rep.hops.at(d));
        }
      per_seed[static_cast<std::size_t>(seed)].push_back(row);
    }
  });
  std::vector<ReachRow> rows;
  for (auto& v : per_seed) rows.insert(rows.end(), v.begin(), v.end());
  return rows;
}

// ---------------------------------------------------------------------------
// Dwelling time

struct DwellRow {
  std::string constellation;
  double inclination_deg = 0;
  double altitude_km = 0;
  int resolution = 0;
  std::optional<double> analytic_s;
  double ground_speed_km_s = 0;
  double diameter_km = 0;
  DwellSummary empirical;
};

inline std::vector<DwellRow> dwell_experiment(const ScenarioSpec& spec, int threads = 1) {
  const ExperimentSpec& x = spec.experiments;
  std::vector<DwellRow> rows;
  for (double inc : x.dwell_inclinations) {
    std::vector<ShellSpec> shells = spec.shells;
    for (auto& sh : shells) sh.inclination_deg = inc;
    const Constellation c = build_constellation(shells);
    const ShellSpec& first = c.shells.front();
    const double duration = x.dwell_duration_s > 0 ? x.dwell_duration_s : 2.0 * orbital_period_s(first.altitude_km);
    const auto emp = dwelling_time_empirical(c, x.dwell_resolutions, duration, x.dwell_step_s, threads);
    for (int r : x.dwell_resolutions) {
      DwellRow row;
      row.constellation = spec.name;
      row.inclination_deg = inc;
      row.altitude_km = first.altitude_km;
      row.resolution = r;
      row.analytic_s = dwelling_time_analytic(deg2rad(inc), first.altitude_km, r);
      row.ground_speed_km_s = ground_track_speed(deg2rad(inc), first.altitude_km);
      row.diameter_km = effective_diameter_km(r);
      row.empirical = emp.at(r);
      rows.push_back(row);
    }
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Resilience

struct ResilienceRow {
  std::string constellation;
  int resolution = 0;
  int seed = 0;
  std::string source_sat;
  int destinations = 0;
  int cells = 0;
  int induced_sats = 0;
  ResilienceReport report;

  double link_fraction() const { return report.links ? static_cast<double>(report.max_removable_links) / static_cast<double>(report.links) : 0.0; }
  double node_fraction() const {
    return report.removable_nodes ? static_cast<double>(report.max_removable_nodes) / static_cast<double>(report.removable_nodes) : 0.0;
  }
};

// The cell set is the one the packet's route plan names: the cells of the
// header encoded from a random source to random destinations at the
// experiment's resolution.
inline std::vector<ResilienceRow> resilience_experiment(const ScenarioSpec& spec, int threads = 1) {
  const ExperimentSpec& x = spec.experiments;
  const Constellation c = build_constellation(spec.shells);
  const double period = orbital_period_s(spec.shells.front().altitude_km);
  const int r = x.resilience_resolution;
  std::vector<ResilienceRow> rows(static_cast<std::size_t>(x.resilience_seeds));
  parallel_for(x.resilience_seeds, threads, [&](int seed) {
    Rng rng(derive_seed(spec.seed_value(), "resilience", {static_cast<std::uint64_t>(seed)}));
    const Snapshot snap = propagate(c, spec.epoch_start_s + rng.uniform(0.0, period));
    const CellMap cells(snap);
    const NodeId src = static_cast<NodeId>(rng.below(static_cast<std::uint64_t>(snap.size())));
    const Spt spt = shortest_path_tree(snap, src);
    std::vector<NodeId> pool;
    for (NodeId n = 0; n < snap.size(); ++n)
      if (n != src && spt.reachable(n) && snap.sat_id(n).shell == snap.sat_id(src).shell) pool.push_back(n);
    std::set<NodeId> dests;
    const int want = std::min<int>(x.resilience_destinations, static_cast<int>(pool.size()));
    while (static_cast<int>(dests.size()) < want) dests.insert(pool[rng.below(pool.size())]);

    ResilienceRow& row = rows[static_cast<std::size_t>(seed)];
    row.constellation = spec.name;
    row.resolution = r;
    row.seed = seed;
    row.source_sat = to_string(snap.sat_id(src));
    row.destinations = static_cast<int>(dests.size());
    if (dests.empty()) return;
    const Header h = encode(snap, src, dests, r, 1, &cells);
    const std::vector<CellId> plan = h.shells.front().tree.cells();
    const std::set<CellId> cell_set(plan.begin(), plan.end());
    row.cells = static_cast<int>(cell_set.size());
    row.report = resilience(snap, src, dests, cell_set, cells);
    row.induced_sats = static_cast<int>(row.report.removable_nodes) + row.destinations + 1;
  });
  return rows;
}

// ---------------------------------------------------------------------------
// CSV writers

inline void write_bitstring_csv(std::ostream& out, const std::vector<BitstringRow>& rows) {
  CsvWriter w(out, {"method", "terminals", "resolution", "bits", "segment_id_bits", "partitions", "destination_sats", "destination_cells"});
  for (const auto& r : rows)
    w.row({r.method, std::to_string(r.terminals), std::to_string(r.resolution), std::to_string(r.bits), std::to_string(r.segment_id_bits),
           std::to_string(r.partitions), std::to_string(r.destination_sats), std::to_string(r.destination_cells)});
}

inline void write_reach_csv(std::ostream& out, const std::vector<ReachRow>& rows) {
  CsvWriter w(out, {"method", "constellation", "seed", "destinations", "reached", "rate", "connected", "transmissions", "max_hops"});
  for (const auto& r : rows)
    w.row({r.method, r.constellation, std::to_string(r.seed), std::to_string(r.destinations), std::to_string(r.reached),
           detail::fmt_rate(r.reached, r.destinations), r.connected ? "1" : "0", std::to_string(r.transmissions), std::to_string(r.max_hops)});
}

inline void write_dwell_csv(std::ostream& out, const std::vector<DwellRow>& rows) {
  CsvWriter w(out, {"constellation", "inclination_deg", "resolution", "analytic_s", "empirical_mean_s", "empirical_p90_s", "empirical_median_s",
                    "empirical_p10_s", "dwells", "altitude_km", "ground_speed_km_s", "diameter_km"});
  for (const auto& r : rows)
    w.row({r.constellation, fmt_double(r.inclination_deg), std::to_string(r.resolution), r.analytic_s ? fmt_double(*r.analytic_s) : "inf",
           fmt_double(r.empirical.mean), fmt_double(r.empirical.p90), fmt_double(r.empirical.median), fmt_double(r.empirical.p10),
           std::to_string(r.empirical.count), fmt_double(r.altitude_km), fmt_double(r.ground_speed_km_s), fmt_double(r.diameter_km)});
}

inline void write_resilience_csv(std::ostream& out, const std::vector<ResilienceRow>& rows) {
  CsvWriter w(out, {"constellation", "resolution", "max_removable_links", "max_removable_nodes", "seed", "source_sat", "destinations",
                    "cells", "induced_sats", "induced_links", "link_fraction", "node_fraction"});
  for (const auto& r : rows)
    w.row({r.constellation, std::to_string(r.resolution), std::to_string(r.report.max_removable_links),
           std::to_string(r.report.max_removable_nodes), std::to_string(r.seed), r.source_sat, std::to_string(r.destinations),
           std::to_string(r.cells), std::to_string(r.induced_sats), std::to_string(r.report.links), fmt_double(r.link_fraction()), fmt_double(r.node_fraction())});
}

inline void write_snapshot_csv(std::ostream& out, const Snapshot& snap) {
  CsvWriter w(out, {"sat_id", "time_s", "lat", "lon", "alt_km"});
  for (NodeId n = 0; n < snap.size(); ++n) {
    const SatState& s = snap.sats[static_cast<std::size_t>(n)];
    w.row({to_string(snap.sat_id(n)), fmt_double(snap.time_s), fmt_double(s.sub.lat), fmt_double(s.sub.lon), fmt_double(s.alt_km)});
  }
}

inline void write_isl_csv(std::ostream& out, const Snapshot& snap) {
  CsvWriter w(out, {"sat_a", "sat_b", "km"});
  for (const Edge& e : snap.edges) w.row({to_string(snap.sat_id(e.a)), to_string(snap.sat_id(e.b)), fmt_double(e.km)});
}

}  // namespace bierstar
