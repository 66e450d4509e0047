#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <string>
#include <vector>

#include "bierstar/baselines.hpp"
#include "bierstar/csv.hpp"
#include "bierstar/header.hpp"
#include "bierstar/membership.hpp"
#include "bierstar/metrics.hpp"
#include "bierstar/orbit.hpp"
#include "bierstar/rng.hpp"
#include "bierstar/routing/protocol.hpp"
#include "bierstar/scenario.hpp"
#include "bierstar/terminals.hpp"

namespace bierstar {

struct EpochSummary {
  int epoch = 0;
  double time_s = 0;
  int satellites = 0;
  int isls = 0;
  bool connected = false;
  int failed_links = 0;
  int failed_nodes = 0;
  int joins = 0;
  int leaves = 0;
  int handovers = 0;
  int refreshes = 0;
  int pruned = 0;
  int uncovered = 0;     // member terminals with no satellite above the mask
  int member_cells = 0;  // distinct user-layer cells holding active members
};

struct HeaderRow {
  GroupId group_id = 0;
  std::string source_sat;  // empty when the source had no coverage
  int destination_sats = 0;
  int tree_nodes = 0;
  int dest_cells = 0;
  std::size_t bits = 0;
  std::string hex;
};

struct RunReachRow {
  GroupId group_id = 0;
  std::string method;
  int destinations = 0;
  int reached = 0;
  int transmissions = 0;
  int unroutable = 0;
  int ttl_drops = 0;
};

struct RunBitRow {
  GroupId group_id = 0;
  std::string method;
  int terminals = 0;
  int resolution = -1;  // -1: not a cell-based method
  std::size_t bits = 0;
};

struct EpochTrace {
  EpochSummary summary;
  std::vector<HeaderRow> headers;
  std::vector<RunReachRow> reach;
  std::vector<RunBitRow> bits;
};

// Terminals and per-group member lists, drawn once per run.
struct Population {
  std::vector<Terminal> terminals;
  std::map<GroupId, std::vector<std::size_t>> members;  // indices into terminals
};

inline std::vector<Terminal> make_terminals(const ScenarioSpec& s) {
  const TerminalSpec& t = s.terminals;
  Rng rng(derive_seed(s.seed_value(), "terminals"));
  if (t.generator == "csv") return load_terminals_csv(t.path);
  if (t.generator == "clustered") return clustered_terminals(t.count, t.centers, t.sigma_km, rng);
  if (t.generator == "corridor") return corridor_terminals(t.count, t.from, t.to, t.width_km, rng);
  return uniform_sphere_terminals(t.count, rng);
}

inline Population make_population(const ScenarioSpec& s) {
  Population pop;
  pop.terminals = make_terminals(s);
  std::vector<std::string> errs;
  for (const GroupSpec& g : s.groups) {
    std::vector<std::size_t> idx;
    if (g.members == "fraction") {
      std::vector<std::size_t> all(pop.terminals.size());
      std::iota(all.begin(), all.end(), std::size_t{0});
      Rng rng(derive_seed(s.seed_value(), "members", {g.group_id}));
      const std::size_t take = static_cast<std::size_t>(std::llround(g.fraction * static_cast<double>(all.size())));
      for (std::size_t k = 0; k < take; ++k) std::swap(all[k], all[k + rng.below(all.size() - k)]);
      idx.assign(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(take));
      std::sort(idx.begin(), idx.end());
    } else {
      for (std::size_t k = 0; k < pop.terminals.size(); ++k) {
        if (g.members == "region" &&
            great_circle_km(pop.terminals[k].location_at(s.epoch_start_s), g.region_center) > g.region_radius_km)
          continue;
        idx.push_back(k);
      }
    }
    if (idx.empty()) errs.push_back("group " + std::to_string(g.group_id) + ": member filter selects no terminals");
    pop.members[g.group_id] = std::move(idx);
  }
  if (!errs.empty()) throw ValidationError(std::move(errs));
  return pop;
}

inline Failures sample_failures(const FailureSpec& f, const Snapshot& snap, std::uint64_t seed) {
  Failures out;
  if (f.model != "random") return out;
  Rng rng(seed);
  for (const Edge& e : snap.edges)
    if (rng.bernoulli(f.link_rate)) out.links.insert(edge_key(e.a, e.b));
  for (NodeId n = 0; n < snap.size(); ++n)
    if (rng.bernoulli(f.node_rate)) out.nodes.insert(n);
  return out;
}

// Source satellite of a group at this epoch; gateways attach to their serving
// satellite.
inline std::optional<NodeId> group_source(const GroupSpec& g, const Snapshot& snap, double mask_deg) {
  if (g.source == "sat") return snap.constellation->node_of(g.source_sat);
  return find_serving_satellite(g.gateway, snap, mask_deg);
}

class Simulation {
 public:
  explicit Simulation(ScenarioSpec spec, int threads = 1)
      : spec_(checked(std::move(spec))), threads_(std::max(1, threads)), constellation_(build_constellation(spec_.shells)) {
    pop_ = make_population(spec_);
    registry_.refresh_interval_s = spec_.refresh_interval_s;
    registry_.timeout_s = spec_.timeout_s;
    for (const GroupSpec& g : spec_.groups) registry_.add_group(g.group_id);
  }

  const Constellation& constellation() const { return constellation_; }
  const IngressRegistry& registry() const { return registry_; }

  std::vector<EpochTrace> run() {
    std::vector<EpochTrace> out;
    for (int e = 0; e < spec_.epoch_count(); ++e) out.push_back(step(e));
    return out;
  }

  EpochTrace step(int epoch) {
    const double t = spec_.epoch_start_s + epoch * spec_.epoch_s;
    const Snapshot snap = propagate(constellation_, t);
    EpochTrace tr;
    EpochSummary& sum = tr.summary;
    sum.epoch = epoch;
    sum.time_s = t;
    sum.satellites = snap.size();
    sum.isls = static_cast<int>(snap.edges.size());
    sum.connected = is_connected(snap);

    // user layer: terminals signal their current serving satellite
    std::map<std::size_t, std::optional<NodeId>> serving;
    std::map<std::size_t, GeoPoint> where;
    for (const GroupSpec& g : spec_.groups)
      for (std::size_t k : pop_.members.at(g.group_id))
        if (!serving.count(k)) {
          where[k] = pop_.terminals[k].location_at(t);
          serving[k] = find_serving_satellite(where[k], snap, spec_.elevation_mask_deg);
        }
    std::set<std::uint64_t> user_cells;
    for (const GroupSpec& g : spec_.groups) {
      for (std::size_t k : pop_.members.at(g.group_id)) {
        const Terminal& term = pop_.terminals[k];
        const MembershipRecord* rec = registry_.find(g.group_id, term.id);
        const auto& s = serving.at(k);
        if (!s) {
          ++sum.uncovered;
          if (rec) {
            registry_.process({EventType::Leave, g.group_id, term.id, {}}, t);
            ++sum.leaves;
          }
          continue;
        }
        const SatId sat = snap.sat_id(*s);
        if (!rec) {
          registry_.process({EventType::Join, g.group_id, term.id, sat}, t);
          ++sum.joins;
        } else if (rec->serving_sat != sat) {
          registry_.process({EventType::Handover, g.group_id, term.id, sat}, t);
          ++sum.handovers;
        } else if (t - rec->last_refresh_s >= registry_.refresh_interval_s) {
          registry_.process({EventType::Refresh, g.group_id, term.id, sat}, t);
          ++sum.refreshes;
        }
        user_cells.insert(cell_index_fast(where.at(k), spec_.user_resolution).index);
      }
    }
    sum.pruned = static_cast<int>(registry_.prune(t));
    sum.member_cells = static_cast<int>(user_cells.size());

    const Failures failures = sample_failures(spec_.failures, snap, derive_seed(spec_.seed_value(), "failures", {static_cast<std::uint64_t>(epoch)}));
    sum.failed_links = static_cast<int>(failures.links.size());
    sum.failed_nodes = static_cast<int>(failures.nodes.size());

    const CellMap cells(snap);
    cells.cell(0, spec_.resolution);  // fill the cache before workers share it

    const int ng = static_cast<int>(spec_.groups.size());
    std::vector<EpochTrace> parts(static_cast<std::size_t>(ng));
    parallel_for(ng, threads_, [&](int gi) {
      evaluate_group(spec_.groups[static_cast<std::size_t>(gi)], snap, cells, failures, where, t, parts[static_cast<std::size_t>(gi)]);
    });
    for (auto& p : parts) {
      tr.headers.insert(tr.headers.end(), p.headers.begin(), p.headers.end());
      tr.reach.insert(tr.reach.end(), p.reach.begin(), p.reach.end());
      tr.bits.insert(tr.bits.end(), p.bits.begin(), p.bits.end());
    }
    return tr;
  }

 private:
  static ScenarioSpec checked(ScenarioSpec s) {
    if (auto errs = validate(s); !errs.empty()) throw ValidationError(std::move(errs));
    return s;
  }

  void evaluate_group(const GroupSpec& g, const Snapshot& snap, const CellMap& cells, const Failures& failures,
                      const std::map<std::size_t, GeoPoint>& where,
                      double t, EpochTrace& out) const {
    const std::set<NodeId> dests = member_nodes(registry_, g.group_id, t, constellation_);
    const std::optional<NodeId> src = group_source(g, snap, spec_.elevation_mask_deg);

    // active members and their positions, for the bitstring baselines
    std::vector<GeoPoint> member_points;
    for (std::size_t k : pop_.members.at(g.group_id)) {
      const MembershipRecord* rec = registry_.find(g.group_id, pop_.terminals[k].id);
      if (rec && !registry_.expired(*rec, t)) member_points.push_back(where.at(k));
    }

    HeaderRow hr;
    hr.group_id = g.group_id;
    hr.destination_sats = static_cast<int>(dests.size());
    std::optional<Header> header;
    if (src) {
      hr.source_sat = to_string(snap.sat_id(*src));
      // the ingress encodes on the nominal graph; it does not see failures
      const Spt spt = shortest_path_tree(snap, *src);
      std::set<NodeId> encodable;
      for (NodeId d : dests)
        if (spt.reachable(d) && snap.sat_id(d).shell == snap.sat_id(*src).shell) encodable.insert(d);
      if (!encodable.empty()) {
        header = encode(snap, *src, encodable, spec_.resolution, g.group_id, &cells);
        const EncodedHeader enc = serialize(*header);
        hr.tree_nodes = static_cast<int>(header->shells.front().tree.size());
        hr.dest_cells = static_cast<int>(header->shells.front().tree.dest_cells().size());
        hr.bits = enc.bit_length;
        hr.hex = to_hex(enc.bytes);
      }
    }
    out.headers.push_back(hr);

    for (Method m : spec_.methods) {
      const std::string name = to_string(m);
      if (m == Method::BierStar || greedy_kind(m)) {
        RunReachRow row{g.group_id, name, static_cast<int>(dests.size()), 0, 0, 0, 0};
        if (src && !dests.empty()) {
          DeliveryReport rep;
          if (m == Method::BierStar) {
            if (header) rep = run_multicast(snap, *header, *src, dests, failures, spec_.ttl);
          } else {
            GreedyVariant v = spec_.greedy;
            v.kind = *greedy_kind(m);
            rep = greedy_multicast(v, *src, dests, snap, failures);
          }
          for (NodeId d : dests) row.reached += static_cast<int>(rep.delivered.count(d));
          row.transmissions = rep.transmissions;
          row.unroutable = static_cast<int>(rep.unroutable.size());
          row.ttl_drops = rep.ttl_drops;
        }
        out.reach.push_back(row);
      }
      if (m == Method::BierStar) {
        out.bits.push_back({g.group_id, name, static_cast<int>(member_points.size()), spec_.resolution, hr.bits});
      } else if (m == Method::Traditional) {
        out.bits.push_back({g.group_id, name, static_cast<int>(member_points.size()), -1, traditional_bitstring_bits(member_points.size())});
      } else if (m == Method::GeoR0 || m == Method::GeoR1) {
        const int r = m == Method::GeoR0 ? 0 : 1;
        const SegmentedResult sr = segmented_bitstring_bits(member_points, PartitionScheme::geo(r));
        out.bits.push_back({g.group_id, name, static_cast<int>(member_points.size()), r, sr.bits});
      } else if (m == Method::SatFoot) {
        const SegmentedResult sr = segmented_bitstring_bits(member_points, PartitionScheme::sat_footprint(), &snap, spec_.elevation_mask_deg);
        out.bits.push_back({g.group_id, name, static_cast<int>(member_points.size()), -1, sr.bits});
      }
    }
  }

  ScenarioSpec spec_;
  int threads_;
  Constellation constellation_;
  Population pop_;
  IngressRegistry registry_;
};

inline std::vector<EpochTrace> run(const ScenarioSpec& spec, int threads = 1) { return Simulation(spec, threads).run(); }

// ---------------------------------------------------------------------------
// Output

namespace detail {

inline std::string fmt_rate(int reached, int total) {
  return total == 0 ? std::string("NA") : fmt_double(static_cast<double>(reached) / static_cast<double>(total));
}

}  // namespace detail

// Opens dir/name for writing; refuses to replace an existing file unless
// `force` is set.
inline std::ofstream open_output(const std::filesystem::path& dir, const std::string& name, bool force) {
  std::filesystem::create_directories(dir);
  const auto p = dir / name;
  if (std::filesystem::exists(p) && !force) fail(ErrorKind::Io, p.string() + " exists (use --force to overwrite)");
  std::ofstream out(p, std::ios::binary);
  if (!out) fail(ErrorKind::Io, "cannot write " + p.string());
  return out;
}

inline const std::vector<std::string>& run_output_files() {
  static const std::vector<std::string> f{"epochs.csv", "headers.csv", "run_reach.csv", "run_bitstring.csv"};
  return f;
}

inline void write_run_outputs(const std::filesystem::path& dir, const std::vector<EpochTrace>& traces, bool force) {
  if (!force)
    for (const auto& f : run_output_files())
      if (std::filesystem::exists(dir / f)) fail(ErrorKind::Io, (dir / f).string() + " exists (use --force to overwrite)");
  {
    auto out = open_output(dir, "epochs.csv", true);
    CsvWriter w(out, {"epoch", "time_s", "satellites", "isls", "connected", "failed_links", "failed_nodes", "joins", "leaves",
                      "handovers", "refreshes", "pruned", "uncovered_terminals", "member_cells"});
    for (const auto& tr : traces) {
      const auto& s = tr.summary;
      w.row({std::to_string(s.epoch), fmt_double(s.time_s), std::to_string(s.satellites), std::to_string(s.isls),
             s.connected ? "1" : "0", std::to_string(s.failed_links), std::to_string(s.failed_nodes), std::to_string(s.joins),
             std::to_string(s.leaves), std::to_string(s.handovers), std::to_string(s.refreshes), std::to_string(s.pruned),
             std::to_string(s.uncovered), std::to_string(s.member_cells)});
    }
  }
  {
    auto out = open_output(dir, "headers.csv", true);
    CsvWriter w(out, {"epoch", "time_s", "group_id", "source_sat", "destination_sats", "tree_nodes", "dest_cells", "header_bits",
                      "header_hex"});
    for (const auto& tr : traces)
      for (const auto& h : tr.headers)
        w.row({std::to_string(tr.summary.epoch), fmt_double(tr.summary.time_s), std::to_string(h.group_id), h.source_sat,
               std::to_string(h.destination_sats), std::to_string(h.tree_nodes), std::to_string(h.dest_cells), std::to_string(h.bits),
               h.hex});
  }
  {
    auto out = open_output(dir, "run_reach.csv", true);
    CsvWriter w(out, {"epoch", "time_s", "group_id", "method", "destinations", "reached", "rate", "transmissions", "unroutable",
                      "ttl_drops"});
    for (const auto& tr : traces)
      for (const auto& r : tr.reach)
        w.row({std::to_string(tr.summary.epoch), fmt_double(tr.summary.time_s), std::to_string(r.group_id), r.method,
               std::to_string(r.destinations), std::to_string(r.reached), detail::fmt_rate(r.reached, r.destinations),
               std::to_string(r.transmissions), std::to_string(r.unroutable), std::to_string(r.ttl_drops)});
  }
  {
    auto out = open_output(dir, "run_bitstring.csv", true);
    CsvWriter w(out, {"epoch", "time_s", "group_id", "method", "terminals", "resolution", "bits"});
    for (const auto& tr : traces)
      for (const auto& b : tr.bits)
        w.row({std::to_string(tr.summary.epoch), fmt_double(tr.summary.time_s), std::to_string(b.group_id), b.method,
               std::to_string(b.terminals), std::to_string(b.resolution), std::to_string(b.bits)});
  }
}

}  // namespace bierstar
