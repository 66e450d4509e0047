#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <queue>
#include <set>
#include <thread>
#include <unordered_map>
#include <vector>

#include "bierstar/geogrid.hpp"
#include "bierstar/orbit.hpp"
#include "bierstar/routing/graph.hpp"

namespace bierstar {

inline constexpr double kOrbitalSpeedKmS = 7.66;

// Ground-track speed, km/s. Inclination in radians.
inline double ground_track_speed(double inclination_rad, double altitude_km) {
  return (kEarthRadiusKm + altitude_km) / kEarthRadiusKm * kOrbitalSpeedKmS * std::cos(inclination_rad);
}

// Seconds a sub-satellite point spends in one cell; empty when the
// ground-track speed vanishes.
inline std::optional<double> dwelling_time_analytic(double inclination_rad, double altitude_km, int r) {
  const double v = std::fabs(ground_track_speed(inclination_rad, altitude_km));
  if (v < 1e-9) return std::nullopt;
  return effective_diameter_km(r) / v;
}

struct DwellSummary {
  std::size_t count = 0;
  double mean = 0;
  double median = 0;
  double p10 = 0;
  double p90 = 0;
};

// Linear-interpolated quantile of sorted data.
inline double quantile_sorted(const std::vector<double>& v, double q) {
  if (v.empty()) return 0;
  const double pos = q * static_cast<double>(v.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - lo) * (v[hi] - v[lo]);
}

inline DwellSummary summarize(std::vector<double> v) {
  DwellSummary s;
  if (v.empty()) return s;
  std::sort(v.begin(), v.end());
  s.count = v.size();
  double sum = 0;
  for (double x : v) sum += x;
  s.mean = sum / static_cast<double>(v.size());
  s.median = quantile_sorted(v, 0.5);
  s.p10 = quantile_sorted(v, 0.1);
  s.p90 = quantile_sorted(v, 0.9);
  return s;
}

// Completed dwells in a sampled cell sequence. The stretch before the first
// change and after the last one is cut off by the window, so it is dropped. A
// sequence that never changes is one dwell spanning the whole window.
template <typename Cell>
std::vector<double> dwells_from_sequence(const std::vector<Cell>& seq, double step_s) {
  std::vector<double> out;
  if (seq.empty()) return out;
  std::vector<std::size_t> changes;
  for (std::size_t k = 1; k < seq.size(); ++k)
    if (!(seq[k] == seq[k - 1])) changes.push_back(k);
  if (changes.empty()) {
    out.push_back(step_s * static_cast<double>(seq.size() - 1));
    return out;
  }
  for (std::size_t k = 1; k < changes.size(); ++k) out.push_back(step_s * static_cast<double>(changes[k] - changes[k - 1]));
  return out;
}

template <typename Fn>
void parallel_for(int n, int threads, Fn&& fn) {
  threads = std::max(1, std::min(threads, n));
  if (threads == 1) {
    for (int k = 0; k < n; ++k) fn(k);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  for (int t = 0; t < threads; ++t)
    pool.emplace_back([&] {
      for (int k = next++; k < n; k = next++) fn(k);
    });
  for (auto& th : pool) th.join();
}

// Empirical dwell per resolution. Each satellite is propagated on its own and
// its cell sequence sampled every step_s; results come back keyed by r.
inline std::map<int, DwellSummary> dwelling_time_empirical(const Constellation& c, const std::vector<int>& resolutions,
                                                           double duration_s, double step_s, int threads = 1) {
  if (!(step_s > 0) || !(duration_s > step_s)) fail(ErrorKind::InvalidArgument, "dwell window must be longer than one step");
  if (resolutions.empty()) fail(ErrorKind::InvalidArgument, "no resolutions requested");
  int finest = 0;
  for (int r : resolutions) {
    detail::check_hex_res(r);
    finest = std::max(finest, r);
  }
  const std::size_t steps = static_cast<std::size_t>(std::floor(duration_s / step_s)) + 1;
  const int n = c.size();
  std::vector<std::map<int, std::vector<double>>> per_sat(static_cast<std::size_t>(n));
  parallel_for(n, threads, [&](int node) {
    const SatId& id = c.sats[static_cast<std::size_t>(node)];
    const ShellSpec& sh = c.shell_of(node);
    std::vector<std::vector<detail::h3::Index>> seq(resolutions.size());
    for (auto& s : seq) s.reserve(steps);
    for (std::size_t k = 0; k < steps; ++k) {
      const SatState st = propagate_one(sh, id.plane, id.slot, static_cast<double>(k) * step_s);
      const detail::h3::Index fine = detail::h3::lat_lng_to_cell({deg2rad(st.sub.lat), deg2rad(st.sub.lon)}, finest);
      for (std::size_t j = 0; j < resolutions.size(); ++j)
        seq[j].push_back(resolutions[j] == finest ? fine : detail::h3::cell_to_parent(fine, resolutions[j]));
    }
    auto& mine = per_sat[static_cast<std::size_t>(node)];
    for (std::size_t j = 0; j < resolutions.size(); ++j) mine[resolutions[j]] = dwells_from_sequence(seq[j], step_s);
  });
  std::map<int, DwellSummary> out;
  for (int r : resolutions) {
    std::vector<double> all;
    for (const auto& m : per_sat) {
      const auto& v = m.at(r);
      all.insert(all.end(), v.begin(), v.end());
    }
    if (all.empty()) fail(ErrorKind::InvalidArgument, "dwell window too short to complete any dwell at r=" + std::to_string(r));
    out[r] = summarize(std::move(all));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Resilience

class MaxFlow {
 public:
  explicit MaxFlow(int n) : g_(static_cast<std::size_t>(n)), level_(static_cast<std::size_t>(n)), it_(static_cast<std::size_t>(n)) {}

  void add_edge(int u, int v, long long cap, long long rev_cap = 0) {
    g_[static_cast<std::size_t>(u)].push_back({v, cap, static_cast<int>(g_[static_cast<std::size_t>(v)].size())});
    g_[static_cast<std::size_t>(v)].push_back({u, rev_cap, static_cast<int>(g_[static_cast<std::size_t>(u)].size()) - 1});
  }

  long long run(int s, int t) {
    long long flow = 0;
    while (bfs(s, t)) {
      std::fill(it_.begin(), it_.end(), 0);
      while (long long f = dfs(s, t, kBig)) flow += f;
    }
    return flow;
  }

  static constexpr long long kBig = std::numeric_limits<long long>::max() / 4;

 private:
  struct E {
    int to;
    long long cap;
    int rev;
  };

  bool bfs(int s, int t) {
    std::fill(level_.begin(), level_.end(), -1);
    std::queue<int> q;
    level_[static_cast<std::size_t>(s)] = 0;
    q.push(s);
    while (!q.empty()) {
      const int u = q.front();
      q.pop();
      for (const E& e : g_[static_cast<std::size_t>(u)])
        if (e.cap > 0 && level_[static_cast<std::size_t>(e.to)] < 0) {
          level_[static_cast<std::size_t>(e.to)] = level_[static_cast<std::size_t>(u)] + 1;
          q.push(e.to);
        }
    }
    return level_[static_cast<std::size_t>(t)] >= 0;
  }

  long long dfs(int u, int t, long long f) {
    if (u == t) return f;
    for (int& i = it_[static_cast<std::size_t>(u)]; i < static_cast<int>(g_[static_cast<std::size_t>(u)].size()); ++i) {
      E& e = g_[static_cast<std::size_t>(u)][static_cast<std::size_t>(i)];
      if (e.cap <= 0 || level_[static_cast<std::size_t>(e.to)] != level_[static_cast<std::size_t>(u)] + 1) continue;
      if (long long d = dfs(e.to, t, std::min(f, e.cap)); d > 0) {
        e.cap -= d;
        g_[static_cast<std::size_t>(e.to)][static_cast<std::size_t>(e.rev)].cap += d;
        return d;
      }
    }
    return 0;
  }

  std::vector<std::vector<E>> g_;
  std::vector<int> level_;
  std::vector<int> it_;
};

// Plain undirected graph on nodes 0..n-1; used for induced subgraphs.
struct SimpleGraph {
  int n = 0;
  std::vector<std::pair<int, int>> edges;
};

struct CutPair {
  long long edge_cut = 0;
  long long vertex_cut = 0;

  friend bool operator==(const CutPair&, const CutPair&) = default;
};

struct ResilienceReport {
  long long max_removable_links = 0;
  long long max_removable_nodes = 0;
  std::size_t links = 0;            // links in the induced subgraph
  std::size_t removable_nodes = 0;  // nodes other than source and destinations
  std::map<int, CutPair> per_destination_cuts;  // local node -> cuts
};

// Min edge and vertex cuts from src to each destination. Source and
// destinations are never removed. A cut that cannot exist (e.g. adjacent
// endpoints for vertices) is reported as one more than the removable pool.
inline ResilienceReport resilience_graph(const SimpleGraph& g, int src, const std::set<int>& dests) {
  ResilienceReport rep;
  rep.links = g.edges.size();
  std::set<int> protected_nodes(dests);
  protected_nodes.insert(src);
  rep.removable_nodes = static_cast<std::size_t>(g.n) - protected_nodes.size();
  long long min_e = std::numeric_limits<long long>::max(), min_v = min_e;
  for (int d : dests) {
    if (d == src) continue;
    MaxFlow fe(g.n);
    for (auto [a, b] : g.edges) fe.add_edge(a, b, 1, 1);
    long long ec = fe.run(src, d);
    // node split: v_in = v, v_out = v + n
    MaxFlow fv(2 * g.n);
    for (int v = 0; v < g.n; ++v) fv.add_edge(v, v + g.n, protected_nodes.count(v) ? MaxFlow::kBig : 1);
    for (auto [a, b] : g.edges) {
      fv.add_edge(a + g.n, b, MaxFlow::kBig);
      fv.add_edge(b + g.n, a, MaxFlow::kBig);
    }
    long long vc = fv.run(src + g.n, d);
    if (vc >= MaxFlow::kBig) vc = static_cast<long long>(rep.removable_nodes) + 1;
    rep.per_destination_cuts[d] = {ec, vc};
    min_e = std::min(min_e, ec);
    min_v = std::min(min_v, vc);
  }
  if (rep.per_destination_cuts.empty()) {
    min_e = static_cast<long long>(rep.links) + 1;
    min_v = static_cast<long long>(rep.removable_nodes) + 1;
  }
  rep.max_removable_links = std::max(0LL, min_e - 1);
  rep.max_removable_nodes = std::max(0LL, min_v - 1);
  return rep;
}

struct InducedSubgraph {
  SimpleGraph graph;
  std::vector<NodeId> nodes;                 // local -> snapshot node
  std::unordered_map<NodeId, int> local_of;  // snapshot node -> local
};

inline InducedSubgraph induced_by_cells(const Snapshot& snap, const std::set<CellId>& cell_set, const CellMap& cells) {
  InducedSubgraph sub;
  if (cell_set.empty()) return sub;
  const int r = cell_set.begin()->resolution;
  for (NodeId n = 0; n < snap.size(); ++n) {
    if (cell_set.count(cells.cell(n, r))) {
      sub.local_of[n] = static_cast<int>(sub.nodes.size());
      sub.nodes.push_back(n);
    }
  }
  sub.graph.n = static_cast<int>(sub.nodes.size());
  for (const Edge& e : snap.edges) {
    auto a = sub.local_of.find(e.a), b = sub.local_of.find(e.b);
    if (a != sub.local_of.end() && b != sub.local_of.end()) sub.graph.edges.emplace_back(a->second, b->second);
  }
  return sub;
}

inline ResilienceReport resilience(const Snapshot& snap, NodeId src, const std::set<NodeId>& dests, const std::set<CellId>& cell_set,
                                   const CellMap& cells) {
  const InducedSubgraph sub = induced_by_cells(snap, cell_set, cells);
  auto local = [&](NodeId n) {
    auto it = sub.local_of.find(n);
    if (it == sub.local_of.end()) fail(ErrorKind::InvalidArgument, "satellite " + std::to_string(n) + " lies outside the cell set");
    return it->second;
  };
  std::set<int> ld;
  for (NodeId d : dests) ld.insert(local(d));
  ResilienceReport rep = resilience_graph(sub.graph, local(src), ld);
  std::map<int, CutPair> remapped;
  for (const auto& [k, v] : rep.per_destination_cuts) remapped[sub.nodes[static_cast<std::size_t>(k)]] = v;
  rep.per_destination_cuts = std::move(remapped);
  return rep;
}

}  // namespace bierstar
