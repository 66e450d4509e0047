#pragma once

// Hand-built snapshots for tests: arbitrary positions and links on one shell.

#include <memory>
#include <set>
#include <utility>
#include <vector>

#include "bierstar/orbit.hpp"
#include "bierstar/rng.hpp"
#include "bierstar/terminals.hpp"

namespace bierstar::testing {

struct Custom {
  std::unique_ptr<Constellation> con;
  Snapshot snap;
};

inline Custom custom_snapshot(const std::vector<GeoPoint>& pts, const std::vector<std::pair<int, int>>& links, double alt_km = 550) {
  Custom c;
  c.con = std::make_unique<Constellation>(build_walker({0, alt_km, 53, 1, static_cast<int>(pts.size()), 0, WalkerPattern::Delta}));
  Snapshot& s = c.snap;
  s.constellation = c.con.get();
  for (const auto& p : pts) {
    SatState st;
    st.sub = p;
    st.alt_km = alt_km;
    st.ecef = to_ecef(p, kEarthRadiusKm + alt_km);
    s.sats.push_back(st);
  }
  std::set<std::pair<int, int>> seen;
  for (auto [a, b] : links) {
    if (a == b) continue;
    if (a > b) std::swap(a, b);
    if (!seen.insert({a, b}).second) continue;
    s.edges.push_back({a, b, distance(s.sats[static_cast<std::size_t>(a)].ecef, s.sats[static_cast<std::size_t>(b)].ecef)});
  }
  std::sort(s.edges.begin(), s.edges.end(), [](const Edge& x, const Edge& y) { return x.a != y.a ? x.a < y.a : x.b < y.b; });
  s.adj.assign(pts.size(), {});
  for (const Edge& e : s.edges) {
    s.adj[static_cast<std::size_t>(e.a)].push_back({e.b, e.km});
    s.adj[static_cast<std::size_t>(e.b)].push_back({e.a, e.km});
  }
  for (auto& l : s.adj) std::sort(l.begin(), l.end(), [](const Link& x, const Link& y) { return x.to < y.to; });
  return c;
}

// n random points in a patch, each linked to its k nearest neighbours.
inline Custom random_geometric(int n, int k, Rng& rng, double lat_span = 40, double lon_span = 60) {
  std::vector<GeoPoint> pts;
  for (int i = 0; i < n; ++i) pts.push_back({rng.uniform(-lat_span / 2, lat_span / 2), rng.uniform(-lon_span / 2, lon_span / 2)});
  std::vector<std::pair<int, int>> links;
  for (int i = 0; i < n; ++i) {
    std::vector<std::pair<double, int>> d;
    for (int j = 0; j < n; ++j)
      if (j != i) d.push_back({great_circle_km(pts[static_cast<std::size_t>(i)], pts[static_cast<std::size_t>(j)]), j});
    std::sort(d.begin(), d.end());
    for (int m = 0; m < k && m < static_cast<int>(d.size()); ++m) links.push_back({i, d[static_cast<std::size_t>(m)].second});
  }
  return custom_snapshot(pts, links);
}

}  // namespace bierstar::testing
