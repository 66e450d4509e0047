#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <unordered_set>
#include <vector>

#include "bierstar/error.hpp"
#include "bierstar/geo.hpp"

namespace bierstar {

inline constexpr double kMuEarth = 398600.4418;           // km^3/s^2
inline constexpr double kSiderealDayS = 86164.0;          // one Earth rotation
inline constexpr double kEarthRateDegPerS = 360.0 / kSiderealDayS;

enum class WalkerPattern { Star, Delta };

struct ShellSpec {
  int shell_id = 0;
  double altitude_km = 550.0;
  double inclination_deg = 53.0;
  int planes = 1;
  int sats_per_plane = 1;
  int phasing_f = 0;
  WalkerPattern pattern = WalkerPattern::Delta;
};

inline ShellSpec starlink_like_shell() { return {0, 550.0, 53.0, 72, 22, 1, WalkerPattern::Delta}; }
inline ShellSpec oneweb_like_shell() { return {0, 1200.0, 87.4, 18, 36, 0, WalkerPattern::Star}; }

inline std::vector<std::string> validate_shell(const ShellSpec& s) {
  std::vector<std::string> errs;
  const std::string tag = "shell " + std::to_string(s.shell_id) + ": ";
  if (s.planes < 1) errs.push_back(tag + "planes must be >= 1");
  if (s.sats_per_plane < 1) errs.push_back(tag + "sats_per_plane must be >= 1");
  if (!(s.inclination_deg >= 0.0 && s.inclination_deg <= 180.0)) errs.push_back(tag + "inclination must be within 0..180");
  if (!(s.altitude_km > 0.0)) errs.push_back(tag + "altitude must be positive");
  if (s.planes >= 1 && (s.phasing_f < 0 || s.phasing_f >= s.planes)) errs.push_back(tag + "phasing_f must be within [0, planes)");
  if (s.shell_id < 0 || s.shell_id > 15) errs.push_back(tag + "shell_id must fit in 4 bits");
  return errs;
}

inline double orbital_period_s(double altitude_km) {
  const double a = kEarthRadiusKm + altitude_km;
  return 2.0 * kPi * std::sqrt(a * a * a / kMuEarth);
}

struct SatId {
  int shell = 0;
  int plane = 0;
  int slot = 0;

  friend bool operator==(const SatId&, const SatId&) = default;
  friend auto operator<=>(const SatId&, const SatId&) = default;
};

inline std::string to_string(const SatId& s) {
  return std::to_string(s.shell) + "-" + std::to_string(s.plane) + "-" + std::to_string(s.slot);
}

// Satellites are numbered densely in SatId order; all graph code works on
// these node numbers, so "lower node" and "lower SatId" coincide.
using NodeId = int;

struct Constellation {
  std::vector<ShellSpec> shells;
  std::vector<int> shell_offset;  // first node of each shell
  std::vector<SatId> sats;

  int size() const { return static_cast<int>(sats.size()); }

  NodeId node_of(const SatId& s) const {
    for (std::size_t k = 0; k < shells.size(); ++k) {
      const ShellSpec& sh = shells[k];
      if (sh.shell_id != s.shell) continue;
      if (s.plane < 0 || s.plane >= sh.planes || s.slot < 0 || s.slot >= sh.sats_per_plane) break;
      return shell_offset[k] + s.plane * sh.sats_per_plane + s.slot;
    }
    fail(ErrorKind::InvalidArgument, "unknown satellite " + to_string(s));
  }

  const ShellSpec& shell_of(NodeId n) const {
    const auto it = std::upper_bound(shell_offset.begin(), shell_offset.end(), n);
    return shells[static_cast<std::size_t>(it - shell_offset.begin() - 1)];
  }
};

inline Constellation build_constellation(std::vector<ShellSpec> shells) {
  if (shells.empty()) fail(ErrorKind::InvalidArgument, "constellation needs at least one shell");
  std::sort(shells.begin(), shells.end(), [](const ShellSpec& a, const ShellSpec& b) { return a.shell_id < b.shell_id; });
  Constellation c;
  for (std::size_t k = 0; k < shells.size(); ++k) {
    const auto errs = validate_shell(shells[k]);
    if (!errs.empty()) fail(ErrorKind::InvalidArgument, errs.front());
    if (k > 0 && shells[k].shell_id == shells[k - 1].shell_id) fail(ErrorKind::InvalidArgument, "duplicate shell id");
    c.shell_offset.push_back(c.size());
    for (int p = 0; p < shells[k].planes; ++p)
      for (int s = 0; s < shells[k].sats_per_plane; ++s) c.sats.push_back({shells[k].shell_id, p, s});
  }
  c.shells = std::move(shells);
  return c;
}

inline Constellation build_walker(const ShellSpec& spec) { return build_constellation({spec}); }

struct SatState {
  GeoPoint sub;        // sub-satellite point
  double alt_km = 0;
  Vec3 ecef;           // Earth-fixed position, km
  double arg_lat_deg = 0;  // in-plane angle, for period checks
};

struct Link {
  NodeId to;
  double km;
};

struct Edge {
  NodeId a;
  NodeId b;
  double km;
};

inline std::uint64_t edge_key(NodeId a, NodeId b) {
  if (a > b) std::swap(a, b);
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) | static_cast<std::uint32_t>(b);
}

using LinkSet = std::unordered_set<std::uint64_t>;
using NodeSet = std::unordered_set<NodeId>;

struct Snapshot {
  double time_s = 0;
  const Constellation* constellation = nullptr;
  std::vector<SatState> sats;
  std::vector<std::vector<Link>> adj;  // sorted by neighbor node
  std::vector<Edge> edges;             // a < b, sorted

  int size() const { return static_cast<int>(sats.size()); }
  const SatId& sat_id(NodeId n) const { return constellation->sats[static_cast<std::size_t>(n)]; }
};

inline SatState propagate_one(const ShellSpec& sh, int plane, int slot, double t) {
  const double spread = sh.pattern == WalkerPattern::Star ? 180.0 : 360.0;
  const double raan = deg2rad(spread * plane / sh.planes);
  const double total = static_cast<double>(sh.planes) * sh.sats_per_plane;
  const double u0 = 360.0 * slot / sh.sats_per_plane + 360.0 * sh.phasing_f * plane / total;
  const double period = orbital_period_s(sh.altitude_km);
  double u_deg = std::fmod(u0 + 360.0 * t / period, 360.0);
  const double u = deg2rad(u_deg);
  const double inc = deg2rad(sh.inclination_deg);
  const double r = kEarthRadiusKm + sh.altitude_km;

  const Vec3 eci{r * (std::cos(raan) * std::cos(u) - std::sin(raan) * std::sin(u) * std::cos(inc)),
                 r * (std::sin(raan) * std::cos(u) + std::cos(raan) * std::sin(u) * std::cos(inc)),
                 r * std::sin(u) * std::sin(inc)};
  const double theta = deg2rad(std::fmod(kEarthRateDegPerS * t, 360.0));
  const Vec3 ecef{std::cos(theta) * eci.x + std::sin(theta) * eci.y, -std::sin(theta) * eci.x + std::cos(theta) * eci.y, eci.z};

  SatState st;
  st.ecef = ecef;
  st.sub = from_ecef(ecef);
  st.alt_km = sh.altitude_km;
  st.arg_lat_deg = u_deg;
  return st;
}

// +grid wiring: ring within each plane, same slot across adjacent planes.
// Delta wraps across the last/first plane; Star leaves that seam open.
inline std::vector<Edge> plus_grid_isls(const Constellation& c, const std::vector<SatState>& sats) {
  std::vector<Edge> edges;
  std::unordered_set<std::uint64_t> seen;
  auto add = [&](NodeId a, NodeId b) {
    if (a == b) return;
    if (!seen.insert(edge_key(a, b)).second) return;
    edges.push_back({std::min(a, b), std::max(a, b),
                     distance(sats[static_cast<std::size_t>(a)].ecef, sats[static_cast<std::size_t>(b)].ecef)});
  };
  for (std::size_t k = 0; k < c.shells.size(); ++k) {
    const ShellSpec& sh = c.shells[k];
    const int base = c.shell_offset[k];
    const int P = sh.planes, S = sh.sats_per_plane;
    for (int p = 0; p < P; ++p) {
      for (int s = 0; s < S; ++s) {
        const NodeId me = base + p * S + s;
        add(me, base + p * S + (s + 1) % S);
        if (p + 1 < P) {
          add(me, base + (p + 1) * S + s);
        } else if (sh.pattern == WalkerPattern::Delta && P > 1) {
          add(me, base + s);
        }
      }
    }
  }
  std::sort(edges.begin(), edges.end(), [](const Edge& x, const Edge& y) { return x.a != y.a ? x.a < y.a : x.b < y.b; });
  return edges;
}

inline Snapshot propagate(const Constellation& c, double t) {
  if (!(t >= 0.0)) fail(ErrorKind::InvalidArgument, "time must be non-negative");
  Snapshot snap;
  snap.time_s = t;
  snap.constellation = &c;
  snap.sats.reserve(c.sats.size());
  for (std::size_t k = 0; k < c.shells.size(); ++k) {
    const ShellSpec& sh = c.shells[k];
    for (int p = 0; p < sh.planes; ++p)
      for (int s = 0; s < sh.sats_per_plane; ++s) snap.sats.push_back(propagate_one(sh, p, s, t));
  }
  snap.edges = plus_grid_isls(c, snap.sats);
  snap.adj.assign(snap.sats.size(), {});
  for (const Edge& e : snap.edges) {
    snap.adj[static_cast<std::size_t>(e.a)].push_back({e.b, e.km});
    snap.adj[static_cast<std::size_t>(e.b)].push_back({e.a, e.km});
  }
  for (auto& l : snap.adj) std::sort(l.begin(), l.end(), [](const Link& x, const Link& y) { return x.to < y.to; });
  return snap;
}

// Ground radius (km) within which a satellite at altitude h is seen at or above
// the elevation mask.
inline double coverage_radius_km(double altitude_km, double mask_deg) {
  const double eps = deg2rad(mask_deg);
  const double lambda = std::acos(kEarthRadiusKm * std::cos(eps) / (kEarthRadiusKm + altitude_km)) - eps;
  return kEarthRadiusKm * std::max(0.0, lambda);
}

inline double elevation_deg(const Vec3& sat_ecef, const GeoPoint& ground) {
  const Vec3 g = to_ecef(ground, kEarthRadiusKm);
  const Vec3 d{sat_ecef.x - g.x, sat_ecef.y - g.y, sat_ecef.z - g.z};
  const double dn = norm(d);
  if (dn == 0.0) return 90.0;
  const double s = dot(d, g) / (dn * kEarthRadiusKm);
  return rad2deg(std::asin(std::clamp(s, -1.0, 1.0)));
}

inline bool covers(const SatState& sat, const GeoPoint& ground, double mask_deg) {
  return elevation_deg(sat.ecef, ground) >= mask_deg - 1e-9;
}

inline double slant_range_km(const SatState& sat, const GeoPoint& ground) {
  return distance(sat.ecef, to_ecef(ground, kEarthRadiusKm));
}

inline bool is_connected(const Snapshot& snap) {
  if (snap.sats.empty()) return true;
  std::vector<char> seen(snap.sats.size(), 0);
  std::vector<NodeId> stack{0};
  seen[0] = 1;
  std::size_t count = 1;
  while (!stack.empty()) {
    const NodeId n = stack.back();
    stack.pop_back();
    for (const Link& l : snap.adj[static_cast<std::size_t>(n)]) {
      if (!seen[static_cast<std::size_t>(l.to)]) {
        seen[static_cast<std::size_t>(l.to)] = 1;
        ++count;
        stack.push_back(l.to);
      }
    }
  }
  return count == snap.sats.size();
}

}  // namespace bierstar
