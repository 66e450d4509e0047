#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "bierstar/csv.hpp"
#include "bierstar/error.hpp"
#include "bierstar/geo.hpp"
#include "bierstar/rng.hpp"

namespace bierstar {

struct TrackSample {
  double time_s = 0;
  GeoPoint where;
};

struct Terminal {
  std::string id;
  std::vector<TrackSample> track;  // sorted by time; one entry for a fixed terminal

  // Sample-and-hold: the latest sample at or before t, else the first one.
  const GeoPoint& location_at(double t) const {
    const auto it = std::upper_bound(track.begin(), track.end(), t,
                                     [](double v, const TrackSample& s) { return v < s.time_s; });
    return it == track.begin() ? track.front().where : std::prev(it)->where;
  }
};

inline Terminal fixed_terminal(std::string id, GeoPoint p) { return {std::move(id), {{0.0, p}}}; }

// Destination point at angular distance `dist_rad` along bearing `brg` (radians).
inline GeoPoint travel(const GeoPoint& from, double brg, double dist_rad) {
  const double la = deg2rad(from.lat), lo = deg2rad(from.lon);
  const double sla = std::sin(la) * std::cos(dist_rad) + std::cos(la) * std::sin(dist_rad) * std::cos(brg);
  const double la2 = std::asin(std::clamp(sla, -1.0, 1.0));
  const double lo2 = lo + std::atan2(std::sin(brg) * std::sin(dist_rad) * std::cos(la),
                                     std::cos(dist_rad) - std::sin(la) * std::sin(la2));
  return {rad2deg(la2), wrap_lon(rad2deg(lo2))};
}

inline GeoPoint random_sphere_point(Rng& rng) {
  const double z = rng.uniform(-1.0, 1.0);
  return {rad2deg(std::asin(z)), wrap_lon(rng.uniform(-180.0, 180.0))};
}

inline std::vector<Terminal> uniform_sphere_terminals(int n, Rng& rng) {
  std::vector<Terminal> out;
  out.reserve(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) out.push_back(fixed_terminal("t" + std::to_string(k), random_sphere_point(rng)));
  return out;
}

// Uniform along the great circle from a to b, Gaussian across it.
inline std::vector<Terminal> corridor_terminals(int n, const GeoPoint& a, const GeoPoint& b, double width_km, Rng& rng) {
  const double len = central_angle(a, b);
  const double brg = bearing(a, b);
  std::vector<Terminal> out;
  out.reserve(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) {
    const GeoPoint on = travel(a, brg, rng.uniform01() * len);
    const double off = rng.normal() * width_km / kEarthRadiusKm;
    const double local = bearing(on, b);
    const GeoPoint p = travel(on, local + kPi / 2, off);
    out.push_back(fixed_terminal("t" + std::to_string(k), p));
  }
  return out;
}

// Gaussian blobs around the given centers, terminals assigned round-robin.
inline std::vector<Terminal> clustered_terminals(int n, const std::vector<GeoPoint>& centers, double sigma_km, Rng& rng) {
  if (centers.empty()) fail(ErrorKind::InvalidArgument, "clustered generator needs at least one center");
  std::vector<Terminal> out;
  out.reserve(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) {
    const GeoPoint& c = centers[static_cast<std::size_t>(k) % centers.size()];
    const double dx = rng.normal(), dy = rng.normal();
    const double dist = std::sqrt(dx * dx + dy * dy) * sigma_km / kEarthRadiusKm;
    out.push_back(fixed_terminal("t" + std::to_string(k), travel(c, std::atan2(dx, dy), dist)));
  }
  return out;
}

// CSV with columns terminal_id,lat,lon[,time_s]; repeated ids form a trajectory.
inline std::vector<Terminal> load_terminals_csv(std::istream& in) {
  const CsvTable t = read_csv(in);
  const int c_id = t.column("terminal_id"), c_lat = t.column("lat"), c_lon = t.column("lon");
  const int c_time = t.find_column("time_s");
  std::map<std::string, Terminal> by_id;
  std::vector<std::string> order;
  for (std::size_t row = 0; row < t.rows.size(); ++row) {
    const auto& r = t.rows[row];
    const std::string& id = r[static_cast<std::size_t>(c_id)];
    TrackSample s;
    try {
      s.where = make_point(parse_double(r[static_cast<std::size_t>(c_lat)]), parse_double(r[static_cast<std::size_t>(c_lon)]));
      s.time_s = c_time >= 0 && !r[static_cast<std::size_t>(c_time)].empty() ? parse_double(r[static_cast<std::size_t>(c_time)]) : 0.0;
    } catch (const Error& e) {
      fail(ErrorKind::Parse, "terminal csv row " + std::to_string(row + 2) + ": " + e.what());
    }
    auto [it, fresh] = by_id.try_emplace(id, Terminal{id, {}});
    if (fresh) order.push_back(id);
    it->second.track.push_back(s);
  }
  std::vector<Terminal> out;
  for (const auto& id : order) {
    Terminal term = std::move(by_id[id]);
    std::stable_sort(term.track.begin(), term.track.end(), [](const TrackSample& x, const TrackSample& y) { return x.time_s < y.time_s; });
    out.push_back(std::move(term));
  }
  return out;
}

inline std::vector<Terminal> load_terminals_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::Io, "cannot read terminal file " + path);
  return load_terminals_csv(in);
}

}  // namespace bierstar
