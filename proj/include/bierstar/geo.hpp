#pragma once

#include <algorithm>
#include <cmath>
#include <string>

#include "bierstar/error.hpp"

namespace bierstar {

inline constexpr double kEarthRadiusKm = 6371.0;
inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kDegToRad = kPi / 180.0;
inline constexpr double kRadToDeg = 180.0 / kPi;

inline double deg2rad(double d) { return d * kDegToRad; }
inline double rad2deg(double r) { return r * kRadToDeg; }

struct GeoPoint {
  double lat = 0.0;  // degrees
  double lon = 0.0;  // degrees, [-180, 180)

  friend bool operator==(const GeoPoint&, const GeoPoint&) = default;
};

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
};

inline double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
inline double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }
inline double distance(const Vec3& a, const Vec3& b) {
  const Vec3 d{a.x - b.x, a.y - b.y, a.z - b.z};
  return norm(d);
}

// Wraps any finite longitude into [-180, 180).
inline double wrap_lon(double lon) {
  double w = std::fmod(lon + 180.0, 360.0);
  if (w < 0) w += 360.0;
  w -= 180.0;
  if (w >= 180.0) w -= 360.0;
  return w;
}

// Checked constructor. Latitude is never clamped; longitude 180 folds to -180.
inline GeoPoint make_point(double lat, double lon) {
  if (!std::isfinite(lat) || lat < -90.0 || lat > 90.0) fail(ErrorKind::InvalidArgument, "latitude out of range: " + std::to_string(lat));
  if (!std::isfinite(lon) || lon < -180.0 || lon > 180.0) fail(ErrorKind::InvalidArgument, "longitude out of range: " + std::to_string(lon));
  return {lat, lon == 180.0 ? -180.0 : lon};
}

inline Vec3 to_ecef(const GeoPoint& p, double radius_km) {
  const double la = deg2rad(p.lat);
  const double lo = deg2rad(p.lon);
  return {radius_km * std::cos(la) * std::cos(lo), radius_km * std::cos(la) * std::sin(lo), radius_km * std::sin(la)};
}

inline GeoPoint from_ecef(const Vec3& v) {
  const double r = norm(v);
  double lat = rad2deg(std::asin(std::clamp(v.z / r, -1.0, 1.0)));
  return {lat, wrap_lon(rad2deg(std::atan2(v.y, v.x)))};
}

// Central angle in radians (haversine form).
inline double central_angle(const GeoPoint& a, const GeoPoint& b) {
  const double la1 = deg2rad(a.lat), la2 = deg2rad(b.lat);
  const double dla = la2 - la1;
  const double dlo = deg2rad(b.lon - a.lon);
  const double s = std::sin(dla / 2) * std::sin(dla / 2) + std::cos(la1) * std::cos(la2) * std::sin(dlo / 2) * std::sin(dlo / 2);
  return 2.0 * std::asin(std::min(1.0, std::sqrt(s)));
}

inline double great_circle_km(const GeoPoint& a, const GeoPoint& b) { return kEarthRadiusKm * central_angle(a, b); }

// Initial bearing from a to b, radians clockwise from north.
inline double bearing(const GeoPoint& a, const GeoPoint& b) {
  const double la1 = deg2rad(a.lat), la2 = deg2rad(b.lat);
  const double dlo = deg2rad(b.lon - a.lon);
  return std::atan2(std::sin(dlo) * std::cos(la2), std::cos(la1) * std::sin(la2) - std::sin(la1) * std::cos(la2) * std::cos(dlo));
}

}  // namespace bierstar
