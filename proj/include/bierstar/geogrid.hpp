#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "bierstar/detail/h3_core.hpp"
#include "bierstar/error.hpp"
#include "bierstar/geo.hpp"

namespace bierstar {

namespace h3 = detail::h3;

enum class SchemeTag { HexHier, QuadCube, Base32Hash, LatLonDeg };

struct GridScheme {
  SchemeTag tag = SchemeTag::HexHier;
  int step_deg = 0;  // LatLonDeg only

  static GridScheme hex() { return {SchemeTag::HexHier, 0}; }
  static GridScheme quad_cube() { return {SchemeTag::QuadCube, 0}; }
  static GridScheme base32() { return {SchemeTag::Base32Hash, 0}; }
  static GridScheme lat_lon(int step) { return {SchemeTag::LatLonDeg, step}; }

  friend bool operator==(const GridScheme&, const GridScheme&) = default;
};

inline constexpr int kMaxHexRes = 5;

struct CellId {
  GridScheme scheme;
  int resolution = 0;
  std::uint64_t index = 0;

  friend bool operator==(const CellId&, const CellId&) = default;
  friend auto operator<=>(const CellId& a, const CellId& b) {
    if (auto c = static_cast<int>(a.scheme.tag) <=> static_cast<int>(b.scheme.tag); c != 0) return c;
    if (auto c = a.scheme.step_deg <=> b.scheme.step_deg; c != 0) return c;
    if (auto c = a.resolution <=> b.resolution; c != 0) return c;
    return a.index <=> b.index;
  }
};

namespace detail {

inline std::uint64_t ipow(std::uint64_t b, int e) {
  std::uint64_t r = 1;
  while (e-- > 0) r *= b;
  return r;
}

// Number of resolution-`rem` descendants of a pentagon.
inline std::uint64_t pent_descendants(int rem) {
  std::uint64_t p = 1;
  for (int k = 1; k <= rem; ++k) p += 5 * ipow(7, k - 1);
  return p;
}

struct HexOffsets {
  std::array<std::array<std::uint64_t, detail::h3::kNumBaseCells + 1>, kMaxHexRes + 1> start{};
};

inline const HexOffsets& hex_offsets() {
  static const HexOffsets table = [] {
    HexOffsets t;
    for (int r = 0; r <= kMaxHexRes; ++r) {
      std::uint64_t acc = 0;
      for (int bc = 0; bc < detail::h3::kNumBaseCells; ++bc) {
        t.start[r][bc] = acc;
        acc += detail::h3::is_base_cell_pentagon(bc) ? pent_descendants(r) : ipow(7, r);
      }
      t.start[r][detail::h3::kNumBaseCells] = acc;
    }
    return t;
  }();
  return table;
}

inline void check_hex_res(int r) {
  if (r < 0 || r > kMaxHexRes) fail(ErrorKind::InvalidArgument, "resolution out of range 0..5: " + std::to_string(r));
}

}  // namespace detail

inline std::uint64_t cell_count(const GridScheme& scheme, int r) {
  switch (scheme.tag) {
    case SchemeTag::HexHier:
      detail::check_hex_res(r);
      return 2 + 120 * detail::ipow(7, r);
    case SchemeTag::QuadCube:
      if (r < 0 || r > 30) fail(ErrorKind::InvalidArgument, "quad-cube level out of range 0..30");
      return 6 * detail::ipow(4, r);
    case SchemeTag::Base32Hash:
      if (r < 1 || r > 12) fail(ErrorKind::InvalidArgument, "base32 hash length out of range 1..12");
      return detail::ipow(32, r);
    case SchemeTag::LatLonDeg: {
      const int s = scheme.step_deg;
      if (s <= 0 || 180 % s != 0) fail(ErrorKind::InvalidArgument, "lat/lon step must divide 180");
      return static_cast<std::uint64_t>(180 / s) * static_cast<std::uint64_t>(360 / s);
    }
  }
  fail(ErrorKind::InvalidArgument, "unknown grid scheme");
}

inline int bits_per_cell(const GridScheme& scheme, int r) {
  const std::uint64_t n = cell_count(scheme, r);
  return n <= 1 ? 0 : static_cast<int>(std::bit_width(n - 1));
}

inline int hex_bits(int r) { return bits_per_cell(GridScheme::hex(), r); }

inline double effective_diameter_km(int r) {
  const double area = 4.0 * kPi * kEarthRadiusKm * kEarthRadiusKm / static_cast<double>(cell_count(GridScheme::hex(), r));
  return 2.0 * std::sqrt(area / kPi);
}

// ---------------------------------------------------------------------------
// Dense index <-> 64-bit hexagonal cell index. The dense index is the rank of
// the cell among all cells of its resolution in ascending 64-bit order.

inline std::uint64_t dense_from_h3(h3::Index h) {
  const int r = h3::get_resolution(h);
  detail::check_hex_res(r);
  const int bc = h3::get_base_cell(h);
  std::uint64_t rank = detail::hex_offsets().start[r][bc];
  bool leading = h3::is_base_cell_pentagon(bc);
  for (int k = 1; k <= r; ++k) {
    const int d = h3::get_digit(h, k);
    const int rem = r - k;
    if (leading) {
      if (d == 0) continue;
      rank += detail::pent_descendants(rem) + static_cast<std::uint64_t>(d - 2) * detail::ipow(7, rem);
      leading = false;
    } else {
      rank += static_cast<std::uint64_t>(d) * detail::ipow(7, rem);
    }
  }
  return rank;
}

inline h3::Index h3_from_dense(int r, std::uint64_t idx) {
  detail::check_hex_res(r);
  const auto& start = detail::hex_offsets().start[r];
  if (idx >= start[detail::h3::kNumBaseCells]) fail(ErrorKind::InvalidArgument, "cell index out of range");
  int bc = 0;
  while (start[bc + 1] <= idx) ++bc;
  std::uint64_t k = idx - start[bc];
  h3::Index h = h3::make_index(r, bc, 0);
  bool leading = h3::is_base_cell_pentagon(bc);
  for (int pos = 1; pos <= r; ++pos) {
    const int rem = r - pos;
    const std::uint64_t block = detail::ipow(7, rem);
    if (leading) {
      const std::uint64_t p = detail::pent_descendants(rem);
      if (k < p) continue;
      k -= p;
      h = h3::set_digit(h, pos, 2 + static_cast<int>(k / block));
      k %= block;
      leading = false;
    } else {
      h = h3::set_digit(h, pos, static_cast<int>(k / block));
      k %= block;
    }
  }
  return h;
}

inline CellId hex_cell(int r, std::uint64_t index) { return {GridScheme::hex(), r, index}; }

inline void require_hex(const CellId& c) {
  if (c.scheme.tag != SchemeTag::HexHier) fail(ErrorKind::InvalidArgument, "operation requires the hexagonal scheme");
  detail::check_hex_res(c.resolution);
  if (c.index >= cell_count(c.scheme, c.resolution)) fail(ErrorKind::InvalidArgument, "cell index out of range");
}

inline h3::Index to_h3(const CellId& c) {
  require_hex(c);
  return h3_from_dense(c.resolution, c.index);
}

inline CellId from_h3(h3::Index h) { return hex_cell(h3::get_resolution(h), dense_from_h3(h)); }

inline CellId cell_index(const GeoPoint& p, int r) {
  detail::check_hex_res(r);
  const GeoPoint q = make_point(p.lat, p.lon);
  const h3::Index h = h3::lat_lng_to_cell({deg2rad(q.lat), deg2rad(q.lon)}, r);
  return from_h3(h);
}

// Unchecked variant for hot loops where p is known to be valid.
inline CellId cell_index_fast(const GeoPoint& p, int r) {
  return from_h3(h3::lat_lng_to_cell({deg2rad(p.lat), deg2rad(p.lon)}, r));
}

inline GeoPoint cell_center(const CellId& c) {
  const h3::LatLngRad g = h3::cell_to_lat_lng(to_h3(c));
  return {rad2deg(g.lat), wrap_lon(rad2deg(g.lng))};
}

inline bool is_pentagon(const CellId& c) { return h3::is_pentagon(to_h3(c)); }

inline std::vector<CellId> neighbors(const CellId& c) {
  const h3::Index origin = to_h3(c);
  const bool pent = h3::is_pentagon(origin);
  std::vector<CellId> out;
  for (int dir = h3::kK; dir <= h3::kIJ; ++dir) {
    if (pent && dir == h3::kK) continue;
    int rot = 0;
    if (auto n = h3::neighbor_rotations(origin, dir, rot)) out.push_back(from_h3(*n));
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

inline CellId parent(const CellId& c, int r_coarse) {
  require_hex(c);
  if (r_coarse < 0 || r_coarse >= c.resolution) fail(ErrorKind::InvalidArgument, "parent resolution must be coarser than the cell");
  return from_h3(h3::cell_to_parent(to_h3(c), r_coarse));
}

inline std::vector<CellId> children(const CellId& c) {
  require_hex(c);
  if (c.resolution >= kMaxHexRes) fail(ErrorKind::InvalidArgument, "no children beyond resolution 5");
  const h3::Index h = to_h3(c);
  const bool pent = h3::is_pentagon(h);
  std::vector<CellId> out;
  for (int d = 0; d < 7; ++d) {
    if (pent && d == h3::kK) continue;
    out.push_back(from_h3(h3::make_direct_child(h, d)));
  }
  return out;
}

}  // namespace bierstar

template <>
struct std::hash<bierstar::CellId> {
  std::size_t operator()(const bierstar::CellId& c) const noexcept {
    std::uint64_t k = c.index * 0x9E3779B97F4A7C15ULL;
    k ^= static_cast<std::uint64_t>(c.resolution) << 56;
    k ^= static_cast<std::uint64_t>(c.scheme.tag) << 60;
    k ^= static_cast<std::uint64_t>(c.scheme.step_deg) << 40;
    return static_cast<std::size_t>(k ^ (k >> 29));
  }
};
