// Core routines of the icosahedral aperture-7 hexagonal grid: point indexing,
// cell centers, hierarchy, and unit-distance neighbor traversal.
//
// This is a C++ port of the corresponding routines of the H3 library
// (https://github.com/uber/h3), Copyright 2016-2023 Uber Technologies, Inc.,
// licensed under the Apache License, Version 2.0. Only the subset needed for
// resolutions 0..15 cell indexing is carried over; the 64-bit index layout is
// kept identical so results can be compared against the reference library.

#pragma once

#include <cmath>
#include <cstdint>
#include <optional>

#include "bierstar/detail/h3_tables.hpp"

namespace bierstar::detail::h3 {

using Index = std::uint64_t;

inline constexpr int kMaxRes = 15;
inline constexpr double kEpsilon = 0.0000000000000001;
inline constexpr double kTwoPi = 6.28318530717958647692528676655900576839433;
inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kPiHalf = 1.5707963267948966;
inline constexpr double kSqrt3Over2 = 0.8660254037844386467637231707529361834714;
inline constexpr double kRSin60 = 1.1547005383792515290182975610039149112953;
inline constexpr double kOneThird = 0.333333333333333333333333333333333333333;
inline constexpr double kOneSeventh = 0.14285714285714285714285714285714285;
inline constexpr double kAp7RotRads = 0.333473172251832115336090755351601070065900389;
inline constexpr double kRes0UGnomonic = 0.38196601125010500003;
inline constexpr double kInvRes0UGnomonic = 2.61803398874989588842;
inline constexpr double kSqrt7 = 2.6457513110645905905016157536392604257102;
inline constexpr double kRSqrt7 = 0.37796447300922722721451653623418006081576;

enum Digit : int {
  kCenter = 0,
  kK = 1,
  kJ = 2,
  kJK = 3,
  kI = 4,
  kIK = 5,
  kIJ = 6,
  kInvalidDigit = 7,
};

inline constexpr CoordIJK kUnitVecs[7] = {{0, 0, 0}, {0, 0, 1}, {0, 1, 0}, {0, 1, 1},
                                          {1, 0, 0}, {1, 0, 1}, {1, 1, 0}};

// Face-neighbor quadrant slots in kFaceNeighbors.
inline constexpr int kQuadIJ = 1;
inline constexpr int kQuadKI = 2;
inline constexpr int kQuadJK = 3;

inline constexpr int kMaxDimByCIIres[] = {2,    -1, 14,    -1, 98,     -1, 686,     -1, 4802,
                                          -1,   33614, -1, 235298, -1, 1647086, -1, 11529602};
inline constexpr int kUnitScaleByCIIres[] = {1,    -1, 7,     -1, 49,     -1, 343,    -1, 2401,
                                             -1,   16807, -1, 117649, -1, 823543, -1, 5764801};

// ---------------------------------------------------------------------------
// Index bit layout

inline constexpr int kModeOffset = 59;
inline constexpr int kResOffset = 52;
inline constexpr int kBaseCellOffset = 45;
inline constexpr int kDigitBits = 3;
inline constexpr Index kInit = 35184372088831ULL;  // all digits 7, everything else 0
inline constexpr Index kModeMask = Index{15} << kModeOffset;
inline constexpr Index kResMask = Index{15} << kResOffset;
inline constexpr Index kBaseCellMask = Index{127} << kBaseCellOffset;
inline constexpr Index kDigitMask = 7;
inline constexpr int kCellMode = 1;

inline int get_resolution(Index h) { return static_cast<int>((h & kResMask) >> kResOffset); }
inline int get_base_cell(Index h) { return static_cast<int>((h & kBaseCellMask) >> kBaseCellOffset); }
inline int get_digit(Index h, int res) {
  return static_cast<int>((h >> ((kMaxRes - res) * kDigitBits)) & kDigitMask);
}
inline Index set_mode(Index h, int mode) {
  return (h & ~kModeMask) | (static_cast<Index>(mode) << kModeOffset);
}
inline Index set_resolution(Index h, int res) {
  return (h & ~kResMask) | (static_cast<Index>(res) << kResOffset);
}
inline Index set_base_cell(Index h, int bc) {
  return (h & ~kBaseCellMask) | (static_cast<Index>(bc) << kBaseCellOffset);
}
inline Index set_digit(Index h, int res, int digit) {
  const int shift = (kMaxRes - res) * kDigitBits;
  return (h & ~(kDigitMask << shift)) | (static_cast<Index>(digit) << shift);
}

inline Index make_index(int res, int base_cell, int init_digit) {
  Index h = kInit;
  h = set_mode(h, kCellMode);
  h = set_resolution(h, res);
  h = set_base_cell(h, base_cell);
  for (int r = 1; r <= res; ++r) h = set_digit(h, r, init_digit);
  return h;
}

inline bool is_class_iii(int res) { return (res % 2) != 0; }

// ---------------------------------------------------------------------------
// IJK coordinate arithmetic

inline CoordIJK ijk_add(const CoordIJK& a, const CoordIJK& b) { return {a.i + b.i, a.j + b.j, a.k + b.k}; }
inline CoordIJK ijk_sub(const CoordIJK& a, const CoordIJK& b) { return {a.i - b.i, a.j - b.j, a.k - b.k}; }
inline CoordIJK ijk_scale(const CoordIJK& c, int f) { return {c.i * f, c.j * f, c.k * f}; }
inline bool ijk_matches(const CoordIJK& a, const CoordIJK& b) { return a.i == b.i && a.j == b.j && a.k == b.k; }

inline void ijk_normalize(CoordIJK& c) {
  if (c.i < 0) {
    c.j -= c.i;
    c.k -= c.i;
    c.i = 0;
  }
  if (c.j < 0) {
    c.i -= c.j;
    c.k -= c.j;
    c.j = 0;
  }
  if (c.k < 0) {
    c.i -= c.k;
    c.j -= c.k;
    c.k = 0;
  }
  int min = c.i;
  if (c.j < min) min = c.j;
  if (c.k < min) min = c.k;
  if (min > 0) {
    c.i -= min;
    c.j -= min;
    c.k -= min;
  }
}

inline int unit_ijk_to_digit(CoordIJK c) {
  ijk_normalize(c);
  for (int d = kCenter; d < kInvalidDigit; ++d) {
    if (ijk_matches(c, kUnitVecs[d])) return d;
  }
  return kInvalidDigit;
}

// Linear map applied to the three unit axes, then normalized.
inline void ijk_apply(CoordIJK& c, const CoordIJK& iv, const CoordIJK& jv, const CoordIJK& kv) {
  CoordIJK out = ijk_add(ijk_add(ijk_scale(iv, c.i), ijk_scale(jv, c.j)), ijk_scale(kv, c.k));
  ijk_normalize(out);
  c = out;
}

inline void up_ap7(CoordIJK& c) {
  const int i = c.i - c.k;
  const int j = c.j - c.k;
  c.i = static_cast<int>(std::lround((3 * i - j) * kOneSeventh));
  c.j = static_cast<int>(std::lround((i + 2 * j) * kOneSeventh));
  c.k = 0;
  ijk_normalize(c);
}

inline void up_ap7r(CoordIJK& c) {
  const int i = c.i - c.k;
  const int j = c.j - c.k;
  c.i = static_cast<int>(std::lround((2 * i + j) * kOneSeventh));
  c.j = static_cast<int>(std::lround((3 * j - i) * kOneSeventh));
  c.k = 0;
  ijk_normalize(c);
}

inline void down_ap7(CoordIJK& c) { ijk_apply(c, {3, 0, 1}, {1, 3, 0}, {0, 1, 3}); }
inline void down_ap7r(CoordIJK& c) { ijk_apply(c, {3, 1, 0}, {0, 3, 1}, {1, 0, 3}); }
inline void rotate60ccw(CoordIJK& c) { ijk_apply(c, {1, 1, 0}, {0, 1, 1}, {1, 0, 1}); }
inline void rotate60cw(CoordIJK& c) { ijk_apply(c, {1, 0, 1}, {1, 1, 0}, {0, 1, 1}); }

inline void neighbor(CoordIJK& c, int digit) {
  if (digit > kCenter && digit < kInvalidDigit) {
    c = ijk_add(c, kUnitVecs[digit]);
    ijk_normalize(c);
  }
}

inline int digit_rotate60ccw(int d) {
  switch (d) {
    case kK: return kIK;
    case kIK: return kI;
    case kI: return kIJ;
    case kIJ: return kJ;
    case kJ: return kJK;
    case kJK: return kK;
    default: return d;
  }
}

inline int digit_rotate60cw(int d) {
  switch (d) {
    case kK: return kJK;
    case kJK: return kJ;
    case kJ: return kIJ;
    case kIJ: return kI;
    case kI: return kIK;
    case kIK: return kK;
    default: return d;
  }
}

// ---------------------------------------------------------------------------
// Planar hex coordinates

struct Vec2d {
  double x;
  double y;
};

inline CoordIJK hex2d_to_ijk(const Vec2d& v) {
  CoordIJK h{0, 0, 0};
  const double a1 = std::fabs(v.x);
  const double a2 = std::fabs(v.y);
  const double x2 = a2 * kRSin60;
  const double x1 = a1 + x2 / 2.0;
  const int m1 = static_cast<int>(x1);
  const int m2 = static_cast<int>(x2);
  const double r1 = x1 - m1;
  const double r2 = x2 - m2;

  if (r1 < 0.5) {
    if (r1 < 1.0 / 3.0) {
      h.i = m1;
      h.j = (r2 < (1.0 + r1) / 2.0) ? m2 : m2 + 1;
    } else {
      h.j = (r2 < (1.0 - r1)) ? m2 : m2 + 1;
      h.i = ((1.0 - r1) <= r2 && r2 < (2.0 * r1)) ? m1 + 1 : m1;
    }
  } else {
    if (r1 < 2.0 / 3.0) {
      h.j = (r2 < (1.0 - r1)) ? m2 : m2 + 1;
      h.i = ((2.0 * r1 - 1.0) < r2 && r2 < (1.0 - r1)) ? m1 : m1 + 1;
    } else {
      h.i = m1 + 1;
      h.j = (r2 < (r1 / 2.0)) ? m2 : m2 + 1;
    }
  }

  // fold across the axes if necessary
  if (v.x < 0.0) {
    if ((h.j % 2) == 0) {
      const long long axisi = h.j / 2;
      const long long diff = h.i - axisi;
      h.i = static_cast<int>(h.i - 2.0 * diff);
    } else {
      const long long axisi = (h.j + 1) / 2;
      const long long diff = h.i - axisi;
      h.i = static_cast<int>(h.i - (2.0 * diff + 1));
    }
  }
  if (v.y < 0.0) {
    h.i = h.i - (2 * h.j + 1) / 2;
    h.j = -1 * h.j;
  }
  ijk_normalize(h);
  return h;
}

inline Vec2d ijk_to_hex2d(const CoordIJK& h) {
  const int i = h.i - h.k;
  const int j = h.j - h.k;
  return {i - 0.5 * j, j * kSqrt3Over2};
}

// ---------------------------------------------------------------------------
// Spherical helpers (radians)

inline double pos_angle(double rads) {
  double tmp = (rads < 0.0) ? rads + kTwoPi : rads;
  if (rads >= kTwoPi) tmp -= kTwoPi;
  return tmp;
}

inline double constrain_lng(double lng) {
  while (lng > kPi) lng = lng - 2 * kPi;
  while (lng < -kPi) lng = lng + 2 * kPi;
  return lng;
}

inline double azimuth(const LatLngRad& p1, const LatLngRad& p2) {
  return std::atan2(std::cos(p2.lat) * std::sin(p2.lng - p1.lng),
                    std::cos(p1.lat) * std::sin(p2.lat) -
                        std::sin(p1.lat) * std::cos(p2.lat) * std::cos(p2.lng - p1.lng));
}

inline LatLngRad az_distance(const LatLngRad& p1, double az, double distance) {
  if (distance < kEpsilon) return p1;
  LatLngRad p2{};
  az = pos_angle(az);
  if (az < kEpsilon || std::fabs(az - kPi) < kEpsilon) {
    p2.lat = (az < kEpsilon) ? p1.lat + distance : p1.lat - distance;
    if (std::fabs(p2.lat - kPiHalf) < kEpsilon) {
      p2 = {kPiHalf, 0.0};
    } else if (std::fabs(p2.lat + kPiHalf) < kEpsilon) {
      p2 = {-kPiHalf, 0.0};
    } else {
      p2.lng = constrain_lng(p1.lng);
    }
    return p2;
  }
  double sinlat = std::sin(p1.lat) * std::cos(distance) + std::cos(p1.lat) * std::sin(distance) * std::cos(az);
  if (sinlat > 1.0) sinlat = 1.0;
  if (sinlat < -1.0) sinlat = -1.0;
  p2.lat = std::asin(sinlat);
  if (std::fabs(p2.lat - kPiHalf) < kEpsilon) return {kPiHalf, 0.0};
  if (std::fabs(p2.lat + kPiHalf) < kEpsilon) return {-kPiHalf, 0.0};
  const double invcos = 1.0 / std::cos(p2.lat);
  double sinlng = std::sin(az) * std::sin(distance) * invcos;
  double coslng = (std::cos(distance) - std::sin(p1.lat) * std::sin(p2.lat)) / std::cos(p1.lat) * invcos;
  if (sinlng > 1.0) sinlng = 1.0;
  if (sinlng < -1.0) sinlng = -1.0;
  if (coslng > 1.0) coslng = 1.0;
  if (coslng < -1.0) coslng = -1.0;
  p2.lng = constrain_lng(p1.lng + std::atan2(sinlng, coslng));
  return p2;
}

// ---------------------------------------------------------------------------
// Sphere <-> face coordinates

inline void closest_face(const LatLngRad& g, int& face, double& sqd) {
  const double r = std::cos(g.lat);
  const Vec3d v{std::cos(g.lng) * r, std::sin(g.lng) * r, std::sin(g.lat)};
  face = 0;
  sqd = 5.0;
  for (int f = 0; f < kNumIcosaFaces; ++f) {
    const Vec3d& c = kFaceCenterPoint[f];
    const double d = (c.x - v.x) * (c.x - v.x) + (c.y - v.y) * (c.y - v.y) + (c.z - v.z) * (c.z - v.z);
    if (d < sqd) {
      face = f;
      sqd = d;
    }
  }
}

inline FaceIJK geo_to_face_ijk(const LatLngRad& g, int res) {
  FaceIJK out{};
  double sqd = 0.0;
  closest_face(g, out.face, sqd);

  double r = std::acos(1 - sqd * 0.5);
  Vec2d v{0.0, 0.0};
  if (r >= kEpsilon) {
    double theta = pos_angle(kFaceAxesAzRadsCII[out.face][0] - pos_angle(azimuth(kFaceCenterGeo[out.face], g)));
    if (is_class_iii(res)) theta = pos_angle(theta - kAp7RotRads);
    r = std::tan(r);
    r *= kInvRes0UGnomonic;
    for (int i = 0; i < res; ++i) r *= kSqrt7;
    v = {r * std::cos(theta), r * std::sin(theta)};
  }
  out.coord = hex2d_to_ijk(v);
  return out;
}

inline LatLngRad hex2d_to_geo(const Vec2d& v, int face, int res, bool substrate) {
  double r = std::sqrt(v.x * v.x + v.y * v.y);
  if (r < kEpsilon) return kFaceCenterGeo[face];
  double theta = std::atan2(v.y, v.x);
  for (int i = 0; i < res; ++i) r *= kRSqrt7;
  if (substrate) {
    r *= kOneThird;
    if (is_class_iii(res)) r *= kRSqrt7;
  }
  r *= kRes0UGnomonic;
  r = std::atan(r);
  if (!substrate && is_class_iii(res)) theta = pos_angle(theta + kAp7RotRads);
  theta = pos_angle(kFaceAxesAzRadsCII[face][0] - theta);
  return az_distance(kFaceCenterGeo[face], theta, r);
}

// ---------------------------------------------------------------------------
// Base cells

inline bool is_base_cell_pentagon(int bc) {
  if (bc < 0 || bc >= kNumBaseCells) return false;
  return kBaseCellData[bc].isPentagon != 0;
}

inline bool is_base_cell_polar_pentagon(int bc) { return bc == 4 || bc == 117; }

inline bool base_cell_is_cw_offset(int bc, int face) {
  return kBaseCellData[bc].cwOffsetPent[0] == face || kBaseCellData[bc].cwOffsetPent[1] == face;
}

// ---------------------------------------------------------------------------
// Index rotations

inline int leading_nonzero_digit(Index h) {
  for (int r = 1; r <= get_resolution(h); ++r) {
    if (const int d = get_digit(h, r); d != 0) return d;
  }
  return kCenter;
}

inline Index rotate60ccw(Index h) {
  for (int r = 1, res = get_resolution(h); r <= res; ++r) h = set_digit(h, r, digit_rotate60ccw(get_digit(h, r)));
  return h;
}

inline Index rotate60cw(Index h) {
  for (int r = 1, res = get_resolution(h); r <= res; ++r) h = set_digit(h, r, digit_rotate60cw(get_digit(h, r)));
  return h;
}

inline Index rotate_pent60ccw(Index h) {
  bool found_first_nonzero = false;
  for (int r = 1, res = get_resolution(h); r <= res; ++r) {
    h = set_digit(h, r, digit_rotate60ccw(get_digit(h, r)));
    if (!found_first_nonzero && get_digit(h, r) != 0) {
      found_first_nonzero = true;
      if (leading_nonzero_digit(h) == kK) h = rotate60ccw(h);
    }
  }
  return h;
}

inline bool is_pentagon(Index h) {
  return is_base_cell_pentagon(get_base_cell(h)) && leading_nonzero_digit(h) == kCenter;
}

// ---------------------------------------------------------------------------
// FaceIJK <-> index

inline Index face_ijk_to_index(const FaceIJK& fijk, int res) {
  Index h = kInit;
  h = set_mode(h, kCellMode);
  h = set_resolution(h, res);

  auto out_of_range = [](const CoordIJK& c) { return c.i > 2 || c.j > 2 || c.k > 2; };

  if (res == 0) {
    if (out_of_range(fijk.coord)) return 0;
    return set_base_cell(h, kFaceIjkBaseCells[fijk.face][fijk.coord.i][fijk.coord.j][fijk.coord.k].baseCell);
  }

  FaceIJK bc_fijk = fijk;
  CoordIJK& ijk = bc_fijk.coord;
  for (int r = res - 1; r >= 0; --r) {
    const CoordIJK last = ijk;
    CoordIJK last_center{};
    if (is_class_iii(r + 1)) {
      up_ap7(ijk);
      last_center = ijk;
      down_ap7(last_center);
    } else {
      up_ap7r(ijk);
      last_center = ijk;
      down_ap7r(last_center);
    }
    CoordIJK diff = ijk_sub(last, last_center);
    ijk_normalize(diff);
    h = set_digit(h, r + 1, unit_ijk_to_digit(diff));
  }

  if (out_of_range(bc_fijk.coord)) return 0;

  const BaseCellRotation& entry = kFaceIjkBaseCells[bc_fijk.face][ijk.i][ijk.j][ijk.k];
  const int base_cell = entry.baseCell;
  h = set_base_cell(h, base_cell);

  const int num_rots = entry.ccwRot60;
  if (is_base_cell_pentagon(base_cell)) {
    // force rotation out of the missing k-axes sub-sequence
    if (leading_nonzero_digit(h) == kK) {
      h = base_cell_is_cw_offset(base_cell, bc_fijk.face) ? rotate60cw(h) : rotate60ccw(h);
    }
    for (int i = 0; i < num_rots; ++i) h = rotate_pent60ccw(h);
  } else {
    for (int i = 0; i < num_rots; ++i) h = rotate60ccw(h);
  }
  return h;
}

enum class Overage { kNone, kFaceEdge, kNewFace };

inline Overage adjust_overage_class_ii(FaceIJK& fijk, int res, bool pent_leading4, bool substrate) {
  Overage overage = Overage::kNone;
  CoordIJK& ijk = fijk.coord;
  int max_dim = kMaxDimByCIIres[res];
  if (substrate) max_dim *= 3;

  if (substrate && ijk.i + ijk.j + ijk.k == max_dim) {
    overage = Overage::kFaceEdge;
  } else if (ijk.i + ijk.j + ijk.k > max_dim) {
    overage = Overage::kNewFace;
    const FaceOrientIJK* orient = nullptr;
    if (ijk.k > 0) {
      if (ijk.j > 0) {
        orient = &kFaceNeighbors[fijk.face][kQuadJK];
      } else {
        orient = &kFaceNeighbors[fijk.face][kQuadKI];
        if (pent_leading4) {
          const CoordIJK origin{max_dim, 0, 0};
          CoordIJK tmp = ijk_sub(ijk, origin);
          rotate60cw(tmp);
          ijk = ijk_add(tmp, origin);
        }
      }
    } else {
      orient = &kFaceNeighbors[fijk.face][kQuadIJ];
    }

    fijk.face = orient->face;
    for (int i = 0; i < orient->ccwRot60; ++i) rotate60ccw(ijk);

    int unit_scale = kUnitScaleByCIIres[res];
    if (substrate) unit_scale *= 3;
    ijk = ijk_add(ijk, ijk_scale(orient->translate, unit_scale));
    ijk_normalize(ijk);

    if (substrate && ijk.i + ijk.j + ijk.k == max_dim) overage = Overage::kFaceEdge;
  }
  return overage;
}

inline FaceIJK index_to_face_ijk(Index h) {
  const int base_cell = get_base_cell(h);
  if (is_base_cell_pentagon(base_cell) && leading_nonzero_digit(h) == kIK) h = rotate60cw(h);

  FaceIJK fijk = kBaseCellData[base_cell].homeFijk;
  const int res = get_resolution(h);

  bool possible_overage = true;
  if (!is_base_cell_pentagon(base_cell) &&
      (res == 0 || (fijk.coord.i == 0 && fijk.coord.j == 0 && fijk.coord.k == 0))) {
    possible_overage = false;
  }
  for (int r = 1; r <= res; ++r) {
    if (is_class_iii(r)) {
      down_ap7(fijk.coord);
    } else {
      down_ap7r(fijk.coord);
    }
    neighbor(fijk.coord, get_digit(h, r));
  }
  if (!possible_overage) return fijk;

  const CoordIJK orig = fijk.coord;
  int adj_res = res;
  if (is_class_iii(adj_res)) {
    down_ap7r(fijk.coord);
    ++adj_res;
  }
  const bool pent_leading4 = is_base_cell_pentagon(base_cell) && leading_nonzero_digit(h) == kI;
  if (adjust_overage_class_ii(fijk, adj_res, pent_leading4, false) != Overage::kNone) {
    if (is_base_cell_pentagon(base_cell)) {
      while (adjust_overage_class_ii(fijk, adj_res, false, false) != Overage::kNone) {
      }
    }
    if (adj_res != res) up_ap7r(fijk.coord);
  } else if (adj_res != res) {
    fijk.coord = orig;
  }
  return fijk;
}

// ---------------------------------------------------------------------------
// Public-ish entry points

inline Index lat_lng_to_cell(const LatLngRad& g, int res) { return face_ijk_to_index(geo_to_face_ijk(g, res), res); }

inline LatLngRad cell_to_lat_lng(Index h) {
  const FaceIJK fijk = index_to_face_ijk(h);
  return hex2d_to_geo(ijk_to_hex2d(fijk.coord), fijk.face, get_resolution(h), false);
}

inline Index cell_to_parent(Index h, int parent_res) {
  const int child_res = get_resolution(h);
  Index p = set_resolution(h, parent_res);
  for (int r = parent_res + 1; r <= child_res; ++r) p = set_digit(p, r, static_cast<int>(kDigitMask));
  return p;
}

inline Index make_direct_child(Index h, int digit) {
  const int child_res = get_resolution(h) + 1;
  return set_digit(set_resolution(h, child_res), child_res, digit);
}

// Neighbor traversal tables, indexed [old digit][direction].
inline constexpr int kNewDigitII[7][7] = {
    {kCenter, kK, kJ, kJK, kI, kIK, kIJ},     {kK, kI, kJK, kIJ, kIK, kJ, kCenter},
    {kJ, kJK, kK, kI, kIJ, kCenter, kIK},     {kJK, kIJ, kI, kIK, kCenter, kK, kJ},
    {kI, kIK, kIJ, kCenter, kJ, kJK, kK},     {kIK, kJ, kCenter, kK, kJK, kIJ, kI},
    {kIJ, kCenter, kIK, kJ, kK, kI, kJK}};
inline constexpr int kNewAdjustmentII[7][7] = {
    {kCenter, kCenter, kCenter, kCenter, kCenter, kCenter, kCenter},
    {kCenter, kK, kCenter, kK, kCenter, kIK, kCenter},
    {kCenter, kCenter, kJ, kJK, kCenter, kCenter, kJ},
    {kCenter, kK, kJK, kJK, kCenter, kCenter, kCenter},
    {kCenter, kCenter, kCenter, kCenter, kI, kI, kIJ},
    {kCenter, kIK, kCenter, kCenter, kI, kIK, kCenter},
    {kCenter, kCenter, kJ, kCenter, kIJ, kCenter, kIJ}};
inline constexpr int kNewDigitIII[7][7] = {
    {kCenter, kK, kJ, kJK, kI, kIK, kIJ},     {kK, kJ, kJK, kI, kIK, kIJ, kCenter},
    {kJ, kJK, kI, kIK, kIJ, kCenter, kK},     {kJK, kI, kIK, kIJ, kCenter, kK, kJ},
    {kI, kIK, kIJ, kCenter, kK, kJ, kJK},     {kIK, kIJ, kCenter, kK, kJ, kJK, kI},
    {kIJ, kCenter, kK, kJ, kJK, kI, kIK}};
inline constexpr int kNewAdjustmentIII[7][7] = {
    {kCenter, kCenter, kCenter, kCenter, kCenter, kCenter, kCenter},
    {kCenter, kK, kCenter, kJK, kCenter, kK, kCenter},
    {kCenter, kCenter, kJ, kJ, kCenter, kCenter, kIJ},
    {kCenter, kJK, kJ, kJK, kCenter, kCenter, kCenter},
    {kCenter, kCenter, kCenter, kCenter, kI, kIK, kI},
    {kCenter, kK, kCenter, kCenter, kIK, kIK, kCenter},
    {kCenter, kCenter, kIJ, kCenter, kI, kCenter, kIJ}};

// The cell one step from `origin` in direction `dir`. Empty when the step
// would enter the deleted k-subsequence of a pentagon.
inline std::optional<Index> neighbor_rotations(Index origin, int dir, int& rotations) {
  Index current = origin;
  rotations = rotations % 6;
  for (int i = 0; i < rotations; ++i) dir = digit_rotate60ccw(dir);

  int new_rotations = 0;
  const int old_base_cell = get_base_cell(current);
  const int old_leading_digit = leading_nonzero_digit(current);

  int r = get_resolution(current) - 1;
  while (true) {
    if (r == -1) {
      current = set_base_cell(current, kBaseCellNeighbors[old_base_cell][dir]);
      new_rotations = kBaseCellNeighbor60CCWRots[old_base_cell][dir];
      if (get_base_cell(current) == kInvalidBaseCell) {
        // the deleted k vertex at the base cell level borders a different neighbor
        current = set_base_cell(current, kBaseCellNeighbors[old_base_cell][kIK]);
        new_rotations = kBaseCellNeighbor60CCWRots[old_base_cell][kIK];
        current = rotate60ccw(current);
        rotations = rotations + 1;
      }
      break;
    }
    const int old_digit = get_digit(current, r + 1);
    int next_dir = kCenter;
    if (old_digit == kInvalidDigit) return std::nullopt;
    if (is_class_iii(r + 1)) {
      current = set_digit(current, r + 1, kNewDigitII[old_digit][dir]);
      next_dir = kNewAdjustmentII[old_digit][dir];
    } else {
      current = set_digit(current, r + 1, kNewDigitIII[old_digit][dir]);
      next_dir = kNewAdjustmentIII[old_digit][dir];
    }
    if (next_dir == kCenter) break;
    dir = next_dir;
    --r;
  }

  const int new_base_cell = get_base_cell(current);
  if (is_base_cell_pentagon(new_base_cell)) {
    bool already_adjusted_k = false;
    if (leading_nonzero_digit(current) == kK) {
      if (old_base_cell != new_base_cell) {
        if (base_cell_is_cw_offset(new_base_cell, kBaseCellData[old_base_cell].homeFijk.face)) {
          current = rotate60cw(current);
        } else {
          current = rotate60ccw(current);
        }
        already_adjusted_k = true;
      } else {
        if (old_leading_digit == kCenter) return std::nullopt;
        if (old_leading_digit == kJK) {
          current = rotate60ccw(current);
          rotations = rotations + 1;
        } else if (old_leading_digit == kIK) {
          current = rotate60cw(current);
          rotations = rotations + 5;
        } else {
          return std::nullopt;
        }
      }
    }
    for (int i = 0; i < new_rotations; ++i) current = rotate_pent60ccw(current);

    if (old_base_cell != new_base_cell) {
      if (is_base_cell_polar_pentagon(new_base_cell)) {
        if (old_base_cell != 118 && old_base_cell != 8 && leading_nonzero_digit(current) != kJK) {
          rotations = rotations + 1;
        }
      } else if (leading_nonzero_digit(current) == kIK && !already_adjusted_k) {
        rotations = rotations + 1;
      }
    }
  } else {
    for (int i = 0; i < new_rotations; ++i) current = rotate60ccw(current);
  }
  rotations = (rotations + new_rotations) % 6;
  return current;
}

}  // namespace bierstar::detail::h3
