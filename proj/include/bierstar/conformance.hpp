#pragma once

// Checks the grid against fixture files produced by the reference hexagonal
// grid library (see tools/gen_h3_fixtures.py).

#include <fstream>
#include <string>
#include <vector>

#include "bierstar/csv.hpp"
#include "bierstar/geogrid.hpp"

namespace bierstar {

struct ConformanceResult {
  std::size_t checked = 0;
  std::vector<std::string> mismatches;

  bool ok() const { return checked > 0 && mismatches.empty(); }
};

// Columns lat,lon,resolution,expected_cell_index.
inline ConformanceResult check_cell_vectors(std::istream& in) {
  const CsvTable t = read_csv(in);
  const int c_lat = t.column("lat"), c_lon = t.column("lon"), c_res = t.column("resolution"), c_idx = t.column("expected_cell_index");
  ConformanceResult res;
  for (const auto& row : t.rows) {
    const double lat = parse_double(row[static_cast<std::size_t>(c_lat)]);
    const double lon = parse_double(row[static_cast<std::size_t>(c_lon)]);
    const int r = static_cast<int>(parse_int(row[static_cast<std::size_t>(c_res)]));
    const auto want = static_cast<std::uint64_t>(parse_int(row[static_cast<std::size_t>(c_idx)]));
    const CellId got = cell_index(make_point(lat, lon), r);
    ++res.checked;
    if (got.index != want)
      res.mismatches.push_back("(" + row[static_cast<std::size_t>(c_lat)] + ", " + row[static_cast<std::size_t>(c_lon)] + ") r=" +
                               std::to_string(r) + ": expected " + std::to_string(want) + ", got " + std::to_string(got.index));
  }
  return res;
}

// Columns resolution,cell_index,parent_index,center_lat,center_lon,neighbors
// (neighbors separated by ';'). Centers must agree to 1e-9 degrees.
inline ConformanceResult check_topology(std::istream& in) {
  const CsvTable t = read_csv(in);
  const int c_res = t.column("resolution"), c_idx = t.column("cell_index"), c_par = t.column("parent_index");
  const int c_lat = t.column("center_lat"), c_lon = t.column("center_lon"), c_nb = t.column("neighbors");
  ConformanceResult res;
  for (const auto& row : t.rows) {
    auto f = [&](int c) -> const std::string& { return row[static_cast<std::size_t>(c)]; };
    const int r = static_cast<int>(parse_int(f(c_res)));
    const CellId c = hex_cell(r, static_cast<std::uint64_t>(parse_int(f(c_idx))));
    const std::string tag = "cell r=" + std::to_string(r) + " #" + f(c_idx) + ": ";
    ++res.checked;
    const long long want_parent = parse_int(f(c_par));
    if (r > 0 && static_cast<long long>(parent(c, r - 1).index) != want_parent) res.mismatches.push_back(tag + "parent differs");
    const GeoPoint ctr = cell_center(c);
    const double dlon = std::abs(wrap_lon(ctr.lon - parse_double(f(c_lon))));
    if (std::abs(ctr.lat - parse_double(f(c_lat))) > 1e-9 || dlon > 1e-9) res.mismatches.push_back(tag + "center differs");
    std::string got;
    for (const CellId& n : neighbors(c)) got += (got.empty() ? "" : ";") + std::to_string(n.index);
    if (got != f(c_nb)) res.mismatches.push_back(tag + "neighbors differ: expected " + f(c_nb) + ", got " + got);
  }
  return res;
}

inline ConformanceResult check_fixture_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::Io, "cannot read fixture file " + path);
  std::string first;
  std::getline(in, first);
  in.seekg(0);
  if (first.find("expected_cell_index") != std::string::npos) return check_cell_vectors(in);
  return check_topology(in);
}

}  // namespace bierstar
