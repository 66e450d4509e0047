#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "bierstar/baselines.hpp"
#include "bierstar/geo.hpp"
#include "bierstar/membership.hpp"
#include "bierstar/orbit.hpp"
#include "bierstar/toml.hpp"

namespace bierstar {

enum class Method { BierStar, Traditional, GeoR0, GeoR1, SatFoot, PureGreedy, GreedyWithSwitch, GreedyPerimeter };

inline const std::vector<std::pair<Method, std::string>>& method_names() {
  static const std::vector<std::pair<Method, std::string>> names{
      {Method::BierStar, "BierStar"},     {Method::Traditional, "Traditional"},
      {Method::GeoR0, "GeoR0"},           {Method::GeoR1, "GeoR1"},
      {Method::SatFoot, "SatFoot"},       {Method::PureGreedy, "PureGreedy"},
      {Method::GreedyWithSwitch, "GreedyWithSwitch"}, {Method::GreedyPerimeter, "GreedyPerimeter"}};
  return names;
}

inline std::string to_string(Method m) {
  for (const auto& [k, v] : method_names())
    if (k == m) return v;
  return "?";
}

inline std::optional<Method> method_from_string(const std::string& s) {
  for (const auto& [k, v] : method_names())
    if (v == s) return k;
  return std::nullopt;
}

inline bool is_bitstring_method(Method m) {
  return m == Method::Traditional || m == Method::GeoR0 || m == Method::GeoR1 || m == Method::SatFoot;
}

inline std::optional<GreedyKind> greedy_kind(Method m) {
  switch (m) {
    case Method::PureGreedy: return GreedyKind::PureGreedy;
    case Method::GreedyWithSwitch: return GreedyKind::GreedyWithSwitch;
    case Method::GreedyPerimeter: return GreedyKind::GreedyPerimeter;
    default: return std::nullopt;
  }
}

struct TerminalSpec {
  std::string generator = "uniform-sphere";  // uniform-sphere | corridor | clustered | csv
  int count = 100;
  std::string path;                // csv
  std::vector<GeoPoint> centers;   // clustered
  double sigma_km = 300.0;         // clustered
  GeoPoint from{}, to{};           // corridor
  double width_km = 200.0;         // corridor
};

struct GroupSpec {
  GroupId group_id = 1;
  std::string members = "all";  // all | fraction | region
  double fraction = 1.0;
  GeoPoint region_center{};
  double region_radius_km = 0.0;
  std::string source = "gateway";  // gateway | sat
  GeoPoint gateway{};
  SatId source_sat{};
};

struct FailureSpec {
  std::string model = "none";  // none | random
  double link_rate = 0.0;
  double node_rate = 0.0;
};

struct ExperimentSpec {
  std::vector<int> bitstring_counts{100, 1000, 10000};
  GeoPoint bitstring_center{48.8566, 2.3522};
  double bitstring_sigma_km = 100.0;
  GeoPoint bitstring_gateway{40.7128, -74.0060};
  int reach_seeds = 20;
  int reach_destinations = 20;
  std::vector<double> dwell_inclinations{53.0};
  std::vector<int> dwell_resolutions{0, 1, 2, 3, 4, 5};
  double dwell_duration_s = 0.0;  // 0: two orbital periods of the first shell
  double dwell_step_s = 1.0;
  int resilience_seeds = 20;
  int resilience_resolution = 0;
  int resilience_destinations = 5;
};

struct ScenarioSpec {
  std::string name = "scenario";
  std::optional<std::uint64_t> seed;
  int resolution = 2;
  int user_resolution = 5;
  double epoch_s = 15.0;
  double duration_s = 15.0;
  double epoch_start_s = 0.0;
  double elevation_mask_deg = 25.0;
  int ttl = kDefaultTtl;
  std::vector<Method> methods{Method::BierStar};
  double refresh_interval_s = 30.0;
  double timeout_s = 90.0;
  std::vector<ShellSpec> shells;
  TerminalSpec terminals;
  std::vector<GroupSpec> groups;
  FailureSpec failures;
  GreedyVariant greedy;
  ExperimentSpec experiments;

  std::uint64_t seed_value() const {
    if (!seed) fail(ErrorKind::Validation, "scenario has no seed");
    return *seed;
  }
  int epoch_count() const { return static_cast<int>(std::llround(duration_s / epoch_s)); }
  bool has(Method m) const { return std::find(methods.begin(), methods.end(), m) != methods.end(); }
};

// Raised for scenario problems; what() lists every violation, one per line.
class ValidationError : public Error {
 public:
  explicit ValidationError(std::vector<std::string> errs) : Error(ErrorKind::Validation, join(errs)), errors_(std::move(errs)) {}
  const std::vector<std::string>& errors() const { return errors_; }

 private:
  static std::string join(const std::vector<std::string>& errs) {
    std::string s;
    for (const auto& e : errs) s += (s.empty() ? "" : "\n") + e;
    return s;
  }
  std::vector<std::string> errors_;
};

namespace detail {

// Pulls typed fields out of a table, collecting type errors instead of
// stopping at the first one.
class FieldReader {
 public:
  FieldReader(const toml::Table& t, std::string where, std::vector<std::string>& errs) : t_(t), where_(std::move(where)), errs_(errs) {}

  const toml::Value* raw(const std::string& key) {
    used_.insert(key);
    const auto it = t_.find(key);
    return it == t_.end() ? nullptr : &it->second;
  }

  void str(const std::string& key, std::string& out) {
    if (const auto* v = raw(key)) {
      if (v->is_string()) out = v->as_string();
      else bad(key, "a string");
    }
  }
  template <class T>
  void integer(const std::string& key, T& out) {
    if (const auto* v = raw(key)) {
      if (v->is_int()) out = static_cast<T>(v->as_int());
      else bad(key, "an integer");
    }
  }
  void number(const std::string& key, double& out) {
    if (const auto* v = raw(key)) {
      if (v->is_number()) out = v->as_number();
      else bad(key, "a number");
    }
  }
  void point(const std::string& key, GeoPoint& out) {
    if (const auto* v = raw(key)) {
      if (v->is_array() && v->as_array().size() == 2 && v->as_array()[0].is_number() && v->as_array()[1].is_number()) {
        out = {v->as_array()[0].as_number(), v->as_array()[1].as_number()};
      } else {
        bad(key, "a [lat, lon] pair");
      }
    }
  }
  void points(const std::string& key, std::vector<GeoPoint>& out) {
    if (const auto* v = raw(key)) {
      bool ok = v->is_array() && v->as_array().size() % 2 == 0;
      if (ok)
        for (const auto& x : v->as_array()) ok = ok && x.is_number();
      if (!ok) {
        bad(key, "a flat [lat, lon, lat, lon, ...] list");
        return;
      }
      out.clear();
      for (std::size_t k = 0; k < v->as_array().size(); k += 2) out.push_back({v->as_array()[k].as_number(), v->as_array()[k + 1].as_number()});
    }
  }
  template <class T>
  void numbers(const std::string& key, std::vector<T>& out) {
    if (const auto* v = raw(key)) {
      bool ok = v->is_array();
      if (ok)
        for (const auto& x : v->as_array()) ok = ok && (std::is_integral_v<T> ? x.is_int() : x.is_number());
      if (!ok) {
        bad(key, std::is_integral_v<T> ? "a list of integers" : "a list of numbers");
        return;
      }
      out.clear();
      for (const auto& x : v->as_array()) out.push_back(static_cast<T>(x.as_number()));
    }
  }
  void strings(const std::string& key, std::vector<std::string>& out) {
    if (const auto* v = raw(key)) {
      bool ok = v->is_array();
      if (ok)
        for (const auto& x : v->as_array()) ok = ok && x.is_string();
      if (!ok) {
        bad(key, "a list of strings");
        return;
      }
      out.clear();
      for (const auto& x : v->as_array()) out.push_back(x.as_string());
    }
  }

  void reject_unknown() {
    for (const auto& [k, v] : t_)
      if (!used_.count(k)) errs_.push_back(where_ + "unknown key '" + k + "'");
  }

 private:
  void bad(const std::string& key, const std::string& what) { errs_.push_back(where_ + "'" + key + "' must be " + what); }

  const toml::Table& t_;
  std::string where_;
  std::vector<std::string>& errs_;
  std::set<std::string> used_;
};

inline const toml::Table* subtable(const toml::Table& root, const std::string& key, std::vector<std::string>& errs) {
  const auto it = root.find(key);
  if (it == root.end()) return nullptr;
  if (!it->second.is_table()) {
    errs.push_back("'" + key + "' must be a table");
    return nullptr;
  }
  return &it->second.as_table();
}

inline std::optional<SatId> parse_sat_id(const std::string& s) {
  SatId id;
  char d1 = 0, d2 = 0;
  std::istringstream in(s);
  if (!(in >> id.shell >> d1 >> id.plane >> d2 >> id.slot) || d1 != '-' || d2 != '-' || !in.eof()) return std::nullopt;
  return id;
}

}  // namespace detail

inline std::vector<std::string> validate(const ScenarioSpec& s) {
  std::vector<std::string> errs;
  if (!s.seed) errs.push_back("seed is required");
  if (s.resolution < 0 || s.resolution > kMaxHexRes) errs.push_back("resolution out of range 0..5");
  if (s.user_resolution < 0 || s.user_resolution > kMaxHexRes) errs.push_back("user_resolution out of range 0..5");
  if (s.shells.empty()) errs.push_back("constellation is empty: at least one [[shells]] entry is required");
  std::set<int> ids;
  for (const auto& sh : s.shells) {
    for (auto& e : validate_shell(sh)) errs.push_back(e);
    if (!ids.insert(sh.shell_id).second) errs.push_back("duplicate shell_id " + std::to_string(sh.shell_id));
  }
  if (!(s.epoch_s > 0)) errs.push_back("epoch_s must be positive");
  if (!(s.duration_s > 0)) errs.push_back("duration_s must be positive");
  if (s.epoch_s > 0 && s.duration_s > 0) {
    const double k = s.duration_s / s.epoch_s;
    if (std::abs(k - std::round(k)) > 1e-9 || std::round(k) < 1) errs.push_back("duration_s must be a positive multiple of epoch_s");
  }
  if (!(s.elevation_mask_deg >= 0 && s.elevation_mask_deg < 90)) errs.push_back("elevation_mask_deg must be within [0, 90)");
  if (s.ttl < 1) errs.push_back("ttl must be >= 1");
  if (s.methods.empty()) errs.push_back("methods must list at least one method");
  if (!(s.refresh_interval_s > 0)) errs.push_back("membership.refresh_interval_s must be positive");
  if (!(s.timeout_s > 0)) errs.push_back("membership.timeout_s must be positive");

  auto check_point = [&](const GeoPoint& p, const std::string& what) {
    if (!(p.lat >= -90 && p.lat <= 90 && p.lon >= -180 && p.lon <= 180)) errs.push_back(what + " is not a valid lat/lon");
  };
  const TerminalSpec& t = s.terminals;
  if (t.generator == "csv") {
    if (t.path.empty()) errs.push_back("terminals.path is required for the csv generator");
  } else if (t.generator == "uniform-sphere" || t.generator == "clustered" || t.generator == "corridor") {
    if (t.count < 1) errs.push_back("terminals.count must be >= 1");
    if (t.generator == "clustered") {
      if (t.centers.empty()) errs.push_back("terminals.centers must list at least one center");
      for (const auto& c : t.centers) check_point(c, "terminals.centers entry");
      if (!(t.sigma_km > 0)) errs.push_back("terminals.sigma_km must be positive");
    }
    if (t.generator == "corridor") {
      check_point(t.from, "terminals.from");
      check_point(t.to, "terminals.to");
      if (!(t.width_km > 0)) errs.push_back("terminals.width_km must be positive");
      if (central_angle(t.from, t.to) <= 0) errs.push_back("terminals.from and terminals.to must differ");
    }
  } else {
    errs.push_back("terminals.generator must be one of uniform-sphere, corridor, clustered, csv");
  }

  if (s.groups.empty()) errs.push_back("at least one [[groups]] entry is required");
  std::set<GroupId> gids;
  for (const auto& g : s.groups) {
    const std::string tag = "group " + std::to_string(g.group_id) + ": ";
    if (!gids.insert(g.group_id).second) errs.push_back(tag + "duplicate group_id");
    if (g.members == "fraction") {
      if (!(g.fraction > 0 && g.fraction <= 1)) errs.push_back(tag + "fraction must be within (0, 1]");
    } else if (g.members == "region") {
      check_point(g.region_center, tag + "region_center");
      if (!(g.region_radius_km > 0)) errs.push_back(tag + "region_radius_km must be positive");
    } else if (g.members != "all") {
      errs.push_back(tag + "members must be one of all, fraction, region");
    }
    if (g.source == "gateway") {
      check_point(g.gateway, tag + "gateway");
    } else if (g.source == "sat") {
      bool known = false;
      for (const auto& sh : s.shells)
        known = known || (sh.shell_id == g.source_sat.shell && g.source_sat.plane >= 0 && g.source_sat.plane < sh.planes &&
                          g.source_sat.slot >= 0 && g.source_sat.slot < sh.sats_per_plane);
      if (!known) errs.push_back(tag + "source_sat " + to_string(g.source_sat) + " is not in the constellation");
    } else {
      errs.push_back(tag + "source must be gateway or sat");
    }
  }

  const FailureSpec& f = s.failures;
  if (f.model != "none" && f.model != "random") errs.push_back("failures.model must be none or random");
  if (!(f.link_rate >= 0 && f.link_rate <= 1)) errs.push_back("failures.link_rate must be within [0, 1]");
  if (!(f.node_rate >= 0 && f.node_rate <= 1)) errs.push_back("failures.node_rate must be within [0, 1]");
  if (!(s.greedy.switch_slack_km >= 0)) errs.push_back("greedy.switch_slack_km must be >= 0");
  if (s.greedy.perimeter_steps < 0) errs.push_back("greedy.perimeter_steps must be >= 0");

  const ExperimentSpec& x = s.experiments;
  if (x.bitstring_counts.empty()) errs.push_back("experiments.bitstring_counts must not be empty");
  for (int n : x.bitstring_counts)
    if (n < 1) errs.push_back("experiments.bitstring_counts entries must be >= 1");
  check_point(x.bitstring_center, "experiments.bitstring_center");
  check_point(x.bitstring_gateway, "experiments.bitstring_gateway");
  if (!(x.bitstring_sigma_km > 0)) errs.push_back("experiments.bitstring_sigma_km must be positive");
  if (x.reach_seeds < 1) errs.push_back("experiments.reach_seeds must be >= 1");
  if (x.reach_destinations < 1) errs.push_back("experiments.reach_destinations must be >= 1");
  for (double i : x.dwell_inclinations)
    if (!(i >= 0 && i < 180)) errs.push_back("experiments.dwell_inclinations entries must be within [0, 180)");
  for (int r : x.dwell_resolutions)
    if (r < 0 || r > kMaxHexRes) errs.push_back("experiments.dwell_resolutions entries must be within 0..5");
  if (!(x.dwell_step_s > 0 && x.dwell_step_s <= 1)) errs.push_back("experiments.dwell_step_s must be within (0, 1]");
  if (!(x.dwell_duration_s >= 0)) errs.push_back("experiments.dwell_duration_s must be >= 0");
  if (x.resilience_seeds < 1) errs.push_back("experiments.resilience_seeds must be >= 1");
  if (x.resilience_resolution < 0 || x.resilience_resolution > kMaxHexRes) errs.push_back("experiments.resilience_resolution out of range 0..5");
  if (x.resilience_destinations < 1) errs.push_back("experiments.resilience_destinations must be >= 1");
  return errs;
}

// Builds a spec from a parsed document. Type errors, unknown keys and
// validation failures are reported together.
inline ScenarioSpec scenario_from_table(const toml::Table& root) {
  using detail::FieldReader;
  std::vector<std::string> errs;
  ScenarioSpec s;
  FieldReader top(root, "", errs);
  top.str("name", s.name);
  if (const auto* v = top.raw("seed")) {
    if (v->is_int() && v->as_int() >= 0) s.seed = static_cast<std::uint64_t>(v->as_int());
    else errs.push_back("'seed' must be a non-negative integer");
  }
  top.integer("resolution", s.resolution);
  top.integer("user_resolution", s.user_resolution);
  top.number("epoch_s", s.epoch_s);
  top.number("duration_s", s.duration_s);
  top.number("epoch_start_s", s.epoch_start_s);
  top.number("elevation_mask_deg", s.elevation_mask_deg);
  top.integer("ttl", s.ttl);
  std::vector<std::string> methods;
  if (top.raw("methods")) {
    top.strings("methods", methods);
    s.methods.clear();
    for (const auto& m : methods) {
      if (auto k = method_from_string(m)) s.methods.push_back(*k);
      else errs.push_back("unknown method '" + m + "'");
    }
  }

  if (top.raw("membership"))
    if (const auto* t = detail::subtable(root, "membership", errs)) {
      FieldReader r(*t, "membership.", errs);
      r.number("refresh_interval_s", s.refresh_interval_s);
      r.number("timeout_s", s.timeout_s);
      r.reject_unknown();
    }

  if (const auto* v = top.raw("shells")) {
    if (!v->is_array()) {
      errs.push_back("'shells' must be an array of tables");
    } else {
      for (std::size_t k = 0; k < v->as_array().size(); ++k) {
        const auto& e = v->as_array()[k];
        if (!e.is_table()) {
          errs.push_back("shells." + std::to_string(k) + " must be a table");
          continue;
        }
        ShellSpec sh;
        sh.shell_id = static_cast<int>(k);
        FieldReader r(e.as_table(), "shells." + std::to_string(k) + ".", errs);
        std::string preset;
        r.str("preset", preset);
        if (preset == "starlink_like") sh = starlink_like_shell();
        else if (preset == "oneweb_like") sh = oneweb_like_shell();
        else if (!preset.empty()) errs.push_back("shells." + std::to_string(k) + ".preset must be starlink_like or oneweb_like");
        if (!preset.empty()) sh.shell_id = static_cast<int>(k);
        r.integer("shell_id", sh.shell_id);
        r.number("altitude_km", sh.altitude_km);
        r.number("inclination_deg", sh.inclination_deg);
        r.integer("planes", sh.planes);
        r.integer("sats_per_plane", sh.sats_per_plane);
        r.integer("phasing_f", sh.phasing_f);
        std::string pattern;
        r.str("pattern", pattern);
        if (pattern == "delta") sh.pattern = WalkerPattern::Delta;
        else if (pattern == "star") sh.pattern = WalkerPattern::Star;
        else if (!pattern.empty()) errs.push_back("shells." + std::to_string(k) + ".pattern must be delta or star");
        r.reject_unknown();
        s.shells.push_back(sh);
      }
    }
  }

  if (top.raw("terminals"))
    if (const auto* t = detail::subtable(root, "terminals", errs)) {
      FieldReader r(*t, "terminals.", errs);
      r.str("generator", s.terminals.generator);
      r.integer("count", s.terminals.count);
      r.str("path", s.terminals.path);
      r.points("centers", s.terminals.centers);
      r.number("sigma_km", s.terminals.sigma_km);
      r.point("from", s.terminals.from);
      r.point("to", s.terminals.to);
      r.number("width_km", s.terminals.width_km);
      r.reject_unknown();
    }

  if (const auto* v = top.raw("groups")) {
    if (!v->is_array()) {
      errs.push_back("'groups' must be an array of tables");
    } else {
      for (std::size_t k = 0; k < v->as_array().size(); ++k) {
        const auto& e = v->as_array()[k];
        if (!e.is_table()) {
          errs.push_back("groups." + std::to_string(k) + " must be a table");
          continue;
        }
        GroupSpec g;
        g.group_id = static_cast<GroupId>(k + 1);
        FieldReader r(e.as_table(), "groups." + std::to_string(k) + ".", errs);
        std::int64_t gid = g.group_id;
        r.integer("group_id", gid);
        if (gid < 0 || gid > 0xFFFFFFFFLL) errs.push_back("groups." + std::to_string(k) + ".group_id must fit in 32 bits");
        g.group_id = static_cast<GroupId>(gid);
        r.str("members", g.members);
        r.number("fraction", g.fraction);
        r.point("region_center", g.region_center);
        r.number("region_radius_km", g.region_radius_km);
        r.str("source", g.source);
        r.point("gateway", g.gateway);
        std::string sat;
        r.str("source_sat", sat);
        if (!sat.empty()) {
          if (auto id = detail::parse_sat_id(sat)) g.source_sat = *id;
          else errs.push_back("groups." + std::to_string(k) + ".source_sat must look like shell-plane-slot");
        }
        r.reject_unknown();
        s.groups.push_back(g);
      }
    }
  }

  if (top.raw("failures"))
    if (const auto* t = detail::subtable(root, "failures", errs)) {
      FieldReader r(*t, "failures.", errs);
      r.str("model", s.failures.model);
      r.number("link_rate", s.failures.link_rate);
      r.number("node_rate", s.failures.node_rate);
      r.reject_unknown();
    }

  if (top.raw("greedy"))
    if (const auto* t = detail::subtable(root, "greedy", errs)) {
      FieldReader r(*t, "greedy.", errs);
      r.number("switch_slack_km", s.greedy.switch_slack_km);
      r.integer("perimeter_steps", s.greedy.perimeter_steps);
      r.reject_unknown();
    }

  if (top.raw("experiments"))
    if (const auto* t = detail::subtable(root, "experiments", errs)) {
      ExperimentSpec& x = s.experiments;
      FieldReader r(*t, "experiments.", errs);
      r.numbers("bitstring_counts", x.bitstring_counts);
      r.point("bitstring_center", x.bitstring_center);
      r.number("bitstring_sigma_km", x.bitstring_sigma_km);
      r.point("bitstring_gateway", x.bitstring_gateway);
      r.integer("reach_seeds", x.reach_seeds);
      r.integer("reach_destinations", x.reach_destinations);
      r.numbers("dwell_inclinations", x.dwell_inclinations);
      r.numbers("dwell_resolutions", x.dwell_resolutions);
      r.number("dwell_duration_s", x.dwell_duration_s);
      r.number("dwell_step_s", x.dwell_step_s);
      r.integer("resilience_seeds", x.resilience_seeds);
      r.integer("resilience_resolution", x.resilience_resolution);
      r.integer("resilience_destinations", x.resilience_destinations);
      r.reject_unknown();
    }

  top.reject_unknown();
  for (auto& e : validate(s)) errs.push_back(std::move(e));
  if (!errs.empty()) throw ValidationError(std::move(errs));
  return s;
}

// Applies "key=value" overrides to a parsed document.
inline void apply_overrides(toml::Table& root, const std::vector<std::string>& sets) {
  for (const auto& kv : sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos || eq == 0) fail(ErrorKind::Validation, "override '" + kv + "' is not key=value");
    try {
      toml::set_path(root, kv.substr(0, eq), toml::parse_override_value(kv.substr(eq + 1)));
    } catch (const Error& e) {
      fail(ErrorKind::Validation, e.what());
    }
  }
}

inline ScenarioSpec load_scenario_text(const std::string& text, const std::vector<std::string>& sets = {},
                                       const std::string& source = "<string>") {
  toml::Table root;
  try {
    root = toml::parse(text, source);
  } catch (const Error& e) {
    fail(ErrorKind::Validation, e.what());
  }
  apply_overrides(root, sets);
  return scenario_from_table(root);
}

inline ScenarioSpec load_scenario(const std::string& path, const std::vector<std::string>& sets = {}) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::Io, "cannot read scenario " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  ScenarioSpec s = load_scenario_text(ss.str(), sets, path);
  // terminal files are looked up next to the scenario
  if (!s.terminals.path.empty() && std::filesystem::path(s.terminals.path).is_relative())
    s.terminals.path = (std::filesystem::path(path).parent_path() / s.terminals.path).string();
  return s;
}

}  // namespace bierstar
