// bierstar: command-line front end for the simulator and experiments.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "bierstar/conformance.hpp"
#include "bierstar/experiments.hpp"
#include "bierstar/scenario.hpp"
#include "bierstar/simcore.hpp"

namespace fs = std::filesystem;
using namespace bierstar;

namespace {

constexpr int kExitValidation = 1;
constexpr int kExitRuntime = 2;

struct Common {
  std::string scenario;
  std::vector<std::string> sets;
  std::string out = ".";
  bool force = false;
  int threads = 1;
};

void add_common(CLI::App* sub, Common& c, bool threads) {
  sub->add_option("--scenario", c.scenario, "Scenario file (TOML)")->required()->check(CLI::ExistingFile);
  sub->add_option("--set", c.sets, "Override a scenario field, key=value (repeatable)");
  sub->add_option("--out", c.out, "Output directory (created if absent)");
  sub->add_flag("--force", c.force, "Overwrite existing output files");
  if (threads) sub->add_option("--threads", c.threads, "Worker threads")->check(CLI::PositiveNumber);
}

void setup_logging() {
  auto logger = spdlog::stderr_color_mt("bierstar");
  spdlog::set_default_logger(logger);
  spdlog::set_pattern("[%l] %v");
  spdlog::set_level(spdlog::level::warn);
  if (const char* env = std::getenv("BIERSTAR_LOG")) {
    const auto lvl = spdlog::level::from_str(env);
    // from_str maps unknown names to "off"
    if (lvl != spdlog::level::off || std::string(env) == "off") spdlog::set_level(lvl);
  }
}

template <typename Rows, typename Writer>
void write_csv(const Common& c, const std::string& name, const Rows& rows, Writer w) {
  auto out = open_output(c.out, name, c.force);
  w(out, rows);
  spdlog::info("wrote {} ({} rows)", (fs::path(c.out) / name).string(), rows.size());
}

}  // namespace

int main(int argc, char** argv) {
  setup_logging();
  CLI::App app{"LEO geographic multicast simulator"};
  app.require_subcommand(1);

  Common c;
  double snap_time = -1;
  auto* cmd_const = app.add_subcommand("constellation", "Write one snapshot (snapshot.csv, isls.csv)");
  add_common(cmd_const, c, false);
  cmd_const->add_option("--time", snap_time, "Snapshot time in seconds (default: the scenario's epoch_start_s)");

  auto* cmd_bits = app.add_subcommand("bitstring", "Header length per method vs terminal count (bitstring.csv)");
  add_common(cmd_bits, c, false);
  auto* cmd_reach = app.add_subcommand("reach", "Reach rate per method over seeded snapshots (reach.csv)");
  add_common(cmd_reach, c, true);
  auto* cmd_dwell = app.add_subcommand("dwell", "Analytic and empirical cell dwelling time (dwell.csv)");
  add_common(cmd_dwell, c, true);
  auto* cmd_res = app.add_subcommand("resilience", "Removable links and satellites per seed (resilience.csv)");
  add_common(cmd_res, c, true);
  auto* cmd_run = app.add_subcommand("run", "Run the scenario epoch by epoch (epochs, headers, run_reach, run_bitstring CSVs)");
  add_common(cmd_run, c, true);

  std::vector<std::string> fixtures;
  auto* cmd_conf = app.add_subcommand("conformance", "Check the grid against reference fixture CSVs");
  cmd_conf->add_option("--fixtures", fixtures, "Fixture CSV (cell vectors or topology); repeatable")->required()->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitValidation;
  }

  try {
    if (cmd_conf->parsed()) {
      bool ok = true;
      for (const auto& f : fixtures) {
        const ConformanceResult r = check_fixture_file(f);
        for (std::size_t k = 0; k < r.mismatches.size() && k < 20; ++k) spdlog::error("{}: {}", f, r.mismatches[k]);
        std::cout << f << ": " << r.checked << " checked, " << r.mismatches.size() << " mismatches\n";
        ok = ok && r.ok();
      }
      return ok ? 0 : kExitRuntime;
    }

    const ScenarioSpec spec = load_scenario(c.scenario, c.sets);
    spdlog::info("scenario {} (seed {})", spec.name, spec.seed_value());

    if (cmd_const->parsed()) {
      const Constellation con = build_constellation(spec.shells);
      const Snapshot snap = propagate(con, snap_time >= 0 ? snap_time : spec.epoch_start_s);
      {
        auto out = open_output(c.out, "snapshot.csv", c.force);
        write_snapshot_csv(out, snap);
      }
      auto out = open_output(c.out, "isls.csv", c.force);
      write_isl_csv(out, snap);
      spdlog::info("{} satellites, {} ISLs", snap.size(), snap.edges.size());
    } else if (cmd_bits->parsed()) {
      write_csv(c, "bitstring.csv", bitstring_experiment(spec), [](std::ostream& o, const auto& r) { write_bitstring_csv(o, r); });
    } else if (cmd_reach->parsed()) {
      write_csv(c, "reach.csv", reach_experiment(spec, c.threads), [](std::ostream& o, const auto& r) { write_reach_csv(o, r); });
    } else if (cmd_dwell->parsed()) {
      write_csv(c, "dwell.csv", dwell_experiment(spec, c.threads), [](std::ostream& o, const auto& r) { write_dwell_csv(o, r); });
    } else if (cmd_res->parsed()) {
      write_csv(c, "resilience.csv", resilience_experiment(spec, c.threads), [](std::ostream& o, const auto& r) { write_resilience_csv(o, r); });
    } else if (cmd_run->parsed()) {
      const auto traces = run(spec, c.threads);
      write_run_outputs(c.out, traces, c.force);
      spdlog::info("{} epochs written to {}", traces.size(), c.out);
    }
    return 0;
  } catch (const ValidationError& e) {
    std::cerr << "invalid scenario:\n";
    for (const auto& m : e.errors()) std::cerr << "  " << m << "\n";
    return kExitValidation;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.kind() == ErrorKind::Validation || e.kind() == ErrorKind::Parse ? kExitValidation : kExitRuntime;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
}
