// Command-line driver: single points, sweeps, figure presets, self-test and
// the (undocumented in --help) oracle comparison.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "udw/config.hpp"
#include "udw/errors.hpp"
#include "udw/oracle.hpp"
#include "udw/selftest.hpp"
#include "udw/sweep.hpp"

namespace fs = std::filesystem;
using namespace udw;

namespace {

void write_text(const std::string& path, const std::string& text) {
  if (path == "-") {
    std::cout << text;
    return;
  }
  const fs::path p(path);
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path);
  out << text;
}

// Sidecar next to the CSV when only --full-diagnostics was given.
std::string sidecar_path(const OutputSpec& o) {
  if (!o.json.empty()) return o.json;
  if (!o.full_diagnostics) return {};
  if (o.csv == "-") return "-";
  return fs::path(o.csv).replace_extension(".json").string();
}

int emit_sweep(const RunConfig& cfg) {
  const SweepResult r = run_sweep(cfg);
  write_text(cfg.output.csv, to_csv(r.rows));
  if (const auto side = sidecar_path(cfg.output); !side.empty()) {
    write_text(side, sweep_json(cfg, r, cfg.output.full_diagnostics).dump(2) + "\n");
  }
  if (cfg.output.csv != "-") {
    std::cerr << "wrote " << cfg.output.csv << " (" << r.rows.size() << " points)\n";
  }
  if (const int s = r.status(); s != kExitOk) {
    std::cerr << "some points failed; see the nan rows" << (sidecar_path(cfg.output).empty() ? "" : " and the JSON sidecar")
              << "\n";
    return s;
  }
  return kExitOk;
}

struct PointArgs {
  std::string config;
  std::string state;
  std::string out = "-";
  bool full = false;
};

int cmd_point(const PointArgs& a) {
  const RunConfig cfg = load_config(a.config);
  std::optional<StateKind> only;
  if (a.state == "vacuum") only = StateKind::Vacuum;
  if (a.state == "firewall") only = StateKind::Firewall;
  const PointReport p = run_point(cfg.base(), cfg.sweep.compare_vacuum, only);
  write_text(a.out, point_json(p, a.full || cfg.output.full_diagnostics).dump(2) + "\n");
  for (const auto* s : {&p.firewall, &p.vacuum}) {
    if (*s && !(*s)->ok()) std::cerr << "error: " << (*s)->message << "\n";
  }
  return p.status();
}

struct SweepArgs {
  std::string config;
  std::optional<std::string> axis;
  std::optional<double> start;
  std::optional<double> stop;
  std::optional<int> count;
  std::optional<std::string> csv;
  std::optional<std::string> json;
  bool full = false;
};

int cmd_sweep(const SweepArgs& a) {
  RunConfig cfg = load_config(a.config);
  if (a.axis) cfg.sweep.axis = parse_axis(*a.axis);
  const bool any_grid = a.start || a.stop || a.count;
  if (any_grid) {
    if (!(a.start && a.stop && a.count)) throw ConfigError("--start, --stop and --count go together");
    cfg.sweep.values = SweepSpec::grid(*a.start, *a.stop, *a.count);
  } else if (a.axis) {
    throw ConfigError("--axis needs --start, --stop and --count");
  }
  if (a.csv) cfg.output.csv = *a.csv;
  if (a.json) cfg.output.json = *a.json;
  cfg.output.full_diagnostics = cfg.output.full_diagnostics || a.full;
  cfg.validate();
  return emit_sweep(cfg);
}

int cmd_preset(const std::string& name, const std::string& dir, bool full) {
  RunConfig cfg = preset(name);
  cfg.output.csv = (fs::path(dir) / (name + ".csv")).string();
  cfg.output.full_diagnostics = full;
  return emit_sweep(cfg);
}

struct SelftestArgs {
  bool deep = false;
  std::string config;
  bool inject_fault = false;
};

int cmd_selftest(const SelftestArgs& a) {
  SelftestOptions opt;
  if (!a.config.empty()) opt.config = load_config(a.config);
  opt.deep = a.deep;
  opt.inject_fault = a.inject_fault;
  return report_selftest(std::cout, run_selftest(opt));
}

struct OracleArgs {
  std::string config;
  std::string preset = "fig2";
  double x_a = -1;
  std::uint64_t samples = 10'000'000;
  std::uint64_t seed = oracle::OracleConfig{}.mc_seed;
  std::string out = "-";
};

nlohmann::json complex_json(std::complex<double> z) { return {{"re", z.real()}, {"im", z.imag()}}; }

int cmd_oracle(const OracleArgs& a) {
  ScenarioConfig<double> base;
  bool compare_vacuum = true;
  if (!a.config.empty()) {
    const RunConfig cfg = load_config(a.config);
    base = cfg.base();
    compare_vacuum = cfg.sweep.compare_vacuum;
  } else {
    base = preset_point(a.preset, a.x_a > 0 ? a.x_a : (a.preset == "fig3" ? 1.5 : 0.9));
  }
  oracle::OracleConfig oc;
  oc.mc_samples = a.samples;
  oc.mc_seed = a.seed;
  oc.validate();

  std::vector<StateKind> kinds{base.state.kind};
  if (base.state.kind == StateKind::Firewall && compare_vacuum) kinds.push_back(StateKind::Vacuum);
  nlohmann::json report;
  report["x_A"] = base.alice.position;
  report["x_B"] = base.bob.position;
  report["mc_samples"] = oc.mc_samples;
  report["mc_seed"] = oc.mc_seed;
  report["epsilons"] = oc.epsilons;
  bool all_ok = true;
  for (const auto kind : kinds) {
    ScenarioConfig<double> sc = base;
    sc.state.kind = kind;
    const auto fast = compute_table(sc);
    nlohmann::json entries = nlohmann::json::array();
    for (const auto& c : oracle::compare_table(sc, fast, oc)) {
      all_ok = all_ok && c.ok();
      entries.push_back({{"kind", c.kind == IntegralKind::I ? "I" : "J"},
                         {"nu", c.nu == Detector::A ? "A" : "B"},
                         {"eta", c.eta == Detector::A ? "A" : "B"},
                         {"eps", c.sp.eps},
                         {"delta", c.sp.delta},
                         {"fast", complex_json(c.fast.value)},
                         {"fast_err", c.fast.error_estimate},
                         {"extrapolated", complex_json(c.oracle.extrapolated)},
                         {"extrapolation_uncertainty", c.oracle.extrapolation_uncertainty},
                         {"monte_carlo", complex_json(c.oracle.monte_carlo)},
                         {"mc_standard_error", c.oracle.mc_standard_error},
                         {"deviation", c.deviation()},
                         {"allowed", c.allowed()},
                         {"paths_agree", c.oracle.paths_agree()},
                         {"ok", c.ok()}});
    }
    report[kind == StateKind::Firewall ? "firewall" : "vacuum"] = std::move(entries);
  }
  report["ok"] = all_ok;
  write_text(a.out, report.dump(2) + "\n");
  return all_ok ? kExitOk : kExitValidation;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-detector entanglement in the vacuum and the Rindler firewall state"};
  app.require_subcommand(1);

  PointArgs pa;
  auto* point = app.add_subcommand("point", "Evaluate one parameter point and print a JSON report");
  point->add_option("--config", pa.config, "JSON configuration")->required()->check(CLI::ExistingFile);
  point->add_option("--state", pa.state, "Restrict to one field state")
      ->check(CLI::IsMember({"vacuum", "firewall"}));
  point->add_option("--out", pa.out, "Output file (default stdout)");
  point->add_flag("--full-diagnostics", pa.full, "Include the I/J table");

  SweepArgs sa;
  auto* sweep = app.add_subcommand("sweep", "Sweep one parameter and write CSV");
  sweep->add_option("--config", sa.config, "JSON configuration")->required()->check(CLI::ExistingFile);
  sweep->add_option("--axis", sa.axis, "x_A, T, sigma, tau0, R, Omega or Lambda");
  sweep->add_option("--start", sa.start);
  sweep->add_option("--stop", sa.stop);
  sweep->add_option("--count", sa.count);
  sweep->add_option("--csv", sa.csv, "CSV destination, '-' for stdout");
  sweep->add_option("--json", sa.json, "JSON sidecar destination");
  sweep->add_flag("--full-diagnostics", sa.full, "Write the I/J tables to the JSON sidecar");

  std::string preset_name;
  std::string preset_dir = ".";
  bool preset_full = false;
  auto* pre = app.add_subcommand("preset", "Run the sharp (fig2) or Gaussian (fig3) x_A sweep");
  pre->add_option("name", preset_name)->required()->check(CLI::IsMember({"fig2", "fig3"}));
  pre->add_option("--out", preset_dir, "Output directory");
  pre->add_flag("--full-diagnostics", preset_full, "Also write a JSON sidecar with the I/J tables");

  SelftestArgs ta;
  auto* self = app.add_subcommand("selftest", "Run the invariant checks");
  self->add_flag("--deep", ta.deep, "Add the full oracle comparison");
  self->add_option("--config", ta.config, "Check this configuration instead of the fig2 preset")
      ->check(CLI::ExistingFile);
  self->add_flag("--inject-fault", ta.inject_fault)->group("");

  OracleArgs oa;
  auto* orc = app.add_subcommand("oracle", "")->group("");
  orc->add_option("--config", oa.config)->check(CLI::ExistingFile);
  orc->add_option("--preset", oa.preset)->check(CLI::IsMember({"fig2", "fig3"}));
  orc->add_option("--x-a", oa.x_a);
  orc->add_option("--samples", oa.samples);
  orc->add_option("--seed", oa.seed);
  orc->add_option("--out", oa.out);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*point) return cmd_point(pa);
    if (*sweep) return cmd_sweep(sa);
    if (*pre) return cmd_preset(preset_name, preset_dir, preset_full);
    if (*self) return cmd_selftest(ta);
    if (*orc) return cmd_oracle(oa);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const NotConverged& e) {
    std::cerr << "not converged: " << e.what() << "\n";
    return kExitNotConverged;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  }
  return kExitOk;
}
