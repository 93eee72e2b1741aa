#include "udw/selftest.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <random>
#include <sstream>

#include "udw/entanglement.hpp"
#include "udw/evolution.hpp"
#include "udw/sweep.hpp"

namespace udw {

namespace {

using Status = CheckResult::Status;

std::string fmt(const char* f, double a, double b = 0) {
  char buf[160];
  std::snprintf(buf, sizeof buf, f, a, b);
  return buf;
}

CheckResult pass(std::string name, std::string detail = {}) { return {std::move(name), Status::Pass, std::move(detail)}; }
CheckResult fail(std::string name, std::string detail) { return {std::move(name), Status::Fail, std::move(detail)}; }
CheckResult skip(std::string name, std::string detail) { return {std::move(name), Status::Skip, std::move(detail)}; }

// Runs `body`, turning library exceptions into a failed check.
template <typename Body>
CheckResult guarded(const std::string& name, Body&& body) {
  try {
    return body();
  } catch (const std::exception& e) {
    return fail(name, e.what());
  }
}

bool firewall_enabled(const RunConfig& cfg) { return cfg.scenario.state.kind == StateKind::Firewall; }

CheckResult check_pt_involution() {
  std::mt19937_64 gen(7);
  std::normal_distribution<double> n;
  DensityMatrix4<double> m;
  for (int r = 0; r < 4; ++r) {
    for (int c = 0; c < 4; ++c) m(r, c) = {n(gen), n(gen)};
  }
  m = hermitian_part(m);
  const bool same = partial_transpose_b(partial_transpose_b(m)) == m;
  const double tr = std::abs(partial_transpose_b(m).trace() - m.trace());
  if (!same || tr != 0) return fail("pt_involution", "partial transpose is not an exact involution");
  return pass("pt_involution");
}

CheckResult check_initial_negativity() {
  const auto r = negativity(initial_bell_state<double>());
  if (r.negativity != 0.5 || !r.closed_form) return fail("initial_negativity", fmt("N = %.17g", r.negativity));
  return pass("initial_negativity", "N = 0.5");
}

CheckResult check_trace(const ScenarioConfig<double>& base, StateKind kind, bool inject) {
  const std::string name = std::string("trace_zero[") + (kind == StateKind::Firewall ? "firewall" : "vacuum") + "]";
  return guarded(name, [&] {
    ScenarioConfig<double> sc = base;
    sc.state.kind = kind;
    IJTable<double> table = compute_table(sc);
    if (inject) {
      auto& e = table.entry(IntegralKind::J, Detector::A, Detector::A, {-1, 1});
      e.value = -e.value;
    }
    const auto fs = final_state_from_table(std::move(table), sc.alice.coupling, sc.bob.coupling);
    if (fs.trace_defect > 1e-6) return fail(name, fmt("|tr rho2| = %.3e", fs.trace_defect));
    return pass(name, fmt("|tr rho2| = %.3e, budget %.3e", fs.trace_defect, fs.trace_budget));
  });
}

CheckResult check_hermiticity(const ScenarioConfig<double>& base) {
  return guarded("hermiticity", [&] {
    double worst = 0;
    double raw = 0;
    for (const auto kind : {StateKind::Vacuum, base.state.kind}) {
      ScenarioConfig<double> sc = base;
      sc.state.kind = kind;
      const auto fs = final_state(sc);
      worst = std::max(worst, hermitian_defect(fs.rho));
      const auto unsym = assemble_rho2_unsymmetrized(fs.table, sc.alice.coupling, sc.bob.coupling);
      raw = std::max(raw, hermitian_defect(unsym));
    }
    if (worst > 1e-12) return fail("hermiticity", fmt("defect %.3e", worst));
    return pass("hermiticity", fmt("raw asymmetry %.3e, after symmetrisation %.1e", raw, worst));
  });
}

CheckResult check_inertness(const RunConfig& cfg) {
  const std::string name = "firewall_inertness";
  if (!firewall_enabled(cfg)) return skip(name, "vacuum-only configuration");
  const auto* sharp = std::get_if<SharpSwitching<double>>(&cfg.scenario.alice.switching);
  const auto* sharp_b = std::get_if<SharpSwitching<double>>(&cfg.scenario.bob.switching);
  if (!sharp || !sharp_b) return skip(name, "needs sharp switching");
  return guarded(name, [&] {
    const double t = std::max(sharp->duration, sharp_b->duration);
    double worst = 0;
    for (double dx : {0.1, 0.2, 0.6}) {
      RunConfig c = cfg;
      c.sweep.axis = SweepAxis::XA;
      auto sc = c.at(t + dx);
      sc.state.kind = StateKind::Firewall;
      const double fw = negativity(final_state(sc).rho).negativity;
      sc.state.kind = StateKind::Vacuum;
      const double vac = negativity(final_state(sc).rho).negativity;
      worst = std::max(worst, std::abs(fw - vac));
    }
    if (worst > 1e-12) return fail(name, fmt("max |N_fw - N_vac| = %.3e for x_A > T", worst));
    return pass(name, fmt("max |N_fw - N_vac| = %.1e for x_A > T", worst));
  });
}

CheckResult check_translation(const RunConfig& cfg) {
  return guarded("translation_invariance", [&] {
    RunConfig c = cfg;
    c.sweep.axis = SweepAxis::XA;
    std::vector<double> n;
    for (double xa : {0.5, 1.0, 5.0}) {
      auto sc = c.at(xa);
      sc.state.kind = StateKind::Vacuum;
      n.push_back(negativity(final_state(sc).rho).negativity);
    }
    const auto [lo, hi] = std::minmax_element(n.begin(), n.end());
    const double rel = (*hi - *lo) / std::abs(*hi);
    if (!(rel <= 1e-6)) return fail("translation_invariance", fmt("relative spread %.3e", rel));
    return pass("translation_invariance", fmt("relative spread %.1e over x_A in {0.5, 1, 5}", rel));
  });
}

CheckResult check_homogeneity(const ScenarioConfig<double>& sc) {
  return guarded("coupling_homogeneity", [&] {
    const auto table = compute_table(sc);
    const auto a = assemble_rho2(table, sc.alice.coupling, sc.bob.coupling);
    const auto b = assemble_rho2(table, 2 * sc.alice.coupling, 2 * sc.bob.coupling);
    const double scale = a.cwiseAbs().maxCoeff();
    const double dev = (b - 4.0 * a).cwiseAbs().maxCoeff();
    const double tol = 8 * std::numeric_limits<double>::epsilon() * 4 * scale;
    if (!(dev <= tol)) return fail("coupling_homogeneity", fmt("|rho2(2l) - 4 rho2(l)| = %.3e", dev));
    return pass("coupling_homogeneity", fmt("|rho2(2l) - 4 rho2(l)| = %.1e", dev));
  });
}

CheckResult check_methods(const ScenarioConfig<double>& base) {
  return guarded("method_consistency", [&] {
    double worst = 0;
    for (const auto kind : {StateKind::Vacuum, base.state.kind}) {
      ScenarioConfig<double> sc = base;
      sc.state.kind = kind;
      worst = std::max(worst, negativity(final_state(sc).rho).method_discrepancy);
    }
    if (!(worst <= 1e-6)) return fail("method_consistency", fmt("discrepancy %.3e", worst));
    return pass("method_consistency", fmt("exact vs first-order discrepancy %.1e", worst));
  });
}

CheckResult check_regression(const RunConfig& cfg) {
  return guarded("regression", [&] {
    struct Ref {
      const char* preset;
      double xa;
      StateKind kind;
      double value;
    };
    const Ref refs[] = {
        {"fig2", 0.9, StateKind::Vacuum, ReferenceValues::fig2_vacuum},
        {"fig2", 0.9, StateKind::Firewall, ReferenceValues::fig2_firewall},
        {"fig3", 1.5, StateKind::Vacuum, ReferenceValues::fig3_vacuum},
        {"fig3", 1.5, StateKind::Firewall, ReferenceValues::fig3_firewall},
    };
    double worst = 0;
    int used = 0;
    for (const auto& r : refs) {
      if (r.kind == StateKind::Firewall && !firewall_enabled(cfg)) continue;
      auto sc = preset_point(r.preset, r.xa);
      sc.state.kind = r.kind;
      worst = std::max(worst, std::abs(negativity(final_state(sc).rho).negativity - r.value));
      ++used;
    }
    if (!(worst <= ReferenceValues::kTolerance)) return fail("regression", fmt("max deviation %.3e", worst));
    return pass("regression", fmt("%.0f pinned negativities, max deviation %.1e", used, worst));
  });
}

CheckResult check_oracle_quick(const ScenarioConfig<double>& base, const oracle::OracleConfig& oc_in) {
  return guarded("oracle_spot_check", [&] {
    oracle::OracleConfig oc = oc_in;
    oc.mc_samples = 200'000;
    const auto fast = compute_block(IntegralKind::I, Detector::A, Detector::A, base);
    const auto orc = oracle::oracle_block(IntegralKind::I, Detector::A, Detector::A, base, oc);
    double worst = 0;
    for (int s = 0; s < 4; ++s) {
      oracle::EntryComparison c{IntegralKind::I, Detector::A, Detector::A, kSignPairs[s], fast[s], orc[s]};
      if (!c.ok()) return fail("oracle_spot_check", fmt("I^AA entry %.0f off by %.3e", s, c.deviation()));
      worst = std::max(worst, c.deviation());
    }
    return pass("oracle_spot_check", fmt("I^AA within %.1e of the extrapolated oracle", worst));
  });
}

CheckResult check_oracle_deep(const char* name, const ScenarioConfig<double>& base, StateKind kind,
                              const oracle::OracleConfig& oc) {
  const std::string label = std::string("oracle_table[") + name + "," +
                            (kind == StateKind::Firewall ? "firewall" : "vacuum") + "]";
  return guarded(label, [&] {
    ScenarioConfig<double> sc = base;
    sc.state.kind = kind;
    const auto fast = compute_table(sc);
    const auto cmp = oracle::compare_table(sc, fast, oc);
    int bad = 0;
    double worst_ratio = 0;
    for (const auto& c : cmp) {
      if (!c.ok()) ++bad;
      worst_ratio = std::max(worst_ratio, c.deviation() / std::max(c.allowed(), 1e-300));
    }
    if (bad) return fail(label, fmt("%.0f of 32 entries disagree", bad));
    return pass(label, fmt("32 entries agree, worst deviation %.2f of allowance", worst_ratio));
  });
}

const char* status_label(Status s) {
  switch (s) {
    case Status::Pass: return "PASS";
    case Status::Fail: return "FAIL";
    case Status::Skip: return "SKIP";
  }
  return "?";
}

}  // namespace

ScenarioConfig<double> preset_point(std::string_view name, double x_a) {
  RunConfig cfg = preset(name);
  cfg.sweep.axis = SweepAxis::XA;
  return cfg.at(x_a);
}

std::vector<CheckResult> run_selftest(const SelftestOptions& opt) {
  const RunConfig& cfg = opt.config;
  cfg.validate();
  const auto base = cfg.base();
  std::vector<CheckResult> out;
  out.push_back(check_pt_involution());
  out.push_back(check_initial_negativity());
  out.push_back(check_trace(base, StateKind::Vacuum, opt.inject_fault));
  if (firewall_enabled(cfg)) {
    out.push_back(check_trace(base, StateKind::Firewall, opt.inject_fault));
  } else {
    out.push_back(skip("trace_zero[firewall]", "vacuum-only configuration"));
  }
  out.push_back(check_hermiticity(base));
  out.push_back(check_inertness(cfg));
  out.push_back(check_translation(cfg));
  out.push_back(check_homogeneity(base));
  out.push_back(check_methods(base));
  out.push_back(check_regression(cfg));
  out.push_back(check_oracle_quick(base, opt.oracle));
  if (opt.deep) {
    for (const auto kind : {StateKind::Vacuum, StateKind::Firewall}) {
      if (kind == StateKind::Firewall && !firewall_enabled(cfg)) {
        out.push_back(skip("oracle_table[firewall]", "vacuum-only configuration"));
        continue;
      }
      out.push_back(check_oracle_deep("fig2", preset_point("fig2", 0.9), kind, opt.oracle));
      out.push_back(check_oracle_deep("fig3", preset_point("fig3", 1.5), kind, opt.oracle));
    }
  }
  return out;
}

int report_selftest(std::ostream& os, const std::vector<CheckResult>& results) {
  std::size_t width = 0;
  for (const auto& r : results) width = std::max(width, r.name.size());
  int failed = 0;
  int skipped = 0;
  for (const auto& r : results) {
    os << status_label(r.status) << "  " << r.name << std::string(width - r.name.size() + 2, ' ') << r.detail << '\n';
    failed += r.status == Status::Fail;
    skipped += r.status == Status::Skip;
  }
  os << results.size() - failed - skipped << " passed, " << failed << " failed, " << skipped << " skipped\n";
  return failed ? kExitValidation : kExitOk;
}

}  // namespace udw
