#include "udw/sweep.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace udw {

namespace {

using nlohmann::json;

int worse(int a, int b) {
  // validation failures outrank non-convergence
  if (a == kExitValidation || b == kExitValidation) return kExitValidation;
  return std::max(a, b);
}

const char* sign_label(SignPair sp) {
  static constexpr const char* kLabels[] = {"++", "+-", "-+", "--"};
  return kLabels[sign_index(sp)];
}

const char* state_label(StateKind k) { return k == StateKind::Firewall ? "firewall" : "vacuum"; }

json matrix_json(const DensityMatrix4<double>& m) {
  json re = json::array();
  json im = json::array();
  for (int r = 0; r < 4; ++r) {
    json rr = json::array();
    json ii = json::array();
    for (int c = 0; c < 4; ++c) {
      rr.push_back(m(r, c).real());
      ii.push_back(m(r, c).imag());
    }
    re.push_back(rr);
    im.push_back(ii);
  }
  return {{"re", re}, {"im", im}};
}

// NaN is not representable in JSON; failed values become null.
json number(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

json state_json(const StateReport& s, bool full) {
  json j;
  j["state"] = state_label(s.kind);
  j["status"] = s.status;
  if (!s.message.empty()) j["message"] = s.message;
  j["clipped"] = s.clipped;
  j["neglected_chi2_mass"] = s.neglected_mass;
  if (!s.final) return j;
  const auto& n = s.negativity;
  j["negativity"] = number(n.negativity);
  j["perturbative_negativity"] = number(n.perturbative_negativity);
  j["method_discrepancy"] = number(n.method_discrepancy);
  j["pt_eigenvalues"] = n.pt_eigenvalues;
  j["closed_form"] = n.closed_form;
  j["quad_error"] = s.quad_error;
  j["trace_defect"] = s.final->trace_defect;
  j["trace_budget"] = s.final->trace_budget;
  j["converged"] = !s.final->table.degraded();
  j["rho"] = matrix_json(s.final->rho);
  if (full) j["ij_table"] = table_json(s.final->table);
  return j;
}

std::string format_value(double x) {
  if (std::isnan(x)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.15e", x);
  return buf;
}

}  // namespace

int PointReport::status() const {
  int s = kExitOk;
  if (firewall) s = worse(s, firewall->status);
  if (vacuum) s = worse(s, vacuum->status);
  return s;
}

int SweepResult::status() const {
  int s = kExitOk;
  for (const auto& p : points) s = worse(s, p.status());
  return s;
}

StateReport evaluate_state(const ScenarioConfig<double>& base, StateKind kind) {
  ScenarioConfig<double> sc = base;
  sc.state.kind = kind;
  StateReport out;
  out.kind = kind;
  try {
    for (const auto d : {Detector::A, Detector::B}) {
      const auto w = integration_window(sc, d);
      out.clipped = out.clipped || w.clipped;
      out.neglected_mass = std::max(out.neglected_mass, w.neglected_mass);
    }
    out.final = final_state(sc);
    out.negativity = negativity(out.final->rho);
    out.quad_error = out.final->rho2_bound.norm();
    if (out.final->table.degraded()) {
      out.status = kExitNotConverged;
      out.message = "quadrature did not reach the requested tolerance";
    }
  } catch (const NotConverged& e) {
    out.status = kExitNotConverged;
    out.message = e.what();
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    out.status = kExitValidation;
    out.message = e.what();
  }
  return out;
}

PointReport run_point(const ScenarioConfig<double>& sc, bool compare_vacuum, std::optional<StateKind> only) {
  PointReport p;
  p.scenario = sc;
  p.axis_value = sc.alice.position;
  const bool want_fw = only ? *only == StateKind::Firewall : sc.state.kind == StateKind::Firewall;
  const bool want_vac = only ? *only == StateKind::Vacuum : (sc.state.kind == StateKind::Vacuum || compare_vacuum);
  if (want_fw) p.firewall = evaluate_state(sc, StateKind::Firewall);
  if (want_vac) p.vacuum = evaluate_state(sc, StateKind::Vacuum);
  return p;
}

SweepRow make_row(const PointReport& p) {
  SweepRow row{p.axis_value, NAN, NAN, NAN, NAN, NAN, "none"};
  double err = -1;
  auto take = [&](const std::optional<StateReport>& s, double& n, double& deficit) {
    if (!s) return;
    if (s->clipped) row.tail_flag = "clipped";
    if (!s->ok()) return;
    n = s->negativity.negativity;
    deficit = 0.5 - n;
    err = std::max(err, s->quad_error);
  };
  take(p.firewall, row.negativity_firewall, row.deficit_fw);
  take(p.vacuum, row.negativity_vacuum, row.deficit_vac);
  if (err >= 0) row.quad_error = err;
  return row;
}

SweepResult run_sweep(const RunConfig& cfg, unsigned threads) {
  cfg.validate();
  const auto& values = cfg.sweep.values;
  SweepResult r;
  r.points.resize(values.size());
  parallel_for(
      values.size(),
      [&](std::size_t i) {
        r.points[i] = run_point(cfg.at(values[i]), cfg.sweep.compare_vacuum);
        r.points[i].axis_value = values[i];
      },
      threads);
  for (const auto& p : r.points) r.rows.push_back(make_row(p));
  return r;
}

std::string to_csv(const std::vector<SweepRow>& rows) {
  std::string out = kCsvHeader;
  out += '\n';
  for (const auto& r : rows) {
    for (double x : {r.axis_value, r.negativity_firewall, r.negativity_vacuum, r.deficit_fw, r.deficit_vac,
                     r.quad_error}) {
      out += format_value(x);
      out += ',';
    }
    out += r.tail_flag;
    out += '\n';
  }
  return out;
}

json table_json(const IJTable<double>& table) {
  json j = json::object();
  for (const auto nu : {Detector::A, Detector::B}) {
    for (const auto eta : {Detector::A, Detector::B}) {
      for (const auto kind : {IntegralKind::I, IntegralKind::J}) {
        for (const auto sp : kSignPairs) {
          const auto& e = table.entry(kind, nu, eta, sp);
          j[nu == Detector::A ? "A" : "B"][eta == Detector::A ? "A" : "B"][kind == IntegralKind::I ? "I" : "J"]
           [sign_label(sp)] = {{"re", e.value.real()}, {"im", e.value.imag()}, {"err", e.error_estimate}};
        }
      }
    }
  }
  return j;
}

json point_json(const PointReport& p, bool full_diagnostics) {
  json j;
  j["axis_value"] = p.axis_value;
  j["x_A"] = p.scenario.alice.position;
  j["x_B"] = p.scenario.bob.position;
  j["status"] = p.status();
  if (p.firewall) j["firewall"] = state_json(*p.firewall, full_diagnostics);
  if (p.vacuum) j["vacuum"] = state_json(*p.vacuum, full_diagnostics);
  return j;
}

json sweep_json(const RunConfig& cfg, const SweepResult& r, bool full_diagnostics) {
  json j;
  j["config"] = to_json(cfg);
  j["status"] = r.status();
  json pts = json::array();
  for (const auto& p : r.points) pts.push_back(point_json(p, full_diagnostics));
  j["points"] = std::move(pts);
  return j;
}

}  // namespace udw
