#include "udw/config.hpp"

#include <cmath>
#include <fstream>
#include <set>

#include "udw/errors.hpp"

namespace udw {

namespace {

using nlohmann::json;

void reject_unknown(const json& obj, std::string_view where, std::initializer_list<std::string_view> known) {
  if (!obj.is_object()) throw ConfigError(std::string(where) + ": expected an object");
  const std::set<std::string_view> allowed(known);
  for (const auto& [key, _] : obj.items()) {
    if (!allowed.contains(key)) throw ConfigError(std::string(where) + ": unknown key '" + key + "'");
  }
}

template <typename T>
void read(const json& obj, const char* key, T& out, std::string_view where) {
  if (!obj.contains(key)) return;
  try {
    out = obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(std::string(where) + "." + key + ": wrong type");
  }
}

SwitchingSpec<double> parse_switching(const json& j, std::string_view where) {
  if (!j.is_object() || !j.contains("type")) throw ConfigError(std::string(where) + ": switching needs a 'type'");
  std::string type;
  read(j, "type", type, where);
  if (type == "sharp") {
    reject_unknown(j, where, {"type", "duration"});
    SharpSwitching<double> s{1.8};
    read(j, "duration", s.duration, where);
    return s;
  }
  if (type == "gaussian") {
    reject_unknown(j, where, {"type", "center", "width", "window_sigmas"});
    GaussianSwitching<double> g{2, 1, 6};
    read(j, "center", g.center, where);
    read(j, "width", g.width, where);
    read(j, "window_sigmas", g.window_sigmas, where);
    return g;
  }
  if (type == "none") {
    reject_unknown(j, where, {"type"});
    return NoSwitching{};
  }
  throw ConfigError(std::string(where) + ": unknown switching type '" + type + "'");
}

json switching_json(const SwitchingSpec<double>& s) {
  if (const auto* sh = std::get_if<SharpSwitching<double>>(&s)) return {{"type", "sharp"}, {"duration", sh->duration}};
  if (const auto* g = std::get_if<GaussianSwitching<double>>(&s)) {
    return {{"type", "gaussian"}, {"center", g->center}, {"width", g->width}, {"window_sigmas", g->window_sigmas}};
  }
  return {{"type", "none"}};
}

void validate_switching(const SwitchingSpec<double>& s, std::string_view who) {
  const std::string w(who);
  if (const auto* sh = std::get_if<SharpSwitching<double>>(&s)) {
    if (!(sh->duration > 0) || !std::isfinite(sh->duration)) throw ConfigError(w + ": duration must be positive");
  } else if (const auto* g = std::get_if<GaussianSwitching<double>>(&s)) {
    if (!(g->width > 0) || !std::isfinite(g->width)) throw ConfigError(w + ": width must be positive");
    if (!std::isfinite(g->center)) throw ConfigError(w + ": center must be finite");
    if (!(g->window_sigmas >= 4)) throw ConfigError(w + ": window_sigmas must be at least 4");
  }
}

}  // namespace

std::string_view axis_name(SweepAxis a) {
  switch (a) {
    case SweepAxis::XA: return "x_A";
    case SweepAxis::T: return "T";
    case SweepAxis::Sigma: return "sigma";
    case SweepAxis::Tau0: return "tau0";
    case SweepAxis::R: return "R";
    case SweepAxis::Omega: return "Omega";
    case SweepAxis::Lambda: return "Lambda";
  }
  return "?";
}

SweepAxis parse_axis(std::string_view name) {
  for (auto a : {SweepAxis::XA, SweepAxis::T, SweepAxis::Sigma, SweepAxis::Tau0, SweepAxis::R, SweepAxis::Omega,
                 SweepAxis::Lambda}) {
    if (axis_name(a) == name) return a;
  }
  throw ConfigError("unknown sweep axis '" + std::string(name) + "'");
}

std::vector<double> SweepSpec::grid(double start, double stop, int count) {
  if (count < 1) throw ConfigError("sweep: count must be at least 1");
  if (!std::isfinite(start) || !std::isfinite(stop)) throw ConfigError("sweep: start and stop must be finite");
  std::vector<double> v(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    v[static_cast<std::size_t>(i)] = count == 1 ? start : start + (stop - start) * i / (count - 1);
  }
  return v;
}

ScenarioConfig<double> RunConfig::base() const {
  ScenarioConfig<double> sc = scenario;
  sc.bob.position = sc.alice.position + separation;
  return sc;
}

ScenarioConfig<double> RunConfig::at(double value) const {
  ScenarioConfig<double> sc = scenario;
  double r = separation;
  bool touched = false;
  auto each_switching = [&](auto&& fn) {
    for (auto* d : {&sc.alice, &sc.bob}) std::visit([&](auto& s) { fn(s); }, d->switching);
  };
  switch (sweep.axis) {
    case SweepAxis::XA:
      sc.alice.position = value;
      break;
    case SweepAxis::R:
      r = value;
      break;
    case SweepAxis::Omega:
      sc.alice.gap = sc.bob.gap = value;
      break;
    case SweepAxis::Lambda:
      sc.state.lambda_ir = value;
      break;
    case SweepAxis::T:
      each_switching([&](auto& s) {
        if constexpr (std::is_same_v<std::decay_t<decltype(s)>, SharpSwitching<double>>) {
          s.duration = value;
          touched = true;
        }
      });
      if (!touched) throw ConfigError("sweep axis T needs sharp switching");
      break;
    case SweepAxis::Sigma:
    case SweepAxis::Tau0:
      each_switching([&](auto& s) {
        if constexpr (std::is_same_v<std::decay_t<decltype(s)>, GaussianSwitching<double>>) {
          (sweep.axis == SweepAxis::Sigma ? s.width : s.center) = value;
          touched = true;
        }
      });
      if (!touched) throw ConfigError("sweep axis " + std::string(axis_name(sweep.axis)) + " needs Gaussian switching");
      break;
  }
  sc.bob.position = sc.alice.position + r;
  return sc;
}

double RunConfig::axis_value() const {
  auto first_field = [&](auto pick) -> double {
    for (const auto* d : {&scenario.alice, &scenario.bob}) {
      double out = NAN;
      std::visit([&](const auto& s) { out = pick(s); }, d->switching);
      if (!std::isnan(out)) return out;
    }
    return NAN;
  };
  switch (sweep.axis) {
    case SweepAxis::XA: return scenario.alice.position;
    case SweepAxis::R: return separation;
    case SweepAxis::Omega: return scenario.alice.gap;
    case SweepAxis::Lambda: return scenario.state.lambda_ir;
    case SweepAxis::T:
      return first_field([](const auto& s) {
        if constexpr (requires { s.duration; }) return s.duration;
        return double(NAN);
      });
    case SweepAxis::Sigma:
      return first_field([](const auto& s) {
        if constexpr (requires { s.width; }) return s.width;
        return double(NAN);
      });
    case SweepAxis::Tau0:
      return first_field([](const auto& s) {
        if constexpr (requires { s.center; }) return s.center;
        return double(NAN);
      });
  }
  return NAN;
}

void RunConfig::validate() const {
  const auto& a = scenario.alice;
  const auto& b = scenario.bob;
  if (!(a.position > 0) || !std::isfinite(a.position)) throw ConfigError("alice.position must be positive");
  if (!(separation > 0) || !std::isfinite(separation)) throw ConfigError("bob.separation must be positive");
  for (const auto* d : {&a, &b}) {
    const char* who = d == &a ? "alice" : "bob";
    if (!(d->coupling >= 0) || !std::isfinite(d->coupling)) throw ConfigError(std::string(who) + ".coupling must be >= 0");
    if (!std::isfinite(d->gap)) throw ConfigError(std::string(who) + ".gap must be finite");
    validate_switching(d->switching, who);
  }
  if (!(scenario.state.lambda_ir > 0)) throw ConfigError("state.lambda_ir must be positive");
  if (!(scenario.clip_margin >= 0)) throw ConfigError("state.clip_margin must be >= 0");
  try {
    scenario.quad.validate();
  } catch (const Error& e) {
    throw ConfigError(std::string("quadrature: ") + e.what());
  }
  if (sweep.values.empty()) throw ConfigError("sweep: no values");
  for (double v : sweep.values) {
    if (!std::isfinite(v)) throw ConfigError("sweep: values must be finite");
  }
  // every swept scenario must itself be valid
  for (double v : sweep.values) {
    const auto sc = at(v);
    if (!(sc.alice.position > 0)) throw ConfigError("sweep: x_A must stay positive");
    if (!(sc.bob.position > sc.alice.position)) throw ConfigError("sweep: R must stay positive");
    if (!(sc.state.lambda_ir > 0)) throw ConfigError("sweep: Lambda must stay positive");
    validate_switching(sc.alice.switching, "sweep");
    validate_switching(sc.bob.switching, "sweep");
  }
}

RunConfig parse_config(const json& j) {
  reject_unknown(j, "config", {"alice", "bob", "state", "quadrature", "sweep", "output"});
  RunConfig cfg = preset("fig2");
  cfg.output = OutputSpec{};
  auto& sc = cfg.scenario;

  if (j.contains("alice")) {
    const auto& a = j.at("alice");
    reject_unknown(a, "alice", {"gap", "coupling", "position", "switching"});
    read(a, "gap", sc.alice.gap, "alice");
    read(a, "coupling", sc.alice.coupling, "alice");
    read(a, "position", sc.alice.position, "alice");
    if (a.contains("switching")) sc.alice.switching = parse_switching(a.at("switching"), "alice.switching");
  }
  // Bob inherits Alice's switching unless told otherwise
  sc.bob.switching = sc.alice.switching;
  if (j.contains("bob")) {
    const auto& b = j.at("bob");
    reject_unknown(b, "bob", {"gap", "coupling", "separation", "position", "switching"});
    read(b, "gap", sc.bob.gap, "bob");
    read(b, "coupling", sc.bob.coupling, "bob");
    if (b.contains("separation") && b.contains("position")) {
      throw ConfigError("bob: give either separation or position, not both");
    }
    read(b, "separation", cfg.separation, "bob");
    if (b.contains("position")) {
      double pos = 0;
      read(b, "position", pos, "bob");
      cfg.separation = pos - sc.alice.position;
    }
    if (b.contains("switching")) sc.bob.switching = parse_switching(b.at("switching"), "bob.switching");
  }
  if (j.contains("state")) {
    const auto& s = j.at("state");
    reject_unknown(s, "state", {"kind", "lambda_ir", "gaussian_tail_policy", "clip_margin"});
    std::string kind = "firewall";
    read(s, "kind", kind, "state");
    if (kind == "firewall") {
      sc.state.kind = StateKind::Firewall;
    } else if (kind == "vacuum") {
      sc.state.kind = StateKind::Vacuum;
    } else {
      throw ConfigError("state.kind must be 'firewall' or 'vacuum'");
    }
    read(s, "lambda_ir", sc.state.lambda_ir, "state");
    std::string policy = "clip_to_valid";
    read(s, "gaussian_tail_policy", policy, "state");
    if (policy == "clip_to_valid") {
      sc.tail_policy = TailPolicy::ClipToValid;
    } else if (policy == "error") {
      sc.tail_policy = TailPolicy::Error;
    } else {
      throw ConfigError("state.gaussian_tail_policy must be 'clip_to_valid' or 'error'");
    }
    read(s, "clip_margin", sc.clip_margin, "state");
  }
  if (j.contains("quadrature")) {
    const auto& q = j.at("quadrature");
    reject_unknown(q, "quadrature", {"rel_tol", "abs_tol", "max_depth", "rule_order", "max_cells"});
    read(q, "rel_tol", sc.quad.rel_tol, "quadrature");
    read(q, "abs_tol", sc.quad.abs_tol, "quadrature");
    read(q, "max_depth", sc.quad.max_depth, "quadrature");
    read(q, "rule_order", sc.quad.rule_order, "quadrature");
    read(q, "max_cells", sc.quad.max_cells, "quadrature");
  }
  // without a sweep section the run is the single configured point
  cfg.sweep.values = {sc.alice.position};
  if (j.contains("sweep")) {
    const auto& w = j.at("sweep");
    reject_unknown(w, "sweep", {"axis", "values", "start", "stop", "count", "compare_vacuum"});
    std::string axis = "x_A";
    read(w, "axis", axis, "sweep");
    cfg.sweep.axis = parse_axis(axis);
    read(w, "compare_vacuum", cfg.sweep.compare_vacuum, "sweep");
    const bool has_grid = w.contains("start") || w.contains("stop") || w.contains("count");
    if (w.contains("values") && has_grid) throw ConfigError("sweep: give either values or start/stop/count");
    if (w.contains("values")) {
      read(w, "values", cfg.sweep.values, "sweep");
    } else if (has_grid) {
      if (!(w.contains("start") && w.contains("stop") && w.contains("count"))) {
        throw ConfigError("sweep: start, stop and count go together");
      }
      double start = 0;
      double stop = 0;
      int count = 0;
      read(w, "start", start, "sweep");
      read(w, "stop", stop, "sweep");
      read(w, "count", count, "sweep");
      cfg.sweep.values = SweepSpec::grid(start, stop, count);
    } else {
      cfg.sweep.values = {cfg.axis_value()};
    }
  }
  if (j.contains("output")) {
    const auto& o = j.at("output");
    reject_unknown(o, "output", {"csv", "json", "full_diagnostics"});
    read(o, "csv", cfg.output.csv, "output");
    read(o, "json", cfg.output.json, "output");
    read(o, "full_diagnostics", cfg.output.full_diagnostics, "output");
  }
  cfg.validate();
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  json j;
  try {
    j = json::parse(in, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::parse_error& e) {
    throw ConfigError("config " + path.string() + ": " + e.what());
  }
  return parse_config(j);
}

json to_json(const RunConfig& cfg) {
  const auto& sc = cfg.scenario;
  json j;
  j["alice"] = {{"gap", sc.alice.gap},
                {"coupling", sc.alice.coupling},
                {"position", sc.alice.position},
                {"switching", switching_json(sc.alice.switching)}};
  j["bob"] = {{"gap", sc.bob.gap},
              {"coupling", sc.bob.coupling},
              {"separation", cfg.separation},
              {"switching", switching_json(sc.bob.switching)}};
  j["state"] = {{"kind", sc.state.kind == StateKind::Firewall ? "firewall" : "vacuum"},
                {"lambda_ir", sc.state.lambda_ir},
                {"gaussian_tail_policy", sc.tail_policy == TailPolicy::ClipToValid ? "clip_to_valid" : "error"},
                {"clip_margin", sc.clip_margin}};
  j["quadrature"] = {{"rel_tol", sc.quad.rel_tol},
                     {"abs_tol", sc.quad.abs_tol},
                     {"max_depth", sc.quad.max_depth},
                     {"rule_order", sc.quad.rule_order},
                     {"max_cells", sc.quad.max_cells}};
  j["sweep"] = {{"axis", axis_name(cfg.sweep.axis)},
                {"values", cfg.sweep.values},
                {"compare_vacuum", cfg.sweep.compare_vacuum}};
  j["output"] = {{"csv", cfg.output.csv}, {"json", cfg.output.json}, {"full_diagnostics", cfg.output.full_diagnostics}};
  return j;
}

RunConfig preset(std::string_view name) {
  RunConfig cfg;
  auto& sc = cfg.scenario;
  sc.alice = DetectorParams<double>{1.0, 0.01, 0.9, SharpSwitching<double>{1.8}};
  sc.bob = sc.alice;
  sc.state = FieldStateSpec<double>{StateKind::Firewall, 1e-2};
  cfg.separation = 4;
  cfg.sweep.axis = SweepAxis::XA;
  cfg.sweep.compare_vacuum = true;
  if (name == "fig2") {
    cfg.sweep.values = SweepSpec::grid(0.05, 2.5, 60);
    cfg.output.csv = "fig2.csv";
  } else if (name == "fig3") {
    sc.alice.switching = GaussianSwitching<double>{2.0, 1.0, 6.0};
    sc.alice.position = 1.5;
    sc.bob = sc.alice;
    cfg.sweep.values = SweepSpec::grid(0.05, 4.0, 60);
    cfg.output.csv = "fig3.csv";
  } else {
    throw ConfigError("unknown preset '" + std::string(name) + "' (expected fig2 or fig3)");
  }
  sc.bob.position = sc.alice.position + cfg.separation;
  return cfg;
}

}  // namespace udw
