#include <cmath>
#include <sstream>
#include <string>

#include "doctest.h"
#include "udw/config.hpp"
#include "udw/errors.hpp"
#include "udw/sweep.hpp"

using namespace udw;
using nlohmann::json;

namespace {

RunConfig parse(const char* text) { return parse_config(json::parse(text)); }

std::string first_line(const std::string& s) { return s.substr(0, s.find('\n')); }

}  // namespace

TEST_CASE("config defaults and inheritance") {
  const RunConfig cfg = parse(R"({"alice": {"position": 1.0}, "state": {"kind": "vacuum"}})");
  CHECK(cfg.scenario.alice.position == 1.0);
  CHECK(cfg.scenario.state.kind == StateKind::Vacuum);
  CHECK(cfg.separation == 4.0);
  CHECK(cfg.base().bob.position == 5.0);
  CHECK(std::holds_alternative<SharpSwitching<double>>(cfg.scenario.bob.switching));
  REQUIRE(cfg.sweep.values.size() == 1);
  CHECK(cfg.sweep.values[0] == 1.0);
  CHECK(cfg.output.csv == "-");

  const RunConfig g = parse(R"({"alice": {"switching": {"type": "gaussian", "center": 2, "width": 1}}})");
  const auto* bs = std::get_if<GaussianSwitching<double>>(&g.scenario.bob.switching);
  REQUIRE(bs != nullptr);
  CHECK(bs->window_sigmas == 6.0);
}

TEST_CASE("bob by position or separation") {
  CHECK(parse(R"({"alice": {"position": 0.5}, "bob": {"position": 3.0}})").separation == 2.5);
  CHECK(parse(R"({"bob": {"separation": 2.0}})").separation == 2.0);
  CHECK_THROWS_AS(parse(R"({"bob": {"separation": 2.0, "position": 3.0}})"), ConfigError);
}

TEST_CASE("config errors") {
  const char* bad[] = {
      R"({"alice": {"postion": 1.0}})",
      R"({"extra": {}})",
      R"({"state": {"kind": "thermal"}})",
      R"({"state": {"gaussian_tail_policy": "ignore"}})",
      R"({"alice": {"position": -1.0}})",
      R"({"alice": {"switching": {"type": "boxcar"}}})",
      R"({"alice": {"switching": {"type": "sharp", "duration": 0}}})",
      R"({"alice": {"switching": {"type": "gaussian", "window_sigmas": 2}}})",
      R"({"alice": {"gap": "one"}})",
      R"({"sweep": {"axis": "x_B"}})",
      R"({"sweep": {"start": 0.1, "stop": 1.0}})",
      R"({"sweep": {"values": [1.0], "count": 3, "start": 0.1, "stop": 1.0}})",
      R"({"sweep": {"axis": "sigma", "values": [1.0]}})",
      R"({"sweep": {"axis": "x_A", "values": [-0.5, 1.0]}})",
      R"({"state": {"lambda_ir": 0}})",
      R"({"quadrature": {"rule_order": 0}})",
  };
  for (const char* text : bad) {
    CAPTURE(text);
    CHECK_THROWS_AS(parse(text), ConfigError);
  }
  CHECK_THROWS_AS(load_config("/nonexistent/udw.json"), ConfigError);
  CHECK_THROWS_AS(preset("fig4"), ConfigError);
}

TEST_CASE("sweep grid and axis application") {
  const auto g = SweepSpec::grid(0.05, 2.5, 60);
  REQUIRE(g.size() == 60);
  CHECK(g.front() == 0.05);
  CHECK(g.back() == 2.5);
  CHECK(SweepSpec::grid(1.0, 2.0, 1) == std::vector<double>{1.0});

  RunConfig cfg = preset("fig2");
  CHECK(cfg.sweep.values.size() == 60);
  auto sc = cfg.at(1.3);
  CHECK(sc.alice.position == 1.3);
  CHECK(sc.bob.position == 5.3);

  cfg.sweep.axis = SweepAxis::R;
  CHECK(cfg.at(2.0).bob.position == cfg.scenario.alice.position + 2.0);
  cfg.sweep.axis = SweepAxis::T;
  CHECK(std::get<SharpSwitching<double>>(cfg.at(1.2).alice.switching).duration == 1.2);
  CHECK(std::get<SharpSwitching<double>>(cfg.at(1.2).bob.switching).duration == 1.2);
  cfg.sweep.axis = SweepAxis::Omega;
  CHECK(cfg.at(2.0).alice.gap == 2.0);
  CHECK(cfg.at(2.0).bob.gap == 2.0);
  cfg.sweep.axis = SweepAxis::Lambda;
  CHECK(cfg.at(0.5).state.lambda_ir == 0.5);

  RunConfig g3 = preset("fig3");
  g3.sweep.axis = SweepAxis::Sigma;
  CHECK(std::get<GaussianSwitching<double>>(g3.at(0.7).bob.switching).width == 0.7);
  g3.sweep.axis = SweepAxis::Tau0;
  CHECK(std::get<GaussianSwitching<double>>(g3.at(3.0).alice.switching).center == 3.0);

  for (const auto a : {SweepAxis::XA, SweepAxis::T, SweepAxis::Sigma, SweepAxis::Tau0, SweepAxis::R,
                       SweepAxis::Omega, SweepAxis::Lambda}) {
    CHECK(parse_axis(axis_name(a)) == a);
  }
}

TEST_CASE("config survives a round trip through JSON") {
  RunConfig cfg = preset("fig3");
  cfg.output.csv = "out/x.csv";
  const RunConfig back = parse_config(to_json(cfg));
  CHECK(back.sweep.values == cfg.sweep.values);
  CHECK(back.scenario.alice.position == cfg.scenario.alice.position);
  CHECK(back.output.csv == "out/x.csv");
  CHECK(to_json(back) == to_json(cfg));
}

TEST_CASE("csv header is exact") {
  CHECK(first_line(to_csv({})) == "axis_value,negativity_firewall,negativity_vacuum,deficit_fw,deficit_vac,quad_error,tail_flag");
}

TEST_CASE("single-point sweep matches run_point") {
  RunConfig cfg = preset("fig2");
  cfg.sweep.values = {0.9};
  const auto r = run_sweep(cfg, 1);
  REQUIRE(r.rows.size() == 1);
  const auto p = run_point(cfg.at(0.9), true);
  CHECK(p.status() == kExitOk);
  CHECK(r.rows[0].negativity_firewall == p.firewall->negativity.negativity);
  CHECK(r.rows[0].negativity_vacuum == p.vacuum->negativity.negativity);
  CHECK(r.rows[0].deficit_vac == 0.5 - p.vacuum->negativity.negativity);
  CHECK(r.rows[0].tail_flag == "none");
  CHECK(r.rows[0].quad_error > 0.0);
  CHECK(r.rows[0].quad_error < 1e-8);
}

TEST_CASE("vacuum-only runs leave the firewall column empty") {
  RunConfig cfg = parse(R"({"alice": {"position": 1.0}, "state": {"kind": "vacuum"}})");
  const auto r = run_sweep(cfg, 1);
  REQUIRE(r.rows.size() == 1);
  CHECK(std::isnan(r.rows[0].negativity_firewall));
  CHECK(r.rows[0].negativity_vacuum < 0.5);
  CHECK(r.status() == kExitOk);
}

TEST_CASE("failed points become nan rows with status 1") {
  RunConfig cfg = preset("fig3");
  cfg.scenario.tail_policy = TailPolicy::Error;
  cfg.sweep.values = {0.5, 7.0};
  const auto r = run_sweep(cfg, 2);
  REQUIRE(r.rows.size() == 2);
  CHECK(std::isnan(r.rows[0].negativity_firewall));
  CHECK(std::isnan(r.rows[0].deficit_fw));
  CHECK_FALSE(std::isnan(r.rows[0].negativity_vacuum));
  CHECK(r.points[0].status() == kExitValidation);
  // far enough right the whole Gaussian window has v > 0
  CHECK_FALSE(std::isnan(r.rows[1].negativity_firewall));
  CHECK(r.status() == kExitValidation);
  const std::string csv = to_csv(r.rows);
  CHECK(csv.find("5.000000000000000e-01,nan,") != std::string::npos);
  // the JSON sidecar writes null, not NaN
  const json j = sweep_json(cfg, r, false);
  CHECK(j["points"][0]["firewall"]["status"] == 1);
  CHECK(j.dump().find("NaN") == std::string::npos);
}

TEST_CASE("clip policy is flagged") {
  RunConfig cfg = preset("fig3");
  cfg.sweep.values = {0.5};
  const auto r = run_sweep(cfg, 1);
  CHECK(r.rows[0].tail_flag == "clipped");
  CHECK(r.points[0].firewall->clipped);
  CHECK_FALSE(r.points[0].vacuum->clipped);
}

TEST_CASE("csv does not depend on the worker count") {
  RunConfig cfg = preset("fig2");
  cfg.sweep.values = SweepSpec::grid(0.3, 2.1, 7);
  const std::string one = to_csv(run_sweep(cfg, 1).rows);
  const std::string four = to_csv(run_sweep(cfg, 4).rows);
  CHECK(one == four);
  std::istringstream lines(one);
  std::string line;
  int n = 0;
  while (std::getline(lines, line)) ++n;
  CHECK(n == 8);
}

TEST_CASE("full diagnostics table schema") {
  RunConfig cfg = preset("fig2");
  const auto p = run_point(cfg.at(0.9), true);
  const json j = point_json(p, true);
  const json& t = j["firewall"]["ij_table"];
  for (const char* nu : {"A", "B"}) {
    for (const char* eta : {"A", "B"}) {
      for (const char* k : {"I", "J"}) {
        for (const char* s : {"++", "+-", "-+", "--"}) {
          const json& e = t[nu][eta][k][s];
          CHECK(e.contains("re"));
          CHECK(e.contains("im"));
          CHECK(e["err"].get<double>() >= 0.0);
        }
      }
    }
  }
  CHECK_FALSE(point_json(p, false)["firewall"].contains("ij_table"));
}
