#ifndef UDW_CONFIG_HPP
#define UDW_CONFIG_HPP

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "udw/scenario.hpp"

namespace udw {

/// Parameter a sweep varies. Bob always sits at x_A + R.
enum class SweepAxis { XA, T, Sigma, Tau0, R, Omega, Lambda };

std::string_view axis_name(SweepAxis a);
SweepAxis parse_axis(std::string_view name);

struct SweepSpec {
  SweepAxis axis = SweepAxis::XA;
  std::vector<double> values;
  /// Also run the vacuum at every point when the main state is the firewall.
  bool compare_vacuum = true;

  static std::vector<double> grid(double start, double stop, int count);
};

struct OutputSpec {
  /// CSV destination; "-" is stdout.
  std::string csv = "-";
  /// JSON sidecar; empty means none unless full diagnostics are requested.
  std::string json;
  bool full_diagnostics = false;
};

struct RunConfig {
  ScenarioConfig<double> scenario;
  /// R = x_B - x_A.
  double separation = 4;
  SweepSpec sweep;
  OutputSpec output;

  /// The scenario with the sweep axis set to `value`.
  ScenarioConfig<double> at(double value) const;
  /// The scenario as written (axis untouched), with Bob placed at x_A + R.
  ScenarioConfig<double> base() const;
  /// Current value of the sweep axis in the base scenario.
  double axis_value() const;

  void validate() const;
};

/// Reads the {alice, bob, state, quadrature, sweep, output} tree. Missing
/// keys keep the sharp-switching preset values; unknown keys are an error.
RunConfig parse_config(const nlohmann::json& j);
RunConfig load_config(const std::filesystem::path& path);
nlohmann::json to_json(const RunConfig& cfg);

/// "fig2" (sharp switching) or "fig3" (Gaussian switching).
RunConfig preset(std::string_view name);

}  // namespace udw

#endif  // UDW_CONFIG_HPP
