#ifndef UDW_SELFTEST_HPP
#define UDW_SELFTEST_HPP

#include <iosfwd>
#include <string>
#include <vector>

#include "udw/config.hpp"
#include "udw/oracle.hpp"

namespace udw {

struct CheckResult {
  enum class Status { Pass, Fail, Skip };
  std::string name;
  Status status = Status::Pass;
  std::string detail;
};

struct SelftestOptions {
  RunConfig config = preset("fig2");
  /// Adds the full dual-oracle comparison at both preset points.
  bool deep = false;
  /// Flips the sign of one J entry before assembly; the trace check must
  /// then fail. Used to demonstrate that the check has teeth.
  bool inject_fault = false;
  oracle::OracleConfig oracle{};
};

std::vector<CheckResult> run_selftest(const SelftestOptions& opt);

/// Prints one line per check and a summary; returns the exit code.
int report_selftest(std::ostream& os, const std::vector<CheckResult>& results);

/// Negativities at the two preset reference points, pinned after the
/// oracle comparison agreed. Compared with an absolute tolerance of 1e-5.
struct ReferenceValues {
  static constexpr double kTolerance = 1e-5;
  // sharp switching, x_A = 0.9
  static constexpr double fig2_vacuum = 0.4996041965;
  static constexpr double fig2_firewall = 0.4995985840;
  // Gaussian switching, x_A = 1.5
  static constexpr double fig3_vacuum = 0.4997750359;
  static constexpr double fig3_firewall = 0.4997570951;
};

/// Scenario of a preset at one x_A.
ScenarioConfig<double> preset_point(std::string_view name, double x_a);

}  // namespace udw

#endif  // UDW_SELFTEST_HPP
