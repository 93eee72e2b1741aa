#ifndef UDW_SWEEP_HPP
#define UDW_SWEEP_HPP

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "udw/config.hpp"
#include "udw/entanglement.hpp"
#include "udw/evolution.hpp"

namespace udw {

/// Process exit codes shared by every subcommand.
enum ExitCode : int {
  kExitOk = 0,
  kExitValidation = 1,
  kExitNotConverged = 2,
  kExitConfig = 3,
};

/// One field state evaluated at one parameter point.
struct StateReport {
  StateKind kind = StateKind::Vacuum;
  /// Empty when the evaluation threw before a state was produced.
  std::optional<FinalState<double>> final;
  NegativityResult<double> negativity{};
  /// Frobenius norm of the entrywise error bound on rho2; bounds the
  /// quadrature contribution to the negativity error.
  double quad_error = 0;
  bool clipped = false;
  /// Largest neglected chi^2 tail fraction over the two detectors.
  double neglected_mass = 0;
  int status = kExitOk;
  std::string message;

  bool ok() const { return status == kExitOk; }
};

struct PointReport {
  double axis_value = 0;
  ScenarioConfig<double> scenario;
  std::optional<StateReport> firewall;
  std::optional<StateReport> vacuum;

  int status() const;
};

struct SweepRow {
  double axis_value;
  double negativity_firewall;
  double negativity_vacuum;
  double deficit_fw;
  double deficit_vac;
  double quad_error;
  std::string tail_flag;
};

StateReport evaluate_state(const ScenarioConfig<double>& sc, StateKind kind);

/// Evaluates the configured state, plus the vacuum when the configuration
/// asks for the comparison. `only` restricts to a single state.
PointReport run_point(const ScenarioConfig<double>& sc, bool compare_vacuum, std::optional<StateKind> only = {});

SweepRow make_row(const PointReport& p);

struct SweepResult {
  std::vector<PointReport> points;
  std::vector<SweepRow> rows;

  int status() const;
};

/// Points run in parallel; results come back in grid order.
SweepResult run_sweep(const RunConfig& cfg, unsigned threads = worker_count());

inline constexpr const char* kCsvHeader =
    "axis_value,negativity_firewall,negativity_vacuum,deficit_fw,deficit_vac,quad_error,tail_flag";

std::string to_csv(const std::vector<SweepRow>& rows);

/// nu -> eta -> {I, J} -> sign pair -> {re, im, err}
nlohmann::json table_json(const IJTable<double>& table);
nlohmann::json point_json(const PointReport& p, bool full_diagnostics);
nlohmann::json sweep_json(const RunConfig& cfg, const SweepResult& r, bool full_diagnostics);

}  // namespace udw

#endif  // UDW_SWEEP_HPP
