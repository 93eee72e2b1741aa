#ifndef UDW_ORACLE_HPP
#define UDW_ORACLE_HPP

// Slow reference evaluation of the I/J integrals. Nothing in here goes
// through the adaptive quadrature engine or the closed-form limit in
// field_state.hpp; the point is to have a second, independent path.
//
//  (a) finite-epsilon Wightman function on a fixed graded tensor grid, for
//      several epsilons, extrapolated to epsilon = 0;
//  (b) Monte Carlo with the epsilon -> 0 kernel, skipping thin strips
//      around the singular lines.

#include <array>
#include <complex>
#include <cstdint>
#include <functional>
#include <vector>

#include "udw/evolution.hpp"
#include "udw/scenario.hpp"

namespace udw::oracle {

using cplx = std::complex<double>;
using Point = SpacetimePoint<double>;

struct OracleConfig {
  std::vector<double> epsilons{1e-3, 1e-4, 1e-5};
  std::uint64_t mc_samples = 10'000'000;
  std::uint64_t mc_seed = 0x5eed'0f'0ddbULL;
  /// Gauss-Legendre points per grid panel (a second pass uses order - 4).
  int grid_order = 12;
  /// Geometric grading ratio towards breakpoints.
  double grading_ratio = 0.2;
  /// Widest grid panel away from breakpoints.
  double max_panel = 0.25;
  /// Half-width of the Monte Carlo exclusion strips.
  double strip = 1e-9;

  void validate() const;
};

/// -(1/4pi) log[L^2 (eps + i du)(eps + i dv)], principal branch.
cplx w_vacuum_finite_eps(const Point& p, const Point& q, double lambda_ir, double eps);

/// Firewall correction with the same regularisation applied to its log:
/// (1/4pi) [theta(u) theta(-u') + theta(-u) theta(u')] log[L (eps + i (u - u'))].
/// Requires v, v' > 0.
cplx w_firewall_finite_eps(const Point& p, const Point& q, double lambda_ir, double eps);

/// Replacement kernels for test seams. `finite` is used by the grid path,
/// `limit` by Monte Carlo.
struct OracleKernel {
  std::function<cplx(const Point&, const Point&, double)> finite;
  std::function<cplx(const Point&, const Point&)> limit;
};

OracleKernel physical_kernel(const FieldStateSpec<double>& spec);

struct OracleEstimate {
  cplx extrapolated{};
  /// Extrapolation spread plus grid error.
  double extrapolation_uncertainty = 0;
  std::vector<cplx> per_epsilon;
  cplx monte_carlo{};
  double mc_standard_error = 0;

  /// The reference value reported to callers.
  cplx value() const { return extrapolated; }
  double uncertainty() const { return extrapolation_uncertainty; }
  double combined_uncertainty() const;
  double disagreement() const { return std::abs(extrapolated - monte_carlo); }
  bool paths_agree() const { return disagreement() <= 3 * combined_uncertainty(); }
};

/// Both oracle paths for the four sign variants of one (kind, nu, eta),
/// indexed by sign_index().
std::array<OracleEstimate, 4> oracle_block(IntegralKind kind, Detector nu, Detector eta,
                                           const ScenarioConfig<double>& sc, const OracleConfig& oc,
                                           const OracleKernel& kernel);
std::array<OracleEstimate, 4> oracle_block(IntegralKind kind, Detector nu, Detector eta,
                                           const ScenarioConfig<double>& sc, const OracleConfig& oc);

/// One entry. Throws OracleDisagreement when the two paths differ by more
/// than three combined standard errors.
OracleEstimate ij_via_oracle(IntegralKind kind, Detector nu, Detector eta, SignPair sp,
                             const ScenarioConfig<double>& sc, const OracleConfig& oc);

/// Only the Monte Carlo path, for variance studies.
std::array<OracleEstimate, 4> monte_carlo_block(IntegralKind kind, Detector nu, Detector eta,
                                                const ScenarioConfig<double>& sc, const OracleConfig& oc,
                                                const OracleKernel& kernel);

struct EntryComparison {
  IntegralKind kind;
  Detector nu;
  Detector eta;
  SignPair sp;
  QuadResult<double> fast;
  OracleEstimate oracle;

  double deviation() const { return std::abs(fast.value - oracle.value()); }
  double allowed() const;
  bool fast_agrees() const { return deviation() <= allowed(); }
  bool ok() const { return fast_agrees() && oracle.paths_agree(); }
};

/// Fast table against the oracle, all 32 entries.
std::vector<EntryComparison> compare_table(const ScenarioConfig<double>& sc, const IJTable<double>& fast,
                                           const OracleConfig& oc);

}  // namespace udw::oracle

#endif  // UDW_ORACLE_HPP
