#ifndef UDW_FIELD_STATE_HPP
#define UDW_FIELD_STATE_HPP

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "udw/cut_line.hpp"
#include "udw/errors.hpp"

namespace udw {

/// Point in lightcone coordinates u = t - x, v = t + x (c = 1).
template <typename Scalar>
struct SpacetimePoint {
  Scalar u;
  Scalar v;

  Scalar t() const { return (u + v) / 2; }
  Scalar x() const { return (v - u) / 2; }

  static SpacetimePoint from_cartesian(Scalar t, Scalar x) { return {t - x, t + x}; }
};

enum class StateKind { Vacuum, Firewall };

template <typename Scalar>
struct FieldStateSpec {
  StateKind kind = StateKind::Vacuum;
  /// Infrared cutoff, inverse length.
  Scalar lambda_ir = Scalar(1e-2);
};

/// A pulled-back Wightman value. `value` is meaningless when `regular` is
/// false (the pair sits on a logarithmic singular locus).
template <typename Scalar>
struct WightmanValue {
  std::complex<Scalar> value{};
  bool regular = true;

  static WightmanValue singular() { return {{}, false}; }
};

/// Heaviside step with the symmetric value 1/2 at the origin.
template <typename Scalar>
constexpr Scalar heaviside(Scalar x) {
  if (x > 0) return Scalar(1);
  if (x < 0) return Scalar(0);
  return Scalar(0.5);
}

template <typename Scalar>
constexpr Scalar signum(Scalar x) {
  if (x > 0) return Scalar(1);
  if (x < 0) return Scalar(-1);
  return Scalar(0);
}

/// Massless vacuum Wightman function in the epsilon -> 0+ limit:
///   W0 = -(1/4pi) [2 log L + log|du| + log|dv| + i pi/2 (sgn du + sgn dv)].
/// The imaginary part is computed as -(sgn du + sgn dv)/8 so it is exact.
template <typename Scalar>
WightmanValue<Scalar> w_vacuum(const SpacetimePoint<Scalar>& p, const SpacetimePoint<Scalar>& q,
                               const FieldStateSpec<Scalar>& spec) {
  using std::abs;
  using std::log;
  const Scalar du = p.u - q.u;
  const Scalar dv = p.v - q.v;
  if (du == 0 || dv == 0) return WightmanValue<Scalar>::singular();
  const Scalar inv_4pi = Scalar(1) / (4 * std::numbers::pi_v<Scalar>);
  const Scalar re = 2 * log(spec.lambda_ir) + log(abs(du)) + log(abs(dv));
  const Scalar im = -(signum(du) + signum(dv)) / 8;
  return {{-inv_4pi * re, im}, true};
}

/// Firewall correction to the Wightman function, valid for v > 0 and v' > 0.
/// Exactly zero when u and u' lie strictly on the same side of u = 0.
template <typename Scalar>
WightmanValue<Scalar> w_firewall_correction(const SpacetimePoint<Scalar>& p,
                                            const SpacetimePoint<Scalar>& q,
                                            const FieldStateSpec<Scalar>& spec) {
  using std::abs;
  using std::log;
  if (!(p.v > 0 && q.v > 0)) {
    throw DomainNotCovered("firewall correction requested with v <= 0");
  }
  const Scalar u = p.u;
  const Scalar up = q.u;
  const Scalar bracket = heaviside(u) * heaviside(-up) + heaviside(-u) * heaviside(up);
  if (bracket == 0) return {{Scalar(0), Scalar(0)}, true};
  if (u == up) return WightmanValue<Scalar>::singular();
  const Scalar inv_4pi = Scalar(1) / (4 * std::numbers::pi_v<Scalar>);
  return {{bracket * inv_4pi * log(spec.lambda_ir * abs(u - up)), bracket * signum(u - up) / 8},
          true};
}

template <typename Scalar>
WightmanValue<Scalar> w_total(const SpacetimePoint<Scalar>& p, const SpacetimePoint<Scalar>& q,
                              const FieldStateSpec<Scalar>& spec) {
  WightmanValue<Scalar> w = w_vacuum(p, q, spec);
  if (spec.kind == StateKind::Vacuum) return w;
  const WightmanValue<Scalar> dw = w_firewall_correction(p, q, spec);
  w.value += dw.value;
  w.regular = w.regular && dw.regular;
  return w;
}

/// Lines in the (tau, tau') plane where W[x_first(tau), x_second(tau')] is
/// not smooth, for static worldlines at `first` and `second`.
template <typename Scalar>
std::vector<CutLine<Scalar>> singular_loci(Scalar first, Scalar second,
                                           const FieldStateSpec<Scalar>& spec) {
  using Line = CutLine<Scalar>;
  // du = 0 also carries the log(|u - u'|) of the correction term.
  std::vector<Line> lines{Line::difference(first - second), Line::difference(second - first)};
  if (spec.kind == StateKind::Firewall) {
    lines.push_back(Line::tau(first));
    lines.push_back(Line::tau_prime(second));
  }
  return canonical_cuts(std::move(lines));
}

}  // namespace udw

#endif  // UDW_FIELD_STATE_HPP
