#ifndef UDW_EVOLUTION_HPP
#define UDW_EVOLUTION_HPP

// Second-order reduced state of two detectors initially in a Bell state.
//
// The time integrals come in two families, for detectors nu, eta and
// signs eps, delta:
//
//   I = int dtau int dtau'        chi_nu(tau') chi_eta(tau)
//         exp(i(eps W_nu tau' + delta W_eta tau)) W[x_eta(tau), x_nu(tau')]
//   J = int dtau int_{tau'<=tau}  chi_nu(tau) chi_eta(tau')
//         exp(i(eps W_nu tau + delta W_eta tau')) W[x_nu(tau), x_eta(tau')]
//
// (W_nu are the gaps.) Note the two families place the detectors in the
// Wightman slots in opposite orders; that asymmetry lives only in
// block_integrand() below.

#include <array>
#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "udw/density_matrix.hpp"
#include "udw/detector_model.hpp"
#include "udw/field_state.hpp"
#include "udw/parallel.hpp"
#include "udw/quadrature.hpp"
#include "udw/scenario.hpp"

namespace udw {

struct SignPair {
  int eps;
  int delta;
};

/// Order used for storage: ++, +-, -+, --.
inline constexpr std::array<SignPair, 4> kSignPairs{{{1, 1}, {1, -1}, {-1, 1}, {-1, -1}}};

constexpr int sign_index(SignPair sp) { return (sp.eps < 0 ? 2 : 0) + (sp.delta < 0 ? 1 : 0); }

enum class IntegralKind : int { I = 0, J = 1 };

template <typename Scalar>
using Kernel = std::function<std::complex<Scalar>(const SpacetimePoint<Scalar>&, const SpacetimePoint<Scalar>&)>;

/// The state's Wightman function as an integration kernel. Quadrature nodes
/// never sit on a singular locus, so reaching one is a logic error.
template <typename Scalar>
Kernel<Scalar> wightman_kernel(const FieldStateSpec<Scalar>& spec) {
  return [spec](const SpacetimePoint<Scalar>& p, const SpacetimePoint<Scalar>& q) {
    const auto w = w_total(p, q, spec);
    if (!w.regular) throw std::logic_error("Wightman kernel evaluated on a singular locus");
    return w.value;
  };
}

template <typename Scalar>
class IJTable {
 public:
  QuadResult<Scalar>& entry(IntegralKind kind, Detector nu, Detector eta, SignPair sp) {
    return entries_[index(kind, nu, eta, sp)];
  }
  const QuadResult<Scalar>& entry(IntegralKind kind, Detector nu, Detector eta, SignPair sp) const {
    return entries_[index(kind, nu, eta, sp)];
  }

  std::complex<Scalar> I(Detector nu, Detector eta, int eps, int delta) const {
    return entry(IntegralKind::I, nu, eta, {eps, delta}).value;
  }
  std::complex<Scalar> J(Detector nu, Detector eta, int eps, int delta) const {
    return entry(IntegralKind::J, nu, eta, {eps, delta}).value;
  }

  /// True when any entry failed to converge.
  bool degraded() const {
    for (const auto& e : entries_) {
      if (!e.converged) return true;
    }
    return false;
  }

  const std::array<QuadResult<Scalar>, 32>& entries() const { return entries_; }

  static std::size_t index(IntegralKind kind, Detector nu, Detector eta, SignPair sp) {
    return static_cast<std::size_t>(static_cast<int>(kind) * 16 + static_cast<int>(nu) * 8 +
                                    static_cast<int>(eta) * 4 + sign_index(sp));
  }

 private:
  std::array<QuadResult<Scalar>, 32> entries_{};
};

namespace detail {

template <typename Scalar>
using Block = Eigen::Matrix<std::complex<Scalar>, 4, 1>;

/// Integrand of the four sign variants of I^{nu,eta} or J^{nu,eta} at once.
/// For I the first variable belongs to eta, for J to nu.
template <typename Scalar>
auto block_integrand(IntegralKind kind, const DetectorParams<Scalar>& nu, const DetectorParams<Scalar>& eta,
                     const Kernel<Scalar>& kernel) {
  return [kind, &nu, &eta, &kernel](Scalar t, Scalar tp) -> Block<Scalar> {
    // (tau owner, tau' owner) and the gap multiplying eps / delta
    const auto& first = kind == IntegralKind::I ? eta : nu;
    const auto& second = kind == IntegralKind::I ? nu : eta;
    const Scalar envelope = chi(first.switching, t) * chi(second.switching, tp);
    Block<Scalar> out = Block<Scalar>::Zero();
    if (envelope == 0) return out;
    const std::complex<Scalar> w =
        envelope * kernel(worldline_point(first, t), worldline_point(second, tp));
    // exp(i Omega_nu s_nu) and exp(i Omega_eta s_eta), where s_nu is the
    // time argument attached to detector nu
    const Scalar s_nu = kind == IntegralKind::I ? tp : t;
    const Scalar s_eta = kind == IntegralKind::I ? t : tp;
    const std::complex<Scalar> a = std::polar(Scalar(1), nu.gap * s_nu);
    const std::complex<Scalar> b = std::polar(Scalar(1), eta.gap * s_eta);
    const std::complex<Scalar> wa = w * a;
    const std::complex<Scalar> wac = w * std::conj(a);
    out[sign_index({1, 1})] = wa * b;
    out[sign_index({1, -1})] = wa * std::conj(b);
    out[sign_index({-1, 1})] = wac * b;
    out[sign_index({-1, -1})] = wac * std::conj(b);
    return out;
  };
}

template <typename Scalar>
QuadConfig<Scalar> oscillation_capped(const ScenarioConfig<Scalar>& sc) {
  QuadConfig<Scalar> cfg = sc.quad;
  const Scalar omega = std::max(std::abs(sc.alice.gap), std::abs(sc.bob.gap));
  if (omega > 0) {
    cfg.max_panel_width = std::min(cfg.max_panel_width, 2 * std::numbers::pi_v<Scalar> / (5 * omega));
  }
  return cfg;
}

}  // namespace detail

/// The four sign variants of one (kind, nu, eta) integral, indexed by
/// sign_index(). They share kernel evaluations and one adaptive mesh.
template <typename Scalar>
std::array<QuadResult<Scalar>, 4> compute_block(IntegralKind kind, Detector nu, Detector eta,
                                                const ScenarioConfig<Scalar>& sc, const Kernel<Scalar>& kernel) {
  const auto& dnu = sc.detector(nu);
  const auto& deta = sc.detector(eta);
  const Detector first = kind == IntegralKind::I ? eta : nu;
  const Detector second = kind == IntegralKind::I ? nu : eta;
  const auto w1 = integration_window(sc, first);
  const auto w2 = integration_window(sc, second);
  std::array<QuadResult<Scalar>, 4> zero{};
  if (w1.range.empty() || w2.range.empty()) return zero;

  using Domain = IntegrationDomain<Scalar>;
  Domain domain = kind == IntegralKind::I
                      ? Domain::rectangle(w1.range.lo, w1.range.hi, w2.range.lo, w2.range.hi)
                      : Domain::lower_triangle(w1.range.lo, w1.range.hi, w2.range.lo, w2.range.hi);
  // empty wedge: every tau' exceeds every tau
  if (kind == IntegralKind::J && !(w2.range.lo < w1.range.hi)) return zero;

  const auto cuts = singular_loci(sc.detector(first).position, sc.detector(second).position, sc.state);
  return integrate_n<Scalar, 4>(detail::block_integrand(kind, dnu, deta, kernel), domain,
                                std::span<const CutLine<Scalar>>(cuts), detail::oscillation_capped(sc));
}

template <typename Scalar>
std::array<QuadResult<Scalar>, 4> compute_block(IntegralKind kind, Detector nu, Detector eta,
                                                const ScenarioConfig<Scalar>& sc) {
  return compute_block(kind, nu, eta, sc, wightman_kernel(sc.state));
}

template <typename Scalar>
QuadResult<Scalar> compute_I(Detector nu, Detector eta, SignPair sp, const ScenarioConfig<Scalar>& sc,
                             const Kernel<Scalar>& kernel) {
  return compute_block(IntegralKind::I, nu, eta, sc, kernel)[sign_index(sp)];
}

template <typename Scalar>
QuadResult<Scalar> compute_I(Detector nu, Detector eta, SignPair sp, const ScenarioConfig<Scalar>& sc) {
  return compute_I(nu, eta, sp, sc, wightman_kernel(sc.state));
}

template <typename Scalar>
QuadResult<Scalar> compute_J(Detector nu, Detector eta, SignPair sp, const ScenarioConfig<Scalar>& sc,
                             const Kernel<Scalar>& kernel) {
  return compute_block(IntegralKind::J, nu, eta, sc, kernel)[sign_index(sp)];
}

template <typename Scalar>
QuadResult<Scalar> compute_J(Detector nu, Detector eta, SignPair sp, const ScenarioConfig<Scalar>& sc) {
  return compute_J(nu, eta, sp, sc, wightman_kernel(sc.state));
}

/// All 32 entries; the eight blocks run in parallel.
template <typename Scalar>
IJTable<Scalar> compute_table(const ScenarioConfig<Scalar>& sc, const Kernel<Scalar>& kernel) {
  IJTable<Scalar> table;
  std::array<std::array<QuadResult<Scalar>, 4>, 8> blocks;
  auto decode = [](std::size_t b) {
    return std::tuple{static_cast<IntegralKind>(b / 4), static_cast<Detector>((b / 2) % 2),
                      static_cast<Detector>(b % 2)};
  };
  parallel_for(blocks.size(), [&](std::size_t b) {
    const auto [kind, nu, eta] = decode(b);
    blocks[b] = compute_block(kind, nu, eta, sc, kernel);
  });
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    const auto [kind, nu, eta] = decode(b);
    for (const auto sp : kSignPairs) table.entry(kind, nu, eta, sp) = blocks[b][sign_index(sp)];
  }
  return table;
}

template <typename Scalar>
IJTable<Scalar> compute_table(const ScenarioConfig<Scalar>& sc) {
  return compute_table(sc, wightman_kernel(sc.state));
}

namespace detail {

template <typename Scalar>
struct ValueAlgebra {
  using T = std::complex<Scalar>;
  static T neg(const T& x) { return -x; }
  static T cj(const T& x) { return std::conj(x); }
  static T re2(const T& x) { return T(2 * x.real(), 0); }
  static T get(const QuadResult<Scalar>& r) { return r.value; }
};

/// Propagates absolute error bounds through the same linear combination.
template <typename Scalar>
struct BoundAlgebra {
  using T = Scalar;
  static T neg(const T& x) { return x; }
  static T cj(const T& x) { return x; }
  static T re2(const T& x) { return 2 * x; }
  static T get(const QuadResult<Scalar>& r) { return r.error_estimate; }
};

/// lambda_A^2 rho_AA + lambda_B^2 rho_BB + lambda_A lambda_B rho_AB.
template <typename Scalar, typename Alg>
Eigen::Matrix<typename Alg::T, 4, 4> assemble(const IJTable<Scalar>& tab, Scalar lambda_a, Scalar lambda_b) {
  using T = typename Alg::T;
  using M = Eigen::Matrix<T, 4, 4>;
  constexpr auto A = Detector::A;
  constexpr auto B = Detector::B;
  auto I = [&](Detector nu, Detector eta, int e, int d) {
    return Alg::get(tab.entry(IntegralKind::I, nu, eta, {e, d}));
  };
  auto J = [&](Detector nu, Detector eta, int e, int d) {
    return Alg::get(tab.entry(IntegralKind::J, nu, eta, {e, d}));
  };
  auto cj = [](const T& x) { return Alg::cj(x); };
  auto neg = [](const T& x) { return Alg::neg(x); };
  auto re2 = [](const T& x) { return Alg::re2(x); };

  M aa = M::Zero();
  aa(0, 0) = neg(re2(J(A, A, -1, 1)));
  aa(0, 3) = neg(J(A, A, -1, 1)) + neg(cj(J(A, A, 1, -1)));
  aa(1, 1) = I(A, A, 1, -1);
  aa(1, 2) = I(A, A, 1, 1);
  aa(2, 1) = I(A, A, -1, -1);
  aa(2, 2) = I(A, A, -1, 1);
  aa(3, 0) = neg(J(A, A, 1, -1)) + neg(cj(J(A, A, -1, 1)));
  aa(3, 3) = neg(re2(J(A, A, 1, -1)));

  M bb = M::Zero();
  bb(0, 0) = neg(re2(J(B, B, -1, 1)));
  bb(0, 3) = neg(J(B, B, -1, 1)) + neg(cj(J(B, B, 1, -1)));
  bb(1, 1) = I(B, B, -1, 1);
  bb(1, 2) = I(B, B, -1, -1);
  bb(2, 1) = I(B, B, 1, 1);
  bb(2, 2) = I(B, B, 1, -1);
  bb(3, 0) = neg(J(B, B, 1, -1)) + neg(cj(J(B, B, -1, 1)));
  bb(3, 3) = neg(re2(J(B, B, 1, -1)));

  M ab = M::Zero();
  ab(0, 0) = neg(re2(J(A, B, -1, -1))) + neg(re2(J(B, A, -1, -1)));
  ab(0, 3) = neg(J(A, B, -1, -1)) + neg(J(B, A, -1, -1)) + neg(cj(J(A, B, 1, 1))) + neg(cj(J(B, A, 1, 1)));
  ab(1, 1) = I(A, B, 1, 1) + I(B, A, -1, -1);
  ab(1, 2) = I(A, B, 1, -1) + I(B, A, -1, 1);
  ab(2, 1) = I(A, B, -1, 1) + I(B, A, 1, -1);
  ab(2, 2) = I(A, B, -1, -1) + I(B, A, 1, 1);
  ab(3, 0) = neg(J(A, B, 1, 1)) + neg(J(B, A, 1, 1)) + neg(cj(J(A, B, -1, -1))) + neg(cj(J(B, A, -1, -1)));
  ab(3, 3) = neg(re2(J(A, B, 1, 1))) + neg(re2(J(B, A, 1, 1)));

  const Scalar caa = lambda_a * lambda_a / 2;
  const Scalar cbb = lambda_b * lambda_b / 2;
  const Scalar cab = std::abs(lambda_a * lambda_b) / 2;
  const Scalar sab = lambda_a * lambda_b >= 0 ? cab : -cab;
  if constexpr (std::is_same_v<T, Scalar>) {
    return M(caa * aa + cbb * bb + cab * ab);
  } else {
    return M(caa * aa + cbb * bb + sab * ab);
  }
}

}  // namespace detail

/// Second-order correction before Hermitian symmetrisation.
template <typename Scalar>
DensityMatrix4<Scalar> assemble_rho2_unsymmetrized(const IJTable<Scalar>& tab, Scalar lambda_a, Scalar lambda_b) {
  return detail::assemble<Scalar, detail::ValueAlgebra<Scalar>>(tab, lambda_a, lambda_b);
}

template <typename Scalar>
DensityMatrix4<Scalar> assemble_rho2(const IJTable<Scalar>& tab, Scalar lambda_a, Scalar lambda_b) {
  return hermitian_part(assemble_rho2_unsymmetrized(tab, lambda_a, lambda_b));
}

/// Entrywise absolute error bound on assemble_rho2 implied by the
/// quadrature error estimates.
template <typename Scalar>
RealMatrix4<Scalar> rho2_error_bound(const IJTable<Scalar>& tab, Scalar lambda_a, Scalar lambda_b) {
  return detail::assemble<Scalar, detail::BoundAlgebra<Scalar>>(tab, lambda_a, lambda_b);
}

template <typename Scalar>
struct FinalState {
  DensityMatrix4<Scalar> rho;
  DensityMatrix4<Scalar> rho2;
  RealMatrix4<Scalar> rho2_bound;
  IJTable<Scalar> table;
  /// 10x the summed diagonal error bounds, plus a rounding floor.
  Scalar trace_budget = 0;
  Scalar trace_defect = 0;
};

/// Floor for comparisons that would otherwise demand exact cancellation.
template <typename Scalar>
constexpr Scalar rounding_floor() {
  return Scalar(1e3) * std::numeric_limits<Scalar>::epsilon();
}

template <typename Scalar>
FinalState<Scalar> final_state_from_table(IJTable<Scalar> table, Scalar lambda_a, Scalar lambda_b) {
  FinalState<Scalar> out;
  const DensityMatrix4<Scalar> raw = assemble_rho2_unsymmetrized(table, lambda_a, lambda_b);
  out.rho2_bound = rho2_error_bound(table, lambda_a, lambda_b);
  const Scalar scale = raw.cwiseAbs().maxCoeff();
  const RealMatrix4<Scalar> allowed =
      (10 * (out.rho2_bound + out.rho2_bound.transpose())).array() + rounding_floor<Scalar>() * scale;
  if (((raw - raw.adjoint()).cwiseAbs() - allowed).maxCoeff() > 0) {
    throw NotHermitian("second-order block asymmetry exceeds the quadrature error budget");
  }
  out.rho2 = hermitian_part(raw);
  out.rho = initial_bell_state<Scalar>() + out.rho2;
  out.table = std::move(table);
  out.trace_budget = 10 * out.rho2_bound.diagonal().sum() + rounding_floor<Scalar>() * scale;
  // the Bell part has unit trace exactly, so the defect is the trace of rho2
  out.trace_defect = std::abs(out.rho2.trace());
  if (!(out.trace_defect <= out.trace_budget)) {
    throw TraceViolation("trace of the final state deviates from 1 beyond the quadrature budget");
  }
  return out;
}

template <typename Scalar>
FinalState<Scalar> final_state(const ScenarioConfig<Scalar>& sc, const Kernel<Scalar>& kernel) {
  return final_state_from_table(compute_table(sc, kernel), sc.alice.coupling, sc.bob.coupling);
}

template <typename Scalar>
FinalState<Scalar> final_state(const ScenarioConfig<Scalar>& sc) {
  return final_state(sc, wightman_kernel(sc.state));
}

}  // namespace udw

#endif  // UDW_EVOLUTION_HPP
