#ifndef UDW_ENTANGLEMENT_HPP
#define UDW_ENTANGLEMENT_HPP

#include <algorithm>
#include <array>
#include <cmath>

#include <Eigen/Eigenvalues>

#include "udw/density_matrix.hpp"
#include "udw/detector_model.hpp"
#include "udw/errors.hpp"

namespace udw {

template <typename Scalar>
struct NegativityResult {
  Scalar negativity = 0;
  /// Eigenvalues of the partial transpose, ascending.
  std::array<Scalar, 4> pt_eigenvalues{};
  /// 1/2 - <v|PT(rho - rho_Bell)|v> with v = (|eg> - |ge>)/sqrt(2).
  Scalar perturbative_negativity = 0;
  Scalar method_discrepancy = 0;
  bool closed_form = false;
};

/// Transposes Bob's factor: ((a,b),(a',b')) -> ((a,b'),(a',b)).
template <typename Scalar>
DensityMatrix4<Scalar> partial_transpose_b(const DensityMatrix4<Scalar>& rho) {
  DensityMatrix4<Scalar> out;
  for (int r = 0; r < 4; ++r) {
    for (int c = 0; c < 4; ++c) {
      out(basis_index(alice_bit(r), bob_bit(c)), basis_index(alice_bit(c), bob_bit(r))) = rho(r, c);
    }
  }
  return out;
}

namespace detail {

// Eigenvalues of [[p, z], [conj(z), q]] for real p, q.
template <typename Scalar>
std::array<Scalar, 2> hermitian_2x2_eigenvalues(Scalar p, Scalar q, std::complex<Scalar> z) {
  const Scalar mean = (p + q) / 2;
  const Scalar radius = std::hypot((p - q) / 2, std::abs(z));
  return {mean - radius, mean + radius};
}

}  // namespace detail

/// Eigenvalues of the partial transpose in ascending order. X-shaped inputs
/// use the two 2x2 blocks {gg, ee} and {eg, ge}; anything else goes through
/// a general Hermitian eigensolver.
template <typename Scalar>
std::array<Scalar, 4> pt_eigenvalues(const DensityMatrix4<Scalar>& rho, bool* closed_form = nullptr) {
  const DensityMatrix4<Scalar> pt = partial_transpose_b(rho);
  std::array<Scalar, 4> ev{};
  const bool x_state = is_x_shaped(pt);
  if (x_state) {
    const auto outer = detail::hermitian_2x2_eigenvalues(pt(kGG, kGG).real(), pt(kEE, kEE).real(), pt(kGG, kEE));
    const auto inner = detail::hermitian_2x2_eigenvalues(pt(kEG, kEG).real(), pt(kGE, kGE).real(), pt(kEG, kGE));
    ev = {outer[0], outer[1], inner[0], inner[1]};
    std::sort(ev.begin(), ev.end());
  } else {
    Eigen::SelfAdjointEigenSolver<DensityMatrix4<Scalar>> solver(pt, Eigen::EigenvaluesOnly);
    for (int i = 0; i < 4; ++i) ev[static_cast<std::size_t>(i)] = solver.eigenvalues()[i];
  }
  if (closed_form) *closed_form = x_state;
  return ev;
}

/// First-order estimate of the negativity around the Bell state.
template <typename Scalar>
Scalar perturbative_negativity(const DensityMatrix4<Scalar>& rho) {
  const DensityMatrix4<Scalar> delta = partial_transpose_b(DensityMatrix4<Scalar>(rho - initial_bell_state<Scalar>()));
  const Scalar shift =
      (delta(kEG, kEG) - delta(kEG, kGE) - delta(kGE, kEG) + delta(kGE, kGE)).real() / 2;
  return Scalar(0.5) - shift;
}

template <typename Scalar>
NegativityResult<Scalar> negativity(const DensityMatrix4<Scalar>& rho) {
  if (hermitian_defect(rho) > Scalar(1e-8)) throw NotHermitian("negativity of a non-Hermitian matrix");
  const DensityMatrix4<Scalar> h = hermitian_part(rho);
  NegativityResult<Scalar> out;
  out.pt_eigenvalues = pt_eigenvalues(h, &out.closed_form);
  for (Scalar e : out.pt_eigenvalues) out.negativity += std::max(Scalar(0), -e);
  out.perturbative_negativity = perturbative_negativity(h);
  out.method_discrepancy = std::abs(out.negativity - out.perturbative_negativity);
  return out;
}

}  // namespace udw

#endif  // UDW_ENTANGLEMENT_HPP
