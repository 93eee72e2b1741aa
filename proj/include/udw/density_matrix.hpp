#ifndef UDW_DENSITY_MATRIX_HPP
#define UDW_DENSITY_MATRIX_HPP

#include <complex>

#include <Eigen/Dense>

namespace udw {

// Two-qubit basis ordering {gg, eg, ge, ee}; the first label is Alice.
// Index of |a b> is a + 2 b with a, b in {0 = g, 1 = e}.
enum BasisIndex : int { kGG = 0, kEG = 1, kGE = 2, kEE = 3 };

constexpr int basis_index(int alice, int bob) { return alice + 2 * bob; }
constexpr int alice_bit(int index) { return index & 1; }
constexpr int bob_bit(int index) { return index >> 1; }

template <typename Scalar>
using DensityMatrix4 = Eigen::Matrix<std::complex<Scalar>, 4, 4>;

template <typename Scalar>
using RealMatrix4 = Eigen::Matrix<Scalar, 4, 4>;

/// Largest entrywise |rho - rho^dagger|.
template <typename Scalar>
Scalar hermitian_defect(const DensityMatrix4<Scalar>& rho) {
  return (rho - rho.adjoint()).cwiseAbs().maxCoeff();
}

template <typename Scalar>
DensityMatrix4<Scalar> hermitian_part(const DensityMatrix4<Scalar>& rho) {
  return (rho + rho.adjoint()) * Scalar(0.5);
}

/// True when only the diagonal and anti-diagonal carry weight.
template <typename Scalar>
bool is_x_shaped(const DensityMatrix4<Scalar>& rho, Scalar tol = Scalar(0)) {
  for (int r = 0; r < 4; ++r) {
    for (int c = 0; c < 4; ++c) {
      if (r == c || r + c == 3) continue;
      if (std::abs(rho(r, c)) > tol) return false;
    }
  }
  return true;
}

}  // namespace udw

#endif  // UDW_DENSITY_MATRIX_HPP
