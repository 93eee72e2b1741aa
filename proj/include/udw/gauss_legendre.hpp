#ifndef UDW_GAUSS_LEGENDRE_HPP
#define UDW_GAUSS_LEGENDRE_HPP

#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

namespace udw {

template <typename Scalar>
struct GaussLegendreRule {
  std::vector<Scalar> nodes;    // ascending, in (-1, 1)
  std::vector<Scalar> weights;  // sum to 2
};

/// n-point Gauss-Legendre rule by Newton iteration on the three-term
/// recurrence.
template <typename Scalar>
GaussLegendreRule<Scalar> gauss_legendre(int n) {
  GaussLegendreRule<Scalar> rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  const Scalar pi = std::numbers::pi_v<Scalar>;
  for (int i = 0; i < (n + 1) / 2; ++i) {
    Scalar x = std::cos(pi * (Scalar(i) + Scalar(0.75)) / (Scalar(n) + Scalar(0.5)));
    Scalar dp = 0;
    for (int iter = 0; iter < 100; ++iter) {
      Scalar p0 = 1;
      Scalar p1 = x;
      for (int k = 2; k <= n; ++k) {
        const Scalar pk = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = pk;
      }
      dp = n * (x * p1 - p0) / (x * x - 1);
      const Scalar dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) <= 4 * std::numeric_limits<Scalar>::epsilon()) {
        // one more pass to refresh the derivative at the converged node
        p0 = 1;
        p1 = x;
        for (int k = 2; k <= n; ++k) {
          const Scalar pk = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
          p0 = p1;
          p1 = pk;
        }
        dp = n * (x * p1 - p0) / (x * x - 1);
        break;
      }
    }
    const Scalar w = 2 / ((1 - x * x) * dp * dp);
    rule.nodes[i] = -x;
    rule.nodes[n - 1 - i] = x;
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) rule.nodes[n / 2] = 0;
  return rule;
}

}  // namespace udw

#endif  // UDW_GAUSS_LEGENDRE_HPP
