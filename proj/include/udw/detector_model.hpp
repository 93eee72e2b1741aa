#ifndef UDW_DETECTOR_MODEL_HPP
#define UDW_DETECTOR_MODEL_HPP

#include <cmath>
#include <type_traits>
#include <variant>

#include "udw/density_matrix.hpp"
#include "udw/field_state.hpp"

namespace udw {

/// Coupling on for tau in [0, duration].
template <typename Scalar>
struct SharpSwitching {
  Scalar duration;
};

/// exp(-(tau - center)^2 / width^2), truncated to center +- window_sigmas * width.
template <typename Scalar>
struct GaussianSwitching {
  Scalar center;
  Scalar width;
  Scalar window_sigmas = Scalar(6);
};

/// Detector never couples.
struct NoSwitching {};

template <typename Scalar>
using SwitchingSpec = std::variant<SharpSwitching<Scalar>, GaussianSwitching<Scalar>, NoSwitching>;

template <typename Scalar>
struct DetectorParams {
  Scalar gap = Scalar(1);
  Scalar coupling = Scalar(0.01);
  Scalar position = Scalar(1);
  SwitchingSpec<Scalar> switching = SharpSwitching<Scalar>{Scalar(1.8)};
};

template <typename Scalar>
struct Interval {
  Scalar lo;
  Scalar hi;

  bool empty() const { return !(lo < hi); }
  Scalar length() const { return empty() ? Scalar(0) : hi - lo; }
  bool contains(Scalar t) const { return lo <= t && t <= hi; }
};

/// Static worldline: proper time equals coordinate time.
template <typename Scalar>
SpacetimePoint<Scalar> worldline_point(const DetectorParams<Scalar>& d, Scalar tau) {
  return {tau - d.position, tau + d.position};
}

template <typename Scalar>
Scalar chi(const SwitchingSpec<Scalar>& s, Scalar tau) {
  return std::visit(
      [tau](const auto& sw) -> Scalar {
        using T = std::decay_t<decltype(sw)>;
        if constexpr (std::is_same_v<T, SharpSwitching<Scalar>>) {
          return heaviside(tau) * heaviside(Scalar(1) - tau / sw.duration);
        } else if constexpr (std::is_same_v<T, GaussianSwitching<Scalar>>) {
          const Scalar z = (tau - sw.center) / sw.width;
          if (std::abs(z) > sw.window_sigmas) return Scalar(0);
          return std::exp(-z * z);
        } else {
          return Scalar(0);
        }
      },
      s);
}

template <typename Scalar>
Interval<Scalar> support(const SwitchingSpec<Scalar>& s) {
  return std::visit(
      [](const auto& sw) -> Interval<Scalar> {
        using T = std::decay_t<decltype(sw)>;
        if constexpr (std::is_same_v<T, SharpSwitching<Scalar>>) {
          return {Scalar(0), sw.duration};
        } else if constexpr (std::is_same_v<T, GaussianSwitching<Scalar>>) {
          return {sw.center - sw.window_sigmas * sw.width, sw.center + sw.window_sigmas * sw.width};
        } else {
          return {Scalar(0), Scalar(0)};
        }
      },
      s);
}

/// Fraction of the total chi^2 mass lying outside `kept`. Zero for sharp
/// switching as long as `kept` covers [0, T].
template <typename Scalar>
Scalar neglected_chi2_mass(const SwitchingSpec<Scalar>& s, const Interval<Scalar>& kept) {
  return std::visit(
      [&kept](const auto& sw) -> Scalar {
        using T = std::decay_t<decltype(sw)>;
        if constexpr (std::is_same_v<T, SharpSwitching<Scalar>>) {
          const Scalar lo = std::max(kept.lo, Scalar(0));
          const Scalar hi = std::min(kept.hi, sw.duration);
          return Scalar(1) - std::max(hi - lo, Scalar(0)) / sw.duration;
        } else if constexpr (std::is_same_v<T, GaussianSwitching<Scalar>>) {
          // chi^2 is a normal density with standard deviation width / 2.
          if (kept.empty()) return Scalar(1);
          const Scalar s2 = std::sqrt(Scalar(2)) / sw.width;
          return (std::erfc(s2 * (sw.center - kept.lo)) + std::erfc(s2 * (kept.hi - sw.center))) /
                 2;
        } else {
          return Scalar(0);
        }
      },
      s);
}

/// (|gg> + |ee>)/sqrt(2) as a density matrix.
template <typename Scalar>
DensityMatrix4<Scalar> initial_bell_state() {
  DensityMatrix4<Scalar> rho = DensityMatrix4<Scalar>::Zero();
  rho(kGG, kGG) = rho(kGG, kEE) = rho(kEE, kGG) = rho(kEE, kEE) = Scalar(0.5);
  return rho;
}

}  // namespace udw

#endif  // UDW_DETECTOR_MODEL_HPP
