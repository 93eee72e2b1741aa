#ifndef UDW_SCENARIO_HPP
#define UDW_SCENARIO_HPP

#include <algorithm>
#include <string>

#include "udw/detector_model.hpp"
#include "udw/field_state.hpp"
#include "udw/quadrature.hpp"

namespace udw {

enum class Detector : int { A = 0, B = 1 };

/// What to do when a switching window reaches v <= 0, where the firewall
/// correction is not available.
enum class TailPolicy {
  ClipToValid,  // intersect the window with tau > -x + margin
  Error,        // refuse with DomainNotCovered
};

template <typename Scalar>
struct ScenarioConfig {
  DetectorParams<Scalar> alice{};
  DetectorParams<Scalar> bob{Scalar(1), Scalar(0.01), Scalar(5), SharpSwitching<Scalar>{Scalar(1.8)}};
  FieldStateSpec<Scalar> state{};
  QuadConfig<Scalar> quad{};
  TailPolicy tail_policy = TailPolicy::ClipToValid;
  Scalar clip_margin = Scalar(0);

  const DetectorParams<Scalar>& detector(Detector d) const { return d == Detector::A ? alice : bob; }
  DetectorParams<Scalar>& detector(Detector d) { return d == Detector::A ? alice : bob; }
};

/// The tau range actually integrated for one detector.
template <typename Scalar>
struct IntegrationWindow {
  Interval<Scalar> range;
  bool clipped = false;
  /// Fraction of the chi^2 mass left outside `range`.
  Scalar neglected_mass = 0;
};

template <typename Scalar>
IntegrationWindow<Scalar> integration_window(const ScenarioConfig<Scalar>& sc, Detector which) {
  const auto& det = sc.detector(which);
  IntegrationWindow<Scalar> w{support(det.switching)};
  if (w.range.empty()) return w;
  if (sc.state.kind == StateKind::Firewall) {
    // the firewall correction needs v = tau + x > 0
    const Scalar lowest = -det.position + sc.clip_margin;
    if (w.range.lo < lowest) {
      if (sc.tail_policy == TailPolicy::Error) {
        throw DomainNotCovered("switching window of detector " +
                               std::string(which == Detector::A ? "A" : "B") +
                               " extends into v <= 0");
      }
      w.range.lo = std::min(lowest, w.range.hi);
      w.clipped = true;
    }
  }
  w.neglected_mass = neglected_chi2_mass(det.switching, w.range);
  return w;
}

}  // namespace udw

#endif  // UDW_SCENARIO_HPP
