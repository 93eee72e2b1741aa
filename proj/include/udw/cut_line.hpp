#ifndef UDW_CUT_LINE_HPP
#define UDW_CUT_LINE_HPP

#include <algorithm>
#include <vector>

namespace udw {

/// A straight line in the (tau, tau') plane across which an integrand may
/// be singular or discontinuous.
template <typename Scalar>
struct CutLine {
  enum class Kind { ConstTau, ConstTauPrime, ConstDifference };

  Kind kind;
  /// tau = offset, tau' = offset, or tau - tau' = offset.
  Scalar offset;

  static CutLine tau(Scalar at) { return {Kind::ConstTau, at}; }
  static CutLine tau_prime(Scalar at) { return {Kind::ConstTauPrime, at}; }
  static CutLine difference(Scalar at) { return {Kind::ConstDifference, at}; }

  friend bool operator==(const CutLine& a, const CutLine& b) {
    return a.kind == b.kind && a.offset == b.offset;
  }
  friend bool operator<(const CutLine& a, const CutLine& b) {
    if (a.kind != b.kind) return a.kind < b.kind;
    return a.offset < b.offset;
  }
};

/// Sorts and removes exact duplicates.
template <typename Scalar>
std::vector<CutLine<Scalar>> canonical_cuts(std::vector<CutLine<Scalar>> cuts) {
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  return cuts;
}

}  // namespace udw

#endif  // UDW_CUT_LINE_HPP
