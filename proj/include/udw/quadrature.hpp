#ifndef UDW_QUADRATURE_HPP
#define UDW_QUADRATURE_HPP

// Adaptive cubature over rectangles and time-ordered wedges in the
// (tau, tau') plane for integrands that are smooth except on known straight
// lines.
//
// The domain is first cut along every supplied line, so each resulting patch
// has its singular or discontinuous loci on its boundary only. Rectangular
// patches are mapped affinely to the unit square, triangular ones by the
// collapsed (Duffy) map; a tensor Gauss-Legendre rule then samples strictly
// interior points. Cells are bisected one axis at a time, along the axis
// whose halving changes the estimate most, driven by a global error queue.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <queue>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "udw/cut_line.hpp"
#include "udw/errors.hpp"
#include "udw/gauss_legendre.hpp"

namespace udw {

template <typename Scalar>
struct QuadConfig {
  Scalar rel_tol = Scalar(1e-7);
  Scalar abs_tol = Scalar(1e-12);
  int max_depth = 30;
  /// Gauss-Legendre nodes per axis per cell.
  int rule_order = 15;
  /// Upper bound on the initial cell width along either axis.
  Scalar max_panel_width = std::numeric_limits<Scalar>::infinity();
  std::size_t max_cells = 100000;

  void validate() const {
    if (!(rel_tol > 0) || !(abs_tol > 0)) throw InvalidDomain("quadrature tolerances must be > 0");
    if (rule_order < 2) throw InvalidDomain("rule_order must be >= 2");
    if (max_depth < 1) throw InvalidDomain("max_depth must be >= 1");
    if (!(max_panel_width > 0)) throw InvalidDomain("max_panel_width must be > 0");
  }
};

/// tau in [a, b], tau' in [c, d]; LowerTriangle additionally keeps tau' <= tau.
template <typename Scalar>
struct IntegrationDomain {
  enum class Shape { Rectangle, LowerTriangle };

  Shape shape = Shape::Rectangle;
  Scalar a = 0, b = 1, c = 0, d = 1;

  static IntegrationDomain rectangle(Scalar a, Scalar b, Scalar c, Scalar d) {
    return {Shape::Rectangle, a, b, c, d};
  }
  static IntegrationDomain lower_triangle(Scalar a, Scalar b) {
    return {Shape::LowerTriangle, a, b, a, b};
  }
  static IntegrationDomain lower_triangle(Scalar a, Scalar b, Scalar c, Scalar d) {
    return {Shape::LowerTriangle, a, b, c, d};
  }

  void validate() const {
    if (!(a < b) || !(c < d)) throw InvalidDomain("degenerate integration interval");
  }
};

template <typename Scalar>
struct QuadResult {
  std::complex<Scalar> value{};
  Scalar error_estimate = 0;
  int panels_used = 0;
  bool converged = true;
};

namespace detail {

template <typename Scalar>
using Vec2 = Eigen::Matrix<Scalar, 2, 1>;

/// Map from the unit parameter square onto a rectangle or (collapsed) triangle.
template <typename Scalar>
struct Patch {
  Vec2<Scalar> origin;
  Vec2<Scalar> e1;
  Vec2<Scalar> e2;
  bool collapsed = false;
  Scalar det = 0;  // |det(e1, e2)|

  Vec2<Scalar> map(Scalar xi, Scalar eta) const {
    return collapsed ? Vec2<Scalar>(origin + xi * (e1 + eta * e2)) : Vec2<Scalar>(origin + xi * e1 + eta * e2);
  }
  Scalar jacobian(Scalar xi) const { return collapsed ? det * xi : det; }
  Scalar area() const { return collapsed ? det / 2 : det; }

  static Patch rectangle(Scalar x0, Scalar x1, Scalar y0, Scalar y1) {
    Patch p;
    p.origin = {x0, y0};
    p.e1 = {x1 - x0, Scalar(0)};
    p.e2 = {Scalar(0), y1 - y0};
    p.det = (x1 - x0) * (y1 - y0);
    return p;
  }

  /// Collapses onto `apex`; the opposite edge maps to xi = 1.
  static Patch triangle(const Vec2<Scalar>& apex, const Vec2<Scalar>& p1, const Vec2<Scalar>& p2) {
    Patch p;
    p.origin = apex;
    p.e1 = p1 - apex;
    p.e2 = p2 - p1;
    p.collapsed = true;
    p.det = std::abs(p.e1.x() * p.e2.y() - p.e1.y() * p.e2.x());
    return p;
  }
};

template <typename Scalar>
using Polygon = std::vector<Vec2<Scalar>>;

template <typename Scalar>
Scalar polygon_area(const Polygon<Scalar>& poly) {
  Scalar twice = 0;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const auto& p = poly[i];
    const auto& q = poly[(i + 1) % poly.size()];
    twice += p.x() * q.y() - q.x() * p.y();
  }
  return std::abs(twice) / 2;
}

/// Splits a convex polygon by tau - tau' = offset into the parts with
/// g <= 0 and g >= 0. Values within `tol` of the line count as on it.
template <typename Scalar>
std::array<Polygon<Scalar>, 2> split_by_difference(const Polygon<Scalar>& poly, Scalar offset,
                                                   Scalar tol) {
  std::array<Polygon<Scalar>, 2> out;
  const std::size_t n = poly.size();
  auto g = [&](const Vec2<Scalar>& p) {
    const Scalar v = p.x() - p.y() - offset;
    return std::abs(v) <= tol ? Scalar(0) : v;
  };
  for (std::size_t i = 0; i < n; ++i) {
    const auto& p = poly[i];
    const auto& q = poly[(i + 1) % n];
    const Scalar gp = g(p);
    const Scalar gq = g(q);
    if (gp <= 0) out[0].push_back(p);
    if (gp >= 0) out[1].push_back(p);
    if ((gp < 0 && gq > 0) || (gp > 0 && gq < 0)) {
      Vec2<Scalar> x;
      if (p.y() == q.y()) {
        x = {p.y() + offset, p.y()};
      } else if (p.x() == q.x()) {
        x = {p.x(), p.x() - offset};
      } else {
        x = p + (q - p) * (gp / (gp - gq));
      }
      out[0].push_back(x);
      out[1].push_back(x);
    }
  }
  return out;
}

/// Drops repeated and collinear vertices.
template <typename Scalar>
Polygon<Scalar> clean_polygon(const Polygon<Scalar>& poly, Scalar tol) {
  Polygon<Scalar> dedup;
  for (const auto& p : poly) {
    if (dedup.empty() || (p - dedup.back()).cwiseAbs().maxCoeff() > tol) dedup.push_back(p);
  }
  while (dedup.size() > 1 && (dedup.front() - dedup.back()).cwiseAbs().maxCoeff() <= tol) {
    dedup.pop_back();
  }
  bool changed = true;
  while (changed && dedup.size() > 2) {
    changed = false;
    for (std::size_t i = 0; i < dedup.size(); ++i) {
      const auto& a = dedup[(i + dedup.size() - 1) % dedup.size()];
      const auto& b = dedup[i];
      const auto& c = dedup[(i + 1) % dedup.size()];
      const Vec2<Scalar> u = b - a;
      const Vec2<Scalar> v = c - b;
      const Scalar cross = u.x() * v.y() - u.y() * v.x();
      if (std::abs(cross) <= tol * (u.norm() + v.norm())) {
        dedup.erase(dedup.begin() + static_cast<std::ptrdiff_t>(i));
        changed = true;
        break;
      }
    }
  }
  return dedup;
}

template <typename Scalar>
bool is_axis_rectangle(const Polygon<Scalar>& poly) {
  if (poly.size() != 4) return false;
  for (std::size_t i = 0; i < 4; ++i) {
    const auto& p = poly[i];
    const auto& q = poly[(i + 1) % 4];
    if (p.x() != q.x() && p.y() != q.y()) return false;
  }
  return true;
}

template <typename Scalar>
std::vector<Scalar> breakpoints(Scalar lo, Scalar hi, std::vector<Scalar> inner, Scalar max_width,
                                Scalar tol) {
  std::vector<Scalar> pts{lo};
  std::sort(inner.begin(), inner.end());
  for (Scalar x : inner) {
    if (x > lo + tol && x < hi - tol && x > pts.back() + tol) pts.push_back(x);
  }
  pts.push_back(hi);
  std::vector<Scalar> out{pts.front()};
  for (std::size_t i = 1; i < pts.size(); ++i) {
    const Scalar len = pts[i] - pts[i - 1];
    const auto pieces = static_cast<int>(std::ceil(len / max_width - Scalar(1e-12)));
    for (int k = 1; k < pieces; ++k) out.push_back(pts[i - 1] + len * Scalar(k) / Scalar(pieces));
    out.push_back(pts[i]);
  }
  return out;
}

/// Cuts the domain into patches whose interiors avoid every cut line.
template <typename Scalar>
std::vector<Patch<Scalar>> decompose(const IntegrationDomain<Scalar>& domain,
                                     std::span<const CutLine<Scalar>> cuts,
                                     const QuadConfig<Scalar>& cfg) {
  using Kind = typename CutLine<Scalar>::Kind;
  const Scalar scale = std::max({std::abs(domain.a), std::abs(domain.b), std::abs(domain.c),
                                 std::abs(domain.d), domain.b - domain.a, domain.d - domain.c});
  const Scalar tol = 64 * std::numeric_limits<Scalar>::epsilon() * scale;

  std::vector<Scalar> xcuts;
  std::vector<Scalar> ycuts;
  std::vector<Scalar> diagonals;
  for (const auto& line : cuts) {
    switch (line.kind) {
      case Kind::ConstTau: xcuts.push_back(line.offset); break;
      case Kind::ConstTauPrime: ycuts.push_back(line.offset); break;
      case Kind::ConstDifference: diagonals.push_back(line.offset); break;
    }
  }
  std::sort(diagonals.begin(), diagonals.end());
  diagonals.erase(std::unique(diagonals.begin(), diagonals.end()), diagonals.end());

  const auto xs = breakpoints(domain.a, domain.b, xcuts, cfg.max_panel_width, tol);
  const auto ys = breakpoints(domain.c, domain.d, ycuts, cfg.max_panel_width, tol);
  const bool wedge = domain.shape == IntegrationDomain<Scalar>::Shape::LowerTriangle;
  const Scalar min_area = tol * scale;

  std::vector<Patch<Scalar>> patches;
  for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
    for (std::size_t j = 0; j + 1 < ys.size(); ++j) {
      const Scalar x0 = xs[i], x1 = xs[i + 1], y0 = ys[j], y1 = ys[j + 1];
      Polygon<Scalar> rect{{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}};
      std::vector<Polygon<Scalar>> pieces;
      if (wedge) {
        pieces.push_back(clean_polygon(split_by_difference(rect, Scalar(0), tol)[1], tol));
      } else {
        pieces.push_back(rect);
      }
      for (Scalar offset : diagonals) {
        std::vector<Polygon<Scalar>> next;
        for (const auto& piece : pieces) {
          if (piece.size() < 3) continue;
          for (auto& part : split_by_difference(piece, offset, tol)) {
            part = clean_polygon(part, tol);
            if (part.size() >= 3 && polygon_area(part) > min_area) next.push_back(std::move(part));
          }
        }
        pieces = std::move(next);
      }
      for (const auto& piece : pieces) {
        if (piece.size() < 3 || polygon_area(piece) <= min_area) continue;
        if (is_axis_rectangle(piece)) {
          patches.push_back(Patch<Scalar>::rectangle(x0, x1, y0, y1));
          continue;
        }
        for (std::size_t k = 1; k + 1 < piece.size(); ++k) {
          std::array<Vec2<Scalar>, 3> tri{piece[0], piece[k], piece[k + 1]};
          // collapse onto the vertex opposite the longest edge
          std::size_t apex = 0;
          Scalar longest = -1;
          for (std::size_t m = 0; m < 3; ++m) {
            const Scalar len = (tri[(m + 1) % 3] - tri[(m + 2) % 3]).norm();
            if (len > longest) {
              longest = len;
              apex = m;
            }
          }
          auto patch = Patch<Scalar>::triangle(tri[apex], tri[(apex + 1) % 3], tri[(apex + 2) % 3]);
          if (patch.area() > min_area) patches.push_back(patch);
        }
      }
    }
  }
  return patches;
}

template <typename Scalar>
struct Box {
  Scalar x0, x1, y0, y1;
};

template <typename Scalar, int N, typename F>
Eigen::Matrix<std::complex<Scalar>, N, 1> apply_rule(const Patch<Scalar>& patch, const Box<Scalar>& box,
                                                     F& f, const GaussLegendreRule<Scalar>& rule) {
  using Value = Eigen::Matrix<std::complex<Scalar>, N, 1>;
  const Scalar hx = (box.x1 - box.x0) / 2;
  const Scalar mx = (box.x1 + box.x0) / 2;
  const Scalar hy = (box.y1 - box.y0) / 2;
  const Scalar my = (box.y1 + box.y0) / 2;
  Value sum = Value::Zero();
  const std::size_t n = rule.nodes.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Scalar xi = mx + hx * rule.nodes[i];
    Value row = Value::Zero();
    for (std::size_t j = 0; j < n; ++j) {
      const Scalar eta = my + hy * rule.nodes[j];
      const Vec2<Scalar> pt = patch.map(xi, eta);
      row += rule.weights[j] * Value(f(pt.x(), pt.y()));
    }
    sum += (rule.weights[i] * patch.jacobian(xi)) * row;
  }
  return sum * (hx * hy);
}

}  // namespace detail

/// Integrates a vector of N complex integrands sharing one adaptive mesh.
/// `f(tau, tau')` must return something convertible to
/// Eigen::Matrix<std::complex<Scalar>, N, 1>. Each component gets its own
/// error estimate and convergence flag.
template <typename Scalar, int N, typename F>
std::array<QuadResult<Scalar>, N> integrate_n(F&& f, const IntegrationDomain<Scalar>& domain,
                                              std::span<const CutLine<Scalar>> cuts,
                                              const QuadConfig<Scalar>& cfg) {
  using Value = Eigen::Matrix<std::complex<Scalar>, N, 1>;
  using Errors = Eigen::Array<Scalar, N, 1>;
  using detail::Box;

  cfg.validate();
  domain.validate();

  struct Cell {
    int patch;
    Box<Scalar> box;
    int depth;
    Value value;
    Errors err;
    int split_axis;
    std::array<Value, 2> halves;
    bool leaf;
  };

  const auto rule = gauss_legendre<Scalar>(cfg.rule_order);
  const auto patches = detail::decompose(domain, cuts, cfg);

  std::array<QuadResult<Scalar>, N> results{};
  if (patches.empty()) return results;

  std::vector<Cell> cells;
  cells.reserve(std::min<std::size_t>(cfg.max_cells, 4096));
  Errors scale = Errors::Constant(cfg.abs_tol);

  auto weighted = [&](const Errors& e) { return (e / scale).maxCoeff(); };

  // Estimates the error of `own` from both bisections and keeps the better
  // halving as the cell value.
  auto analyse = [&](Cell& cell, const Value& own) {
    const auto& b = cell.box;
    const Scalar xm = (b.x0 + b.x1) / 2;
    const Scalar ym = (b.y0 + b.y1) / 2;
    const auto& p = patches[static_cast<std::size_t>(cell.patch)];
    const Value qx0 = detail::apply_rule<Scalar, N>(p, {b.x0, xm, b.y0, b.y1}, f, rule);
    const Value qx1 = detail::apply_rule<Scalar, N>(p, {xm, b.x1, b.y0, b.y1}, f, rule);
    const Value qy0 = detail::apply_rule<Scalar, N>(p, {b.x0, b.x1, b.y0, ym}, f, rule);
    const Value qy1 = detail::apply_rule<Scalar, N>(p, {b.x0, b.x1, ym, b.y1}, f, rule);
    const Errors ex = (own - (qx0 + qx1)).cwiseAbs().array();
    const Errors ey = (own - (qy0 + qy1)).cwiseAbs().array();
    if (weighted(ex) >= weighted(ey)) {
      cell.split_axis = 0;
      cell.halves = {qx0, qx1};
    } else {
      cell.split_axis = 1;
      cell.halves = {qy0, qy1};
    }
    cell.value = cell.halves[0] + cell.halves[1];
    // Next to a log singularity on a cell edge, |coarse - fine| is about
    // the error of the fine value itself, so the plain difference is not
    // a safe bound. Doubling it is.
    cell.err = 2 * (ex + ey);
  };

  Value total = Value::Zero();
  Errors total_err = Errors::Zero();
  for (std::size_t k = 0; k < patches.size(); ++k) {
    Cell cell{static_cast<int>(k), {0, 1, 0, 1}, 0, Value::Zero(), Errors::Zero(), 0, {}, true};
    const Value own = detail::apply_rule<Scalar, N>(patches[k], cell.box, f, rule);
    analyse(cell, own);
    total += cell.value;
    total_err += cell.err;
    cells.push_back(cell);
  }
  scale = (cfg.rel_tol * total.cwiseAbs().array()).max(cfg.abs_tol);

  auto converged = [&](int k) {
    return total_err[k] <= std::max(cfg.rel_tol * std::abs(total[k]), cfg.abs_tol);
  };
  auto all_converged = [&] {
    for (int k = 0; k < N; ++k) {
      if (!converged(k)) return false;
    }
    return true;
  };

  using Entry = std::pair<Scalar, std::size_t>;
  auto cmp = [](const Entry& a, const Entry& b) {
    if (a.first != b.first) return a.first < b.first;
    return a.second > b.second;
  };
  std::priority_queue<Entry, std::vector<Entry>, decltype(cmp)> queue(cmp);
  for (std::size_t k = 0; k < cells.size(); ++k) queue.push({weighted(cells[k].err), k});

  while (!all_converged() && !queue.empty() && cells.size() + 2 <= cfg.max_cells) {
    const std::size_t idx = queue.top().second;
    queue.pop();
    if (cells[idx].depth >= cfg.max_depth) continue;
    const Cell parent = cells[idx];
    cells[idx].leaf = false;
    total -= parent.value;
    total_err -= parent.err;
    for (int side = 0; side < 2; ++side) {
      Box<Scalar> b = parent.box;
      if (parent.split_axis == 0) {
        const Scalar xm = (b.x0 + b.x1) / 2;
        (side == 0 ? b.x1 : b.x0) = xm;
      } else {
        const Scalar ym = (b.y0 + b.y1) / 2;
        (side == 0 ? b.y1 : b.y0) = ym;
      }
      Cell child{parent.patch, b, parent.depth + 1, Value::Zero(), Errors::Zero(), 0, {}, true};
      analyse(child, parent.halves[static_cast<std::size_t>(side)]);
      total += child.value;
      total_err += child.err;
      cells.push_back(child);
      queue.push({weighted(child.err), cells.size() - 1});
    }
  }

  // Canonical summation: leaves ordered by patch, then cell origin.
  std::vector<std::size_t> leaves;
  for (std::size_t k = 0; k < cells.size(); ++k) {
    if (cells[k].leaf) leaves.push_back(k);
  }
  std::sort(leaves.begin(), leaves.end(), [&](std::size_t i, std::size_t j) {
    const Cell& a = cells[i];
    const Cell& b = cells[j];
    if (a.patch != b.patch) return a.patch < b.patch;
    if (a.box.x0 != b.box.x0) return a.box.x0 < b.box.x0;
    return a.box.y0 < b.box.y0;
  });
  total = Value::Zero();
  total_err = Errors::Zero();
  for (std::size_t k : leaves) {
    total += cells[k].value;
    total_err += cells[k].err;
  }
  for (int k = 0; k < N; ++k) {
    results[k].value = total[k];
    results[k].error_estimate = total_err[k];
    results[k].panels_used = static_cast<int>(leaves.size());
    results[k].converged = converged(k);
  }
  return results;
}

/// Scalar-valued convenience wrapper around integrate_n.
template <typename Scalar, typename F>
QuadResult<Scalar> integrate(F&& f, const IntegrationDomain<Scalar>& domain,
                             std::span<const CutLine<Scalar>> cuts, const QuadConfig<Scalar>& cfg) {
  using Value = Eigen::Matrix<std::complex<Scalar>, 1, 1>;
  auto wrapped = [&f](Scalar t, Scalar tp) { return Value(std::complex<Scalar>(f(t, tp))); };
  return integrate_n<Scalar, 1>(wrapped, domain, cuts, cfg)[0];
}

}  // namespace udw

#endif  // UDW_QUADRATURE_HPP
