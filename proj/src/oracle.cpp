#include "udw/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "udw/errors.hpp"
#include "udw/parallel.hpp"

namespace udw::oracle {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr cplx kI{0.0, 1.0};

double step(double x) { return x > 0 ? 1.0 : (x < 0 ? 0.0 : 0.5); }

// --- Gauss-Legendre by Golub-Welsch ---------------------------------------

struct Rule {
  std::vector<double> x;
  std::vector<double> w;
};

Rule golub_welsch(int n) {
  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(n, n);
  for (int k = 1; k < n; ++k) {
    const double b = k / std::sqrt(4.0 * k * k - 1.0);
    jacobi(k, k - 1) = jacobi(k - 1, k) = b;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(jacobi);
  Rule r;
  for (int i = 0; i < n; ++i) {
    r.x.push_back(es.eigenvalues()[i]);
    const double v0 = es.eigenvectors()(0, i);
    r.w.push_back(2 * v0 * v0);
  }
  return r;
}

// Composite rule on [a, b], graded geometrically towards every breakpoint
// (the ends included). Returned as parallel node/weight arrays.
struct Nodes {
  std::vector<double> x;
  std::vector<double> w;
};

void add_panel(Nodes& out, const Rule& rule, double a, double b) {
  const double half = (b - a) / 2;
  const double mid = (a + b) / 2;
  for (std::size_t i = 0; i < rule.x.size(); ++i) {
    out.x.push_back(mid + half * rule.x[i]);
    out.w.push_back(half * rule.w[i]);
  }
}

void add_uniform(Nodes& out, const Rule& rule, double a, double b, double hmax) {
  const int pieces = std::max(1, static_cast<int>(std::ceil((b - a) / hmax)));
  for (int k = 0; k < pieces; ++k) {
    add_panel(out, rule, a + (b - a) * k / pieces, a + (b - a) * (k + 1) / pieces);
  }
}

Nodes graded_nodes(double a, double b, std::vector<double> breaks, const Rule& rule, double ratio, double hmin,
                   double hmax) {
  Nodes out;
  if (!(a < b)) return out;
  breaks.push_back(a);
  breaks.push_back(b);
  std::erase_if(breaks, [&](double t) { return !(t >= a && t <= b); });
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end(), [](double p, double q) { return std::abs(p - q) < 1e-13; }),
               breaks.end());
  for (std::size_t k = 0; k + 1 < breaks.size(); ++k) {
    const double lo = breaks[k];
    const double hi = breaks[k + 1];
    const double mid = (lo + hi) / 2;
    // mesh points lo + d_j and hi - d_j with d_j shrinking geometrically
    std::vector<double> d{mid - lo};
    while (d.back() * ratio > hmin) d.push_back(d.back() * ratio);
    std::vector<double> pts;
    pts.push_back(lo);
    for (auto it = d.rbegin(); it != d.rend(); ++it) pts.push_back(lo + *it);
    for (std::size_t j = 1; j < d.size(); ++j) pts.push_back(hi - d[j]);
    pts.push_back(hi);
    for (std::size_t j = 0; j + 1 < pts.size(); ++j) add_uniform(out, rule, pts[j], pts[j + 1], hmax);
  }
  return out;
}

// --- counter-based randomness -----------------------------------------------

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Stream number `i` under `key`; the j-th draw depends only on (key, i, j).
class CounterStream {
 public:
  CounterStream(std::uint64_t key, std::uint64_t i) : key_(splitmix64(key ^ splitmix64(i))) {}
  // uniform in (0, 1]
  double next() {
    const std::uint64_t bits = splitmix64(key_ + 0x632be59bd9b4e019ULL * ++ctr_);
    return (static_cast<double>(bits >> 11) + 1.0) * 0x1.0p-53;
  }
  double normal() {
    const double r = std::sqrt(-2 * std::log(next()));
    return r * std::cos(2 * kPi * next());
  }

 private:
  std::uint64_t key_;
  std::uint64_t ctr_ = 0;
};

// --- sampling one time variable ------------------------------------------------

// Draws tau in `range` and returns the importance weight chi(tau)/pdf(tau).
struct Sampler {
  Interval<double> range;
  SwitchingSpec<double> switching;
  bool gaussian = false;
  double center = 0;
  double sd = 0;
  double gauss_weight = 0;

  Sampler(const Interval<double>& r, const SwitchingSpec<double>& s) : range(r), switching(s) {
    if (const auto* g = std::get_if<GaussianSwitching<double>>(&s)) {
      gaussian = true;
      center = g->center;
      // chi is an unnormalised normal density with standard deviation width/sqrt(2)
      sd = g->width / std::sqrt(2.0);
      const double inside =
          1 - std::erfc((center - range.lo) / g->width) / 2 - std::erfc((range.hi - center) / g->width) / 2;
      gauss_weight = inside * g->width * std::sqrt(kPi);
    }
  }

  std::pair<double, double> draw(CounterStream& rng) const {
    if (gaussian) {
      for (;;) {
        const double t = center + sd * rng.normal();
        if (t >= range.lo && t <= range.hi) return {t, gauss_weight};
      }
    }
    const double t = range.lo + (range.hi - range.lo) * rng.next();
    return {t, chi(switching, t) * (range.hi - range.lo)};
  }
};

// Everything the two paths need to know about one block.
struct BlockGeometry {
  IntegralKind kind;
  const DetectorParams<double>* first;   // owns tau, first kernel slot
  const DetectorParams<double>* second;  // owns tau', second kernel slot
  double gap_first;                      // multiplies the first sign (eps) ...
  double gap_second;
  bool eps_on_first;                     // ... if eps belongs to the first variable
  Interval<double> r1;
  Interval<double> r2;
  bool firewall;
  bool empty;
};

BlockGeometry geometry(IntegralKind kind, Detector nu, Detector eta, const ScenarioConfig<double>& sc) {
  // I: tau belongs to eta, tau' to nu, eps multiplies Omega_nu tau'.
  // J: tau belongs to nu,  tau' to eta, eps multiplies Omega_nu tau.
  BlockGeometry g{};
  g.kind = kind;
  const Detector f = kind == IntegralKind::I ? eta : nu;
  const Detector s = kind == IntegralKind::I ? nu : eta;
  g.first = &sc.detector(f);
  g.second = &sc.detector(s);
  g.eps_on_first = kind == IntegralKind::J;
  g.gap_first = g.first->gap;
  g.gap_second = g.second->gap;
  g.r1 = integration_window(sc, f).range;
  g.r2 = integration_window(sc, s).range;
  g.firewall = sc.state.kind == StateKind::Firewall;
  g.empty = g.r1.empty() || g.r2.empty() || (kind == IntegralKind::J && !(g.r2.lo < g.r1.hi));
  return g;
}

// exp(i(eps Omega_nu s_nu + delta Omega_eta s_eta)) for the four sign pairs.
std::array<cplx, 4> phases(const BlockGeometry& g, double t, double tp) {
  const cplx p1 = std::exp(kI * (g.gap_first * t));
  const cplx p2 = std::exp(kI * (g.gap_second * tp));
  const cplx pe = g.eps_on_first ? p1 : p2;
  const cplx pd = g.eps_on_first ? p2 : p1;
  std::array<cplx, 4> out{};
  for (const auto sp : kSignPairs) {
    out[sign_index(sp)] = (sp.eps > 0 ? pe : std::conj(pe)) * (sp.delta > 0 ? pd : std::conj(pd));
  }
  return out;
}

Point on_worldline(const DetectorParams<double>& d, double tau) { return {tau - d.position, tau + d.position}; }

// tau' breakpoints of the inner integral at fixed tau.
std::vector<double> inner_breaks(const BlockGeometry& g, double t) {
  const double xf = g.first->position;
  const double xs = g.second->position;
  std::vector<double> b{t - xf + xs, t + xf - xs};
  if (g.firewall) b.push_back(xs);
  return b;
}

// tau values where the inner breakpoints collide with each other or with
// the ends of the inner range.
std::vector<double> outer_breaks(const BlockGeometry& g) {
  const double xf = g.first->position;
  const double xs = g.second->position;
  const double shift = xf - xs;
  std::vector<double> b{g.r2.lo + shift, g.r2.hi + shift, g.r2.lo - shift, g.r2.hi - shift,
                        g.r2.lo,         g.r2.hi};
  if (g.firewall) {
    b.insert(b.end(), {xf, xs, xs + shift, xs - shift});
  }
  return b;
}

struct GridPass {
  // per epsilon, per sign pair
  std::vector<std::array<cplx, 4>> values;
};

GridPass grid_pass(const BlockGeometry& g, const OracleConfig& oc, const OracleKernel& kernel, int order) {
  const Rule rule = golub_welsch(order);
  const double hmin = 0.1 * *std::min_element(oc.epsilons.begin(), oc.epsilons.end());
  const Nodes outer = graded_nodes(g.r1.lo, g.r1.hi, outer_breaks(g), rule, oc.grading_ratio, hmin, oc.max_panel);
  const std::size_t ne = oc.epsilons.size();
  std::vector<std::vector<std::array<cplx, 4>>> rows(outer.x.size(), std::vector<std::array<cplx, 4>>(ne));
  parallel_for(outer.x.size(), [&](std::size_t i) {
    const double t = outer.x[i];
    const double c1 = chi(g.first->switching, t);
    auto& row = rows[i];
    for (auto& r : row) r.fill(cplx{});
    if (c1 == 0) return;
    const double hi = g.kind == IntegralKind::J ? std::min(g.r2.hi, t) : g.r2.hi;
    const Nodes inner = graded_nodes(g.r2.lo, hi, inner_breaks(g, t), rule, oc.grading_ratio, hmin, oc.max_panel);
    const Point p = on_worldline(*g.first, t);
    for (std::size_t j = 0; j < inner.x.size(); ++j) {
      const double tp = inner.x[j];
      const double env = c1 * chi(g.second->switching, tp) * inner.w[j];
      if (env == 0) continue;
      const auto ph = phases(g, t, tp);
      const Point q = on_worldline(*g.second, tp);
      for (std::size_t e = 0; e < ne; ++e) {
        const cplx w = env * kernel.finite(p, q, oc.epsilons[e]);
        for (int s = 0; s < 4; ++s) row[e][s] += w * ph[s];
      }
    }
  });
  GridPass out;
  out.values.assign(ne, std::array<cplx, 4>{});
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t e = 0; e < ne; ++e) {
      for (int s = 0; s < 4; ++s) out.values[e][s] += outer.w[i] * rows[i][e][s];
    }
  }
  return out;
}

// Fit A(eps) = c0 + c1 eps + c2 eps log eps through the given points (or
// c0 + c2 eps log eps through two of them) and return c0.
cplx extrapolate(const std::vector<double>& eps, const std::vector<cplx>& a) {
  const auto n = static_cast<Eigen::Index>(eps.size());
  if (n == 1) return a[0];
  Eigen::MatrixXd basis(n, n);
  Eigen::VectorXcd rhs(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const double e = eps[k];
    basis(k, 0) = 1;
    if (n == 2) {
      basis(k, 1) = e * std::log(e);
    } else {
      for (Eigen::Index c = 1; c < n; ++c) basis(k, c) = c % 2 == 1 ? std::pow(e, (c + 1) / 2) * std::log(e) : std::pow(e, c / 2);
    }
    rhs[k] = a[k];
  }
  const Eigen::VectorXcd coef = basis.cast<cplx>().colPivHouseholderQr().solve(rhs);
  return coef[0];
}

void fill_grid(std::array<OracleEstimate, 4>& out, const BlockGeometry& g, const OracleConfig& oc,
               const OracleKernel& kernel) {
  const GridPass fine = grid_pass(g, oc, kernel, oc.grid_order);
  const GridPass coarse = grid_pass(g, oc, kernel, std::max(2, oc.grid_order - 4));
  // smallest epsilons first for the reduced fit
  std::vector<std::size_t> order(oc.epsilons.size());
  for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
  std::sort(order.begin(), order.end(), [&](auto p, auto q) { return oc.epsilons[p] < oc.epsilons[q]; });
  for (int s = 0; s < 4; ++s) {
    auto& est = out[s];
    est.per_epsilon.clear();
    double grid_err = 0;
    for (std::size_t e = 0; e < oc.epsilons.size(); ++e) {
      est.per_epsilon.push_back(fine.values[e][s]);
      grid_err = std::max(grid_err, std::abs(fine.values[e][s] - coarse.values[e][s]));
    }
    est.extrapolated = extrapolate(oc.epsilons, est.per_epsilon);
    double spread = 0;
    if (order.size() >= 3) {
      const std::vector<double> e2{oc.epsilons[order[0]], oc.epsilons[order[1]]};
      const std::vector<cplx> a2{est.per_epsilon[order[0]], est.per_epsilon[order[1]]};
      spread = std::abs(est.extrapolated - extrapolate(e2, a2));
    } else if (order.size() == 2) {
      spread = std::abs(est.extrapolated - est.per_epsilon[order[0]]);
    }
    est.extrapolation_uncertainty = spread + grid_err;
  }
}

bool near_singular(const BlockGeometry& g, const Point& p, const Point& q, double strip) {
  if (std::abs(p.u - q.u) < strip || std::abs(p.v - q.v) < strip) return true;
  return g.firewall && (std::abs(p.u) < strip || std::abs(q.u) < strip);
}

void fill_monte_carlo(std::array<OracleEstimate, 4>& out, const BlockGeometry& g, const OracleConfig& oc,
                      const OracleKernel& kernel, std::uint64_t block_key) {
  const Sampler s1(g.r1, g.first->switching);
  const Sampler s2(g.r2, g.second->switching);
  constexpr std::uint64_t kChunk = 1 << 15;
  const std::uint64_t chunks = (oc.mc_samples + kChunk - 1) / kChunk;
  struct Acc {
    std::array<cplx, 4> sum{};
    std::array<double, 4> sq{};
  };
  std::vector<Acc> acc(chunks);
  const std::uint64_t key = splitmix64(oc.mc_seed ^ splitmix64(block_key));
  parallel_for(chunks, [&](std::size_t c) {
    Acc a;
    const std::uint64_t end = std::min<std::uint64_t>(oc.mc_samples, (c + 1) * kChunk);
    for (std::uint64_t i = c * kChunk; i < end; ++i) {
      CounterStream rng(key, i);
      const auto [t, w1] = s1.draw(rng);
      const auto [tp, w2] = s2.draw(rng);
      if (g.kind == IntegralKind::J && tp > t) continue;
      const Point p = on_worldline(*g.first, t);
      const Point q = on_worldline(*g.second, tp);
      if (near_singular(g, p, q, oc.strip)) continue;
      const cplx w = w1 * w2 * kernel.limit(p, q);
      const auto ph = phases(g, t, tp);
      for (int s = 0; s < 4; ++s) {
        const cplx f = w * ph[s];
        a.sum[s] += f;
        a.sq[s] += std::norm(f);
      }
    }
    acc[c] = a;
  });
  const double n = static_cast<double>(oc.mc_samples);
  for (int s = 0; s < 4; ++s) {
    cplx sum{};
    double sq = 0;
    for (const auto& a : acc) {
      sum += a.sum[s];
      sq += a.sq[s];
    }
    const cplx mean = sum / n;
    const double var = std::max(0.0, sq / n - std::norm(mean));
    out[s].monte_carlo = mean;
    out[s].mc_standard_error = std::sqrt(var / n);
  }
}

std::uint64_t block_key(IntegralKind kind, Detector nu, Detector eta) {
  return 1 + static_cast<std::uint64_t>(static_cast<int>(kind) * 4 + static_cast<int>(nu) * 2 + static_cast<int>(eta));
}

}  // namespace

void OracleConfig::validate() const {
  if (epsilons.empty()) throw ConfigError("oracle: at least one epsilon is required");
  for (std::size_t k = 0; k < epsilons.size(); ++k) {
    if (!(epsilons[k] > 0)) throw ConfigError("oracle: epsilons must be positive");
    if (k > 0 && !(epsilons[k] < epsilons[k - 1])) throw ConfigError("oracle: epsilons must be decreasing");
  }
  if (mc_samples < 10'000) throw ConfigError("oracle: mc_samples must be at least 1e4");
  if (grid_order < 6) throw ConfigError("oracle: grid_order must be at least 6");
  if (!(grading_ratio > 0 && grading_ratio < 1)) throw ConfigError("oracle: grading_ratio must lie in (0, 1)");
  if (!(max_panel > 0) || !(strip > 0)) throw ConfigError("oracle: max_panel and strip must be positive");
}

cplx w_vacuum_finite_eps(const Point& p, const Point& q, double lambda_ir, double eps) {
  const cplx arg = lambda_ir * lambda_ir * (eps + kI * (p.u - q.u)) * (eps + kI * (p.v - q.v));
  return -std::log(arg) / (4 * kPi);
}

cplx w_firewall_finite_eps(const Point& p, const Point& q, double lambda_ir, double eps) {
  if (!(p.v > 0 && q.v > 0)) throw DomainNotCovered("oracle: firewall correction needs v, v' > 0");
  const double bracket = step(p.u) * step(-q.u) + step(-p.u) * step(q.u);
  if (bracket == 0) return {};
  return bracket * std::log(lambda_ir * (eps + kI * (p.u - q.u))) / (4 * kPi);
}

OracleKernel physical_kernel(const FieldStateSpec<double>& spec) {
  const double lam = spec.lambda_ir;
  const bool fw = spec.kind == StateKind::Firewall;
  OracleKernel k;
  k.finite = [lam, fw](const Point& p, const Point& q, double eps) {
    cplx w = w_vacuum_finite_eps(p, q, lam, eps);
    if (fw) w += w_firewall_finite_eps(p, q, lam, eps);
    return w;
  };
  // eps = 0 in the same expressions: log(i x) = log|x| + i (pi/2) sgn x
  k.limit = [lam, fw](const Point& p, const Point& q) {
    cplx w = -(2 * std::log(lam) + std::log(kI * (p.u - q.u)) + std::log(kI * (p.v - q.v))) / (4 * kPi);
    if (fw) {
      if (!(p.v > 0 && q.v > 0)) throw DomainNotCovered("oracle: firewall correction needs v, v' > 0");
      const double bracket = step(p.u) * step(-q.u) + step(-p.u) * step(q.u);
      if (bracket != 0) w += bracket * (std::log(lam) + std::log(kI * (p.u - q.u))) / (4 * kPi);
    }
    return w;
  };
  return k;
}

double OracleEstimate::combined_uncertainty() const {
  return std::hypot(extrapolation_uncertainty, mc_standard_error);
}

std::array<OracleEstimate, 4> oracle_block(IntegralKind kind, Detector nu, Detector eta,
                                           const ScenarioConfig<double>& sc, const OracleConfig& oc,
                                           const OracleKernel& kernel) {
  oc.validate();
  std::array<OracleEstimate, 4> out{};
  const BlockGeometry g = geometry(kind, nu, eta, sc);
  if (g.empty) {
    for (auto& e : out) e.per_epsilon.assign(oc.epsilons.size(), cplx{});
    return out;
  }
  fill_grid(out, g, oc, kernel);
  fill_monte_carlo(out, g, oc, kernel, block_key(kind, nu, eta));
  return out;
}

std::array<OracleEstimate, 4> oracle_block(IntegralKind kind, Detector nu, Detector eta,
                                           const ScenarioConfig<double>& sc, const OracleConfig& oc) {
  return oracle_block(kind, nu, eta, sc, oc, physical_kernel(sc.state));
}

std::array<OracleEstimate, 4> monte_carlo_block(IntegralKind kind, Detector nu, Detector eta,
                                                const ScenarioConfig<double>& sc, const OracleConfig& oc,
                                                const OracleKernel& kernel) {
  oc.validate();
  std::array<OracleEstimate, 4> out{};
  const BlockGeometry g = geometry(kind, nu, eta, sc);
  if (!g.empty) fill_monte_carlo(out, g, oc, kernel, block_key(kind, nu, eta));
  return out;
}

OracleEstimate ij_via_oracle(IntegralKind kind, Detector nu, Detector eta, SignPair sp,
                             const ScenarioConfig<double>& sc, const OracleConfig& oc) {
  OracleEstimate e = oracle_block(kind, nu, eta, sc, oc)[sign_index(sp)];
  if (!e.paths_agree()) {
    throw OracleDisagreement("oracle paths disagree: |grid - monte carlo| = " + std::to_string(e.disagreement()) +
                             ", combined uncertainty " + std::to_string(e.combined_uncertainty()));
  }
  return e;
}

double EntryComparison::allowed() const {
  return 3 * std::hypot(oracle.uncertainty(), fast.error_estimate);
}

std::vector<EntryComparison> compare_table(const ScenarioConfig<double>& sc, const IJTable<double>& fast,
                                           const OracleConfig& oc) {
  std::vector<EntryComparison> out;
  for (const auto kind : {IntegralKind::I, IntegralKind::J}) {
    for (const auto nu : {Detector::A, Detector::B}) {
      for (const auto eta : {Detector::A, Detector::B}) {
        const auto block = oracle_block(kind, nu, eta, sc, oc);
        for (const auto sp : kSignPairs) {
          out.push_back({kind, nu, eta, sp, fast.entry(kind, nu, eta, sp), block[sign_index(sp)]});
        }
      }
    }
  }
  return out;
}

}  // namespace udw::oracle
