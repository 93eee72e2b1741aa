#include <cmath>
#include <complex>
#include <random>

#include "doctest.h"
#include "udw/entanglement.hpp"
#include "udw/evolution.hpp"

using namespace udw;
using cd = std::complex<double>;
using Mat4 = DensityMatrix4<double>;

namespace {

Mat4 werner(double p) { return p * initial_bell_state<double>() + (1 - p) * Mat4::Identity() / 4.0; }

// U_A (x) U_B in the {gg, eg, ge, ee} ordering
Mat4 local(const Eigen::Matrix2cd& ua, const Eigen::Matrix2cd& ub) {
  Mat4 out;
  for (int r = 0; r < 4; ++r) {
    for (int c = 0; c < 4; ++c) {
      out(r, c) = ua(alice_bit(r), alice_bit(c)) * ub(bob_bit(r), bob_bit(c));
    }
  }
  return out;
}

Eigen::Matrix2cd phase(double a, double b) {
  Eigen::Matrix2cd m = Eigen::Matrix2cd::Zero();
  m(0, 0) = std::polar(1.0, a);
  m(1, 1) = std::polar(1.0, b);
  return m;
}

}  // namespace

TEST_CASE("partial transpose examples") {
  const Mat4 id = Mat4::Identity() / 4.0;
  CHECK(partial_transpose_b(id) == id);

  const Mat4 bell = initial_bell_state<double>();
  const Mat4 pt = partial_transpose_b(bell);
  CHECK(pt(kGG, kGG) == 0.5);
  CHECK(pt(kEE, kEE) == 0.5);
  CHECK(pt(kGG, kEE) == 0.0);
  CHECK(pt(kEG, kGE) == 0.5);
  CHECK(pt(kGE, kEG) == 0.5);
  const auto ev = pt_eigenvalues(bell);
  CHECK(ev[0] == -0.5);
  CHECK(ev[1] == 0.5);
  CHECK(ev[2] == 0.5);
  CHECK(ev[3] == 0.5);
}

TEST_CASE("partial transpose is a trace-preserving involution") {
  std::mt19937_64 gen(21);
  std::normal_distribution<double> g;
  for (int k = 0; k < 200; ++k) {
    Mat4 m;
    for (int r = 0; r < 4; ++r) {
      for (int c = 0; c < 4; ++c) m(r, c) = cd(g(gen), g(gen));
    }
    const Mat4 h = hermitian_part(m);
    const Mat4 once = partial_transpose_b(h);
    CHECK(partial_transpose_b(once) == h);
    CHECK(once.trace() == h.trace());
    CHECK(hermitian_defect(once) == 0.0);
  }
}

TEST_CASE("negativity examples") {
  bool closed = false;
  const auto bell = negativity(initial_bell_state<double>());
  CHECK(bell.negativity == 0.5);
  CHECK(bell.closed_form);
  CHECK(bell.perturbative_negativity == 0.5);
  CHECK(bell.method_discrepancy == 0.0);

  Mat4 gg = Mat4::Zero();
  gg(kGG, kGG) = 1;
  CHECK(negativity(gg).negativity == 0.0);

  const auto w = negativity(werner(0.5));
  CHECK(w.negativity == doctest::Approx(0.125).epsilon(1e-15));
  CHECK(w.pt_eigenvalues[0] == doctest::Approx(-0.125).epsilon(1e-15));
  for (int i = 1; i < 4; ++i) CHECK(w.pt_eigenvalues[i] == doctest::Approx(0.375).epsilon(1e-15));

  // separable end of the Werner family
  CHECK(negativity(werner(1.0 / 3)).negativity < 1e-15);

  // same Werner state behind a Hadamard on Alice: no longer X-shaped
  Eigen::Matrix2cd had;
  had << 1, 1, 1, -1;
  had /= std::sqrt(2.0);
  const Mat4 u = local(had, Eigen::Matrix2cd::Identity());
  const Mat4 rotated = u * werner(0.5) * u.adjoint();
  pt_eigenvalues(rotated, &closed);
  CHECK_FALSE(closed);
  const auto wr = negativity(rotated);
  CHECK_FALSE(wr.closed_form);
  CHECK(wr.negativity == doctest::Approx(0.125).epsilon(1e-12));
}

TEST_CASE("closed form and eigensolver agree on X states") {
  std::mt19937_64 gen(4);
  std::uniform_real_distribution<double> uni(-1, 1);
  for (int k = 0; k < 200; ++k) {
    Mat4 x = Mat4::Zero();
    for (int i = 0; i < 4; ++i) x(i, i) = 1 + uni(gen);
    x(kGG, kEE) = cd(uni(gen), uni(gen));
    x(kEG, kGE) = cd(uni(gen), uni(gen));
    x(kEE, kGG) = std::conj(x(kGG, kEE));
    x(kGE, kEG) = std::conj(x(kEG, kGE));
    bool closed = false;
    const auto fast = pt_eigenvalues(x, &closed);
    REQUIRE(closed);
    Eigen::SelfAdjointEigenSolver<Mat4> solver(partial_transpose_b(x), Eigen::EigenvaluesOnly);
    for (int i = 0; i < 4; ++i) CHECK(std::abs(fast[i] - solver.eigenvalues()[i]) < 1e-13);
  }
}

TEST_CASE("negativity is invariant under local phase rotations") {
  std::mt19937_64 gen(8);
  std::uniform_real_distribution<double> ang(-M_PI, M_PI);
  std::uniform_real_distribution<double> small(-1e-3, 1e-3);
  for (int k = 0; k < 100; ++k) {
    // a perturbed Bell state with generic small entries
    Mat4 d;
    for (int r = 0; r < 4; ++r) {
      for (int c = 0; c < 4; ++c) d(r, c) = cd(small(gen), small(gen));
    }
    Mat4 rho = initial_bell_state<double>() + hermitian_part(d);
    rho /= rho.trace();
    const Mat4 u = local(phase(ang(gen), ang(gen)), phase(ang(gen), ang(gen)));
    const double a = negativity(rho).negativity;
    const double b = negativity(Mat4(u * rho * u.adjoint())).negativity;
    CHECK(std::abs(a - b) < 1e-10);
  }
}

TEST_CASE("non-Hermitian input is refused") {
  Mat4 rho = initial_bell_state<double>();
  rho(kGG, kEG) = cd(1e-6, 0);
  CHECK_THROWS_AS(negativity(rho), NotHermitian);
  rho(kGG, kEG) = cd(1e-10, 0);
  CHECK_NOTHROW(negativity(rho));
}

TEST_CASE("perturbative negativity is first order") {
  std::mt19937_64 gen(13);
  std::uniform_real_distribution<double> uni(-1, 1);
  Mat4 d;
  for (int r = 0; r < 4; ++r) {
    for (int c = 0; c < 4; ++c) d(r, c) = cd(uni(gen), uni(gen));
  }
  d = hermitian_part(d);
  d -= Mat4::Identity() * d.trace() / 4.0;
  // exact minus perturbative shrinks quadratically with the perturbation size
  double prev = 0;
  for (double s : {1e-2, 1e-3, 1e-4}) {
    const auto r = negativity(Mat4(initial_bell_state<double>() + s * d));
    CHECK(r.method_discrepancy < 10 * s * s);
    if (prev > 0) CHECK(r.method_discrepancy < prev / 50);
    prev = r.method_discrepancy;
  }
}

TEST_CASE("computed final states sit in the physical range") {
  ScenarioConfig<double> sc;
  sc.alice = DetectorParams<double>{1.0, 0.01, 0.9, SharpSwitching<double>{1.8}};
  sc.bob = DetectorParams<double>{1.0, 0.01, 4.9, SharpSwitching<double>{1.8}};
  for (const auto kind : {StateKind::Vacuum, StateKind::Firewall}) {
    sc.state.kind = kind;
    const auto fs = final_state(sc);
    const auto n = negativity(fs.rho);
    CHECK(n.negativity > 0.0);
    CHECK(n.negativity < 0.5);
    CHECK(n.method_discrepancy <= 1e-6);
  }
}
