#include <cmath>

#include <doctest.h>

#include "qtraj/lattice.hpp"

using namespace qtraj;

namespace {
const double kSqrt3 = std::sqrt(3.0);
}

TEST_SUITE("lattice") {

TEST_CASE("hamiltonian structure") {
  SUBCASE("N=1 is the empty hopping sum") {
    const Mat h = build_hamiltonian({1, 1.0});
    CHECK(h.rows() == 1);
    CHECK(h(0, 0) == Complex(0, 0));
  }
  SUBCASE("N=2 single bond") {
    const Mat h = build_hamiltonian({2, 1.0});
    CHECK(h(0, 1) == Complex(1, 0));
    CHECK(h(1, 0) == Complex(1, 0));
    CHECK(h(0, 0) == Complex(0, 0));
    CHECK(h(1, 1) == Complex(0, 0));
  }
  SUBCASE("N=5 spectrum is {sqrt3, 1, 0, -1, -sqrt3}") {
    const EigenSystem es = numeric_eigensystem(build_hamiltonian({5, 1.0}));
    const double expected[] = {kSqrt3, 1.0, 0.0, -1.0, -kSqrt3};
    for (int i = 0; i < 5; ++i) CHECK(es.energies(i) == doctest::Approx(expected[i]).epsilon(1e-12));
  }
}

TEST_CASE("analytic eigensystem values") {
  const EigenSystem es = analytic_eigensystem({5, 1.0});
  // node of w_3 at site 2; |<3|w_3>|^2 = 1/3
  CHECK(std::abs(es.states(1, 2)) < 1e-15);
  CHECK(std::norm(es.states(2, 2)) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));

  const EigenSystem es2 = analytic_eigensystem({2, 1.0});
  CHECK(es2.energies(0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(es2.energies(1) == doctest::Approx(-1.0).epsilon(1e-12));
}

TEST_CASE("numeric matches analytic for N in {1,2,5,21,64}") {
  for (int n : {1, 2, 5, 21, 64}) {
    const LatticeSpec spec{n, 1.0};
    const EigenSystem an = analytic_eigensystem(spec);
    const EigenSystem nu = numeric_eigensystem(build_hamiltonian(spec));
    for (int k = 0; k < n; ++k) {
      CHECK(std::abs(an.energies(k) - nu.energies(k)) < 1e-10);
      const double overlap = std::abs(an.states.col(k).dot(nu.states.col(k)));
      CHECK(overlap > 1.0 - 1e-10);
    }
  }
  // N=21 against the closed form directly
  const EigenSystem nu = numeric_eigensystem(build_hamiltonian({21, 1.0}));
  for (int k = 1; k <= 21; ++k)
    CHECK(std::abs(nu.energies(k - 1) - 2.0 * std::cos(M_PI * k / 22.0)) < 1e-10);
}

TEST_CASE("negative coupling flips the band") {
  const LatticeSpec spec{7, -0.8};
  const EigenSystem an = analytic_eigensystem(spec);
  const EigenSystem nu = numeric_eigensystem(build_hamiltonian(spec));
  for (int k = 0; k < 7; ++k) {
    CHECK(std::abs(an.energies(k) - nu.energies(k)) < 1e-10);
    CHECK(std::abs(an.states.col(k).dot(nu.states.col(k))) > 1.0 - 1e-10);
  }
  CHECK(an.energies(0) < an.energies(6));  // ascending for J < 0
}

TEST_CASE("parity relations") {
  for (int n : {4, 5, 21, 64}) {
    const EigenSystem es = analytic_eigensystem({n, 1.0});
    for (int k = 1; k <= n; ++k) {
      const double sign = (k % 2 == 1) ? 1.0 : -1.0;
      CHECK(es.parity[k - 1] == ((k % 2 == 1) ? Parity::Even : Parity::Odd));
      for (int site = 1; site <= n; ++site) {
        const Complex a = es.states(site - 1, k - 1);
        const Complex b = es.states(n - site, k - 1);  // site N+1-site
        CHECK(std::abs(a - sign * b) < 1e-12);
      }
    }
  }
  // middle-site node of even-k states for odd N
  for (int n : {5, 9, 21}) {
    const EigenSystem es = analytic_eigensystem({n, 1.0});
    for (int k = 2; k <= n; k += 2) CHECK(std::abs(es.states((n - 1) / 2, k - 1)) < 1e-12);
  }
}

TEST_CASE("site projectors") {
  const LatticeSpec spec{5, 1.0};
  SUBCASE("single site") {
    const Mat p = site_projector(spec, {3});
    for (int i = 0; i < 5; ++i) CHECK(p(i, i) == Complex(i == 2 ? 1 : 0, 0));
  }
  SUBCASE("two sites, as probed in the two-site experiment") {
    const Mat p = site_projector(spec, {2, 4});
    for (int i = 0; i < 5; ++i) CHECK(p(i, i) == Complex(i == 1 || i == 3 ? 1 : 0, 0));
  }
  SUBCASE("full lattice gives the identity") {
    const Mat p = site_projector(spec, {1, 2, 3, 4, 5});
    CHECK((p - Mat::Identity(5, 5)).cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("projectors are exactly idempotent") {
    const Mat p = site_projector(spec, {1, 4});
    CHECK(((p * p) - p).cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("out-of-range site rejected") {
    CHECK_THROWS_AS(site_projector(spec, {6}), ConfigError);
    CHECK_THROWS_AS(site_projector(spec, {0}), ConfigError);
    CHECK_THROWS_AS(site_projector(spec, {}), ConfigError);
  }
}

TEST_CASE("non-Hermitian input rejected") {
  Mat m(2, 2);
  m << 0, 1, 2, 0;
  CHECK_THROWS(numeric_eigensystem(m));
}

}  // TEST_SUITE
