#include <cmath>
#include <vector>

#include <doctest.h>

#include "qtraj/rng.hpp"

using qtraj::PhiloxRng;

TEST_SUITE("rng") {

TEST_CASE("same seed and stream reproduce bit-identical draws") {
  PhiloxRng a(123456789, 7), b(123456789, 7);
  for (int i = 0; i < 1000; ++i) CHECK(a.gaussian() == b.gaussian());
}

TEST_CASE("different streams and seeds decorrelate") {
  PhiloxRng a(42, 0), b(42, 1), c(43, 0);
  const int n = 200000;
  double sab = 0, sac = 0, sa = 0, sb2 = 0;
  for (int i = 0; i < n; ++i) {
    const double x = a.gaussian(), y = b.gaussian(), z = c.gaussian();
    sab += x * y;
    sac += x * z;
    sa += x;
    sb2 += y * y;
  }
  CHECK(std::abs(sab / n) < 0.01);
  CHECK(std::abs(sac / n) < 0.01);
  CHECK(std::abs(sa / n) < 0.01);
  CHECK(sb2 / n == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("gaussian moments") {
  PhiloxRng rng(2718281828, 3);
  const int n = 400000;
  double s1 = 0, s2 = 0, s3 = 0, s4 = 0;
  for (int i = 0; i < n; ++i) {
    const double x = rng.gaussian();
    s1 += x;
    s2 += x * x;
    s3 += x * x * x;
    s4 += x * x * x * x;
  }
  CHECK(std::abs(s1 / n) < 0.01);
  CHECK(s2 / n == doctest::Approx(1.0).epsilon(0.01));
  CHECK(std::abs(s3 / n) < 0.05);
  CHECK(s4 / n == doctest::Approx(3.0).epsilon(0.05));
}

TEST_CASE("uniform stays in (0,1] and is equidistributed") {
  PhiloxRng rng(977, 11);
  std::vector<int> bins(16, 0);
  const int n = 160000;
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform();
    CHECK(u > 0.0);
    CHECK(u <= 1.0);
    ++bins[std::min(15, static_cast<int>(u * 16))];
  }
  for (int b : bins) CHECK(std::abs(b - n / 16) < 5 * std::sqrt(n / 16.0));
}

}  // TEST_SUITE
