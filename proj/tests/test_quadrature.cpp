#include <doctest.h>

#include <cmath>

#include "dfock/quadrature.hpp"

using namespace dfock;

TEST_CASE("gauss-legendre integrates degree 2n-1 exactly") {
  for (int n : {2, 5, 16, 48}) {
    const GaussRule& g = gauss_legendre(n);
    CHECK(g.weights.sum() == doctest::Approx(2.0).epsilon(1e-14));
    for (int d = 0; d <= 2 * n - 1; ++d) {
      double s = 0.0;
      for (int i = 0; i < n; ++i) s += g.weights[i] * std::pow(g.nodes[i], d);
      const double exact = d % 2 ? 0.0 : 2.0 / (d + 1);
      CHECK(std::abs(s - exact) <= 1e-13);
    }
  }
}

TEST_CASE("rules are cached") {
  CHECK(&gauss_legendre(7) == &gauss_legendre(7));
  CHECK(&disk_rule(8, 16) == &disk_rule(8, 16));
}

TEST_CASE("disk rule: weights sum to pi and radial moments are exact") {
  const DiskRule& d = disk_rule(24, 48);
  CHECK(d.weights.sum() == doctest::Approx(kPi).epsilon(1e-14));
  // int_D |w|^{2k} dA = pi / (k + 1)
  for (int k = 0; k <= 20; ++k) {
    double s = 0.0;
    for (int i = 0; i < d.points.size(); ++i) s += d.weights[i] * std::pow(std::abs(d.points[i]), 2 * k);
    CHECK(s == doctest::Approx(kPi / (k + 1)).epsilon(1e-13));
  }
}

TEST_CASE("disk rule: monomials orthogonal up to max_degree") {
  const DiskRule& d = disk_rule(16, 32);
  REQUIRE(d.max_degree > 0);
  for (int j = 0; j <= d.max_degree; ++j)
    for (int k = 0; k <= d.max_degree; ++k) {
      cplx s = 0.0;
      for (int i = 0; i < d.points.size(); ++i) s += d.weights[i] * d.powers(i, j) * std::conj(d.powers(i, k));
      const double exact = j == k ? kPi / (k + 1) : 0.0;
      CHECK(std::abs(s - exact) <= 1e-13);
    }
}

TEST_CASE("panel integration") {
  const double v = integrate_panels([](double x) { return std::exp(x); }, 0.0, 2.0, 4, 8);
  CHECK(v == doctest::Approx(std::exp(2.0) - 1.0).epsilon(1e-14));
}

TEST_CASE("compensated sum keeps small terms") {
  CompensatedSum<double> s;
  s.add(1.0);
  for (int i = 0; i < 1000; ++i) s.add(1e-17);
  CHECK(s.value() - 1.0 == doctest::Approx(1e-14).epsilon(1e-6));
}
