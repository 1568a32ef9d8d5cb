#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "dfock/fockops.hpp"

using namespace dfock;

namespace {

// Q(n) = e^{-1} sum_{k<n} 1/k!
double Q(int n) {
  double s = 0.0, term = 1.0;
  for (int k = 0; k < n; ++k) {
    s += term;
    term /= (k + 1);
  }
  return s * std::exp(-1.0);
}

// 1 - Q(n) = e^{-1} sum_{k>=n} 1/k!, summed directly to keep the tail exact
double Qc(int n) {
  double term = 1.0;
  for (int k = 1; k <= n; ++k) term /= k;
  double s = 0.0;
  for (int k = n; term > 1e-300 && k < n + 200; ++k) {
    s += term;
    term /= (k + 1);
  }
  return s * std::exp(-1.0);
}

// E1(1) = -gamma - sum_{k>=1} (-1)^k / (k k!)
double E1_one() {
  double s = 0.0, fact = 1.0;
  for (int k = 1; k < 30; ++k) {
    fact *= k;
    s += (k % 2 ? -1.0 : 1.0) / (k * fact);
  }
  return -0.57721566490153286 - s;
}

// regularised lower incomplete gamma P(n+1, x) = 1 - e^{-x} sum_{k<=n} x^k/k!
double P_lower(int n, double x) {
  double s = 0.0, term = 1.0;
  for (int k = 0; k <= n; ++k) {
    s += term;
    term *= x / (k + 1);
  }
  return 1.0 - std::exp(-x) * s;
}

}  // namespace

TEST_CASE("radial integral in log form") {
  WeightModel m(WeightSpec::classical());
  // int_0^inf r^3 e^{-r^2} dr = 1/2
  Scaled v = radial_integral(m, 3.0, [](double) { return cplx{1.0, 0.0}; }, 0.0, INFINITY);
  CHECK(std::abs(v.mantissa * std::exp(v.log_scale) - 0.5) <= 1e-13);
  // int_0^1 r e^{-r^2} dr = (1 - e^{-1}) / 2
  Scaled w = radial_integral(m, 1.0, [](double) { return cplx{1.0, 0.0}; }, 0.0, 1.0);
  CHECK(std::abs(w.mantissa * std::exp(w.log_scale) - 0.5 * (1 - std::exp(-1.0))) <= 1e-14);
}

TEST_CASE("classical basis norms b_n = pi n!") {
  BasisTable b = basis_norms(WeightModel(WeightSpec::classical()), 2000);
  for (int n : {0, 1, 5, 30, 170, 800, 2000})
    CHECK(b.log_b[n] == doctest::Approx(std::log(kPi) + std::lgamma(n + 1.0)).epsilon(1e-13));
  CHECK(b.log_convexity_defect() <= 1e-10);
}

TEST_CASE("power(4,1) basis norms") {
  BasisTable b = basis_norms(WeightModel(WeightSpec::power(4.0, 1.0)), 300);
  for (int n : {0, 3, 50, 300}) {
    const double s = 0.5 * (n + 1);
    CHECK(b.log_b[n] == doctest::Approx(std::log(kPi / 2) + std::lgamma(s) - s * std::log(2.0)).epsilon(1e-12));
  }
}

TEST_CASE("classical kernel is e^{w zbar} / pi") {
  BasisTable b = basis_norms(WeightModel(WeightSpec::classical()), 90);
  for (auto [w, z] : {std::pair{cplx{0.5, 1.0}, cplx{-1.0, 0.3}}, std::pair{cplx{2.0, -1.0}, cplx{1.5, 2.0}},
                      std::pair{cplx{0.0, 0.0}, cplx{2.5, 0.0}}}) {
    KernelValue k = kernel_eval(b, w, z);
    const cplx want = std::exp(w * std::conj(z)) / kPi;
    CHECK(std::abs(k.value - want) <= 1e-10 * std::abs(want));
  }
  CHECK_THROWS_AS(kernel_eval(basis_norms(WeightModel(WeightSpec::classical()), 20), cplx{6.0, 0}, cplx{6.0, 0}),
                  NumericalError);
}

TEST_CASE("kernel decay fit on a power weight") {
  BasisTable b = basis_norms(WeightModel(WeightSpec::power(4.0, 1.0)), 400);
  std::vector<cplx> offs;
  for (int i = 1; i <= 8; ++i) offs.push_back(0.15 * i);
  DecayFit fit = kernel_decay_fit(b, cplx{0.5, 0.0}, offs);
  CHECK(fit.epsilon > 0.0);
  CHECK(fit.samples == offs.size());
}

TEST_CASE("xia Hankel Gram against closed forms") {
  BasisTable b = basis_norms(WeightModel(WeightSpec::classical()), 120);
  std::vector<double> want{std::sqrt(E1_one())};
  for (int n = 1; n <= 100; ++n) want.push_back(std::sqrt(Q(n) * Qc(n) / n));
  std::sort(want.rbegin(), want.rend());
  std::vector<double> got = singular_values(hankel_gram(b, Symbol::xia(), 100));
  REQUIRE(got.size() == want.size());
  for (std::size_t i = 0; i < 40; ++i) CHECK(std::abs(got[i] - want[i]) <= 1e-8);
  CHECK(got[0] == doctest::Approx(0.482228).epsilon(1e-5));

  std::vector<double> wc{std::sqrt(E1_one() - std::exp(-2.0))};
  for (int n = 1; n <= 100; ++n) wc.push_back(std::sqrt(Q(n) / n - Q(n + 1) * Q(n + 1) / (n + 1)));
  std::sort(wc.rbegin(), wc.rend());
  std::vector<double> gc = singular_values(hankel_gram(b, Symbol::xia().conj(), 100));
  for (std::size_t i = 0; i < 40; ++i) CHECK(std::abs(gc[i] - wc[i]) <= 1e-8);
  CHECK(gc[0] == doctest::Approx(0.311783).epsilon(1e-5));
}

TEST_CASE("Gram truncation is nested") {
  BasisTable b = basis_norms(WeightModel(WeightSpec::power(4.0, 1.0)), 80);
  GramBlock g = hankel_gram(b, Symbol::re_disk(1.0), 80);
  GramBlock g40 = hankel_gram(b, Symbol::re_disk(1.0), 40);
  CHECK((g.leading(40).dense() - g40.dense()).norm() <= 1e-14 * (1 + g40.dense().norm()));
  CHECK((g.dense() - g.dense().adjoint()).norm() <= 1e-14 * g.dense().norm());
}

TEST_CASE("entire symbols have zero Hankel operator") {
  BasisTable b = basis_norms(WeightModel(WeightSpec::classical()), 50);
  for (double s : singular_values(hankel_gram(b, Symbol::polynomial({1.0, 2.0, 0.5}), 50))) CHECK(s == 0.0);
}

TEST_CASE("Gram input validation") {
  BasisTable b = basis_norms(WeightModel(WeightSpec::classical()), 20);
  CHECK_THROWS_AS(hankel_gram(b, Symbol::custom([](cplx z) { return z; }), 10), ConfigError);
  CHECK_THROWS_AS(hankel_gram(b, Symbol::fbeta(0.5), 10), ConfigError);
  PlanarGrid grid{-2, -2, 0.5, 9, 9, std::vector<double>(81, 2.0)};
  CHECK_THROWS_AS(basis_norms(WeightModel(WeightSpec::custom_planar(grid)), 10), ConfigError);
}

TEST_CASE("Schatten quasi-norms and verdicts") {
  CHECK(schatten_quasi_norm({3.0, 4.0}, 2.0).value == doctest::Approx(5.0));
  CHECK(schatten_quasi_norm({1.0, 1.0}, 0.5).value == doctest::Approx(4.0));
  CHECK_THROWS_AS(schatten_quasi_norm({1.0}, 0.0), ConfigError);

  BasisTable b = basis_norms(WeightModel(WeightSpec::classical()), 1000);
  SchattenReport hf = schatten_report(b, Symbol::xia(), {250, 500, 1000}, {1.0});
  SchattenReport hc = schatten_report(b, Symbol::xia().conj(), {250, 500, 1000}, {1.0});
  CHECK(hf.traces[0].verdict == Verdict::summable);
  CHECK(hc.traces[0].verdict == Verdict::diverging);
  // partial sums of s_n ~ 1/n grow like ln N
  CHECK(hc.traces[0].log_slope == doctest::Approx(1.0).epsilon(0.1));
  CHECK(to_string(Verdict::summable) == "summable");
}

TEST_CASE("Toeplitz matrix of a disk indicator") {
  BasisTable b = basis_norms(WeightModel(WeightSpec::classical()), 60);
  for (double a : {0.5, 1.0, 2.0}) {
    std::vector<double> t = toeplitz_matrix(b, RadialDensity::indicator(a), 60);
    for (int n = 0; n <= 60; n += 6) CHECK(std::abs(t[n] - P_lower(n, a * a)) <= 1e-10);
  }
}

TEST_CASE("averaging transform") {
  WeightModel m(WeightSpec::classical());
  RadialDensity one{"one", [](double) { return 1.0; }};
  CHECK(averaging_transform(m, one, 1.0, {2.0, 1.0}) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(averaging_transform(m, RadialDensity::indicator(1.0), 1.0, {5.0, 0.0}) == 0.0);
  CHECK(averaging_transform(m, RadialDensity::indicator(10.0), 0.5, {1.0, 0.0}) == doctest::Approx(1.0));
}

TEST_CASE("Toeplitz equivalence report scales exactly") {
  BasisTable b = basis_norms(WeightModel(WeightSpec::classical()), 200);
  auto g = RadialDensity::indicator(1.0);
  ToeplitzReport rep = toeplitz_equivalence_report(b, {g, g.scaled(3.0)}, 1.0, 1.0, 200, 5.0);
  REQUIRE(rep.rows.size() == 2);
  CHECK(rep.rows[1].lhs == doctest::Approx(3.0 * rep.rows[0].lhs).epsilon(1e-12));
  CHECK(rep.rows[1].ratio == doctest::Approx(rep.rows[0].ratio).epsilon(1e-12));
  CHECK(rep.spread >= 1.0);
}
