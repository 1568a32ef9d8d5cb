#include <doctest.h>

#include <cmath>
#include <random>

#include "dfock/localfit.hpp"

using namespace dfock;

namespace {

std::vector<Symbol> sample_symbols() {
  return {Symbol::xia(),
          Symbol::xia().conj(),
          Symbol::zbar(),
          Symbol::fbeta_surrogate(0.5),
          Symbol::zbar_disk(1.0),
          Symbol::re_disk(1.0),
          Symbol::zbar_decay(2.0),
          Symbol::polynomial({1.0, 0.5, 0.25}),
          Symbol::custom([](cplx z) { return std::exp(std::conj(z)); }, "exp(zbar)"),
          Symbol::custom([](cplx z) { return cplx{std::norm(z), 0.0}; }, "|z|^2")};
}

}  // namespace

TEST_CASE("projection agrees with the least squares oracle") {
  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> u(-2.5, 2.5), rr(0.2, 0.8);
  for (const Symbol& f : sample_symbols()) {
    CAPTURE(f.name());
    for (int i = 0; i < 6; ++i) {
      const cplx z{u(gen), u(gen)};
      const double R = rr(gen);
      DiskFit a = disk_projection(f, z, R, 8, {40, 80});
      DiskFit b = lsq_oracle(f, z, R, 8, {40, 80});
      const double scale = std::sqrt(a.mean_abs_sq);
      CHECK(std::abs(a.residual - b.residual) <= 1e-6 * std::max(a.residual, b.residual) + 1e-12 * scale);
      for (int k = 0; k <= 8; ++k) CHECK(std::abs(a.scaled_coeffs[k] - b.scaled_coeffs[k]) <= 1e-8 * (1 + scale));
    }
  }
}

TEST_CASE("fit evaluation and derivative") {
  Symbol f = Symbol::polynomial({1.0, cplx{0.0, 2.0}, 3.0});
  DiskFit fit = disk_projection(f, {0.5, 0.5}, 0.7, 4);
  for (cplx w : {cplx{0.5, 0.5}, cplx{0.9, 0.2}}) {
    CHECK(std::abs(fit(w) - f(w)) <= 1e-12);
    CHECK(std::abs(fit.derivative(w) - (cplx{0.0, 2.0} + 6.0 * w)) <= 1e-11);
  }
  CHECK(fit.residual <= 1e-13);
}

TEST_CASE("G2 of zbar is r rho / sqrt 2") {
  for (const WeightSpec& spec : {WeightSpec::classical(), WeightSpec::power(4.0, 1.0)}) {
    WeightModel m(spec);
    for (cplx z : {cplx{0.0, 0.0}, cplx{1.0, -0.5}, cplx{2.0, 2.0}}) {
      for (double r : {0.5, 1.0}) {
        const double want = r * m.rho(z) / std::sqrt(2.0);
        CHECK(G2(Symbol::zbar(), m, z, r) == doctest::Approx(want).epsilon(1e-6));
        CHECK(MO2(Symbol::zbar(), m, z, r) == doctest::Approx(want).epsilon(1e-6));
      }
    }
  }
}

TEST_CASE("holomorphic symbols: G2 vanishes, MO2 does not") {
  WeightModel m(WeightSpec::classical());
  Symbol z1 = Symbol::polynomial({0.0, 1.0});
  CHECK(G2(z1, m, {0.3, 0.1}, 1.0) == 0.0);
  LocalOptions no_shortcut;
  no_shortcut.use_holomorphy = false;
  CHECK(G2(z1, m, {0.3, 0.1}, 1.0, no_shortcut) <= 1e-12);
  CHECK(MO2(z1, m, {0.3, 0.1}, 1.0) == doctest::Approx(m.rho(0.0) / std::sqrt(2.0)).epsilon(1e-8));
  // 1/z is holomorphic well away from the unit circle
  CHECK(G2(Symbol::xia(), m, {4.0, 0.0}, 1.0, no_shortcut) <= 1e-10);
}

TEST_CASE("MO2 identity and G2 <= MO2") {
  WeightModel m(WeightSpec::classical());
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (const Symbol& f : sample_symbols()) {
    for (int i = 0; i < 5; ++i) {
      const cplx z{u(gen), u(gen)};
      const double R = 0.5 * m.rho(z);
      const DiskQuad q{40, 80};
      LocalOptions o;
      o.quad = q;
      const cplx mean = disk_mean(f, z, R, q);
      DiskFit fit0 = disk_projection(f, z, R, 0, q);
      CHECK(std::abs(fit0.coeff(0) - mean) <= 1e-12 * (1 + std::abs(mean)));
      const double mo = MO2_disk(f, z, R, o);
      CHECK(mo == doctest::Approx(std::sqrt(std::max(0.0, fit0.mean_abs_sq - std::norm(mean)))).epsilon(1e-6));
      CHECK(G2_disk(f, z, R, o) <= mo + 1e-9);
    }
  }
}

TEST_CASE("MO2 of 1/z follows rho |f'| / sqrt 2") {
  WeightModel m(WeightSpec::classical());
  for (double t : {4.0, 8.0}) {
    const double want = 0.5 * m.rho(t) / (t * t) / std::sqrt(2.0);
    CHECK(MO2(Symbol::xia(), m, t, 0.5) == doctest::Approx(want).epsilon(0.2));
  }
}

TEST_CASE("f_hat is the disk mean") {
  WeightModel m(WeightSpec::classical());
  Symbol f = Symbol::custom([](cplx z) { return cplx{std::norm(z), 0.0}; });
  const cplx z{1.0, 2.0};
  const double R = m.rho(z);
  // mean of |w|^2 over D(z, R) = |z|^2 + R^2 / 2
  CHECK(std::abs(f_hat(f, m, z, 1.0) - (std::norm(z) + 0.5 * R * R)) <= 1e-12);
}
