#include <doctest.h>

#include <cmath>

#include "dfock/decompose.hpp"

using namespace dfock;

namespace {

DecomposeOptions small(double rmax) {
  DecomposeOptions o;
  o.rmax = rmax;
  return o;
}

}  // namespace

TEST_CASE("f1 + f2 = f and the anchored dbar form") {
  WeightModel m(WeightSpec::classical());
  Decomposition dec = ida_decompose(Symbol::zbar(), m, small(2.5));
  auto probes = decomposition_probes(dec, 0.0, 2.5, false, 60);
  REQUIRE(!probes.empty());
  VerifyOptions vo;
  DecompositionReport rep = verify_decomposition(dec, probes, vo);
  CHECK(rep.max_reconstruction_error <= 1e-12);
  CHECK(rep.max_anchor_gap <= 1e-9);
  CHECK(rep.violations == 0);
  CHECK(std::isfinite(rep.max_ratio));
  CHECK(rep.max_ratio > 0.0);
  CHECK(rep.probes == probes.size());
}

TEST_CASE("holomorphic polynomials give f2 = 0 and dbar f1 = 0") {
  WeightModel m(WeightSpec::classical());
  Decomposition dec = ida_decompose(Symbol::polynomial({1.0, 0.5, 0.25}), m, small(2.5));
  auto probes = decomposition_probes(dec, 0.0, 2.5, false, 40);
  DecompositionReport rep = verify_decomposition(dec, probes);
  CHECK(rep.max_lhs <= 1e-8);
  for (cplx z : probes) CHECK(std::abs(dec.f2(z)) <= 1e-10);
}

TEST_CASE("locality: far fits do not change f1") {
  WeightModel m(WeightSpec::classical());
  Decomposition dec = ida_decompose(Symbol::zbar(), m, small(3.0));
  const cplx z{0.1, 0.2};
  const cplx before = dec.f1(z);
  std::size_t far = 0;
  for (std::size_t j = 0; j < dec.lattice().size(); ++j)
    if (std::abs(dec.lattice().centers[j] - z) > 2.0) {
      dec.mutable_fits()[j].scaled_coeffs[0] += 100.0;
      ++far;
    }
  REQUIRE(far > 0);
  CHECK(dec.f1(z) == before);
}

TEST_CASE("dbar f1 against a finite difference") {
  WeightModel m(WeightSpec::classical());
  Decomposition dec = ida_decompose(Symbol::xia(), m, small(3.0));
  for (cplx z : {cplx{1.3, 0.4}, cplx{-0.7, 1.6}}) {
    const double h = 1e-6;
    const cplx dx = (dec.f1(z + h) - dec.f1(z - h)) / (2 * h);
    const cplx dy = (dec.f1(z + cplx{0, h}) - dec.f1(z - cplx{0, h})) / (2 * h);
    const cplx fd = 0.5 * (dx + cplx{0, 1} * dy);
    CHECK(std::abs(dec.dbar_f1(z) - fd) <= 1e-5 * (1 + std::abs(fd)));
  }
}

TEST_CASE("decomposition on a power weight") {
  WeightModel m(WeightSpec::power(4.0, 1.0));
  Decomposition dec = ida_decompose(Symbol::zbar(), m, small(1.2));
  auto probes = decomposition_probes(dec, 0.0, 1.2, false, 30);
  DecompositionReport rep = verify_decomposition(dec, probes);
  CHECK(rep.max_reconstruction_error <= 1e-12);
  CHECK(std::isfinite(rep.max_ratio));
}

TEST_CASE("option validation") {
  WeightModel m(WeightSpec::classical());
  DecomposeOptions o;
  o.m = 1.5;
  CHECK_THROWS_AS(ida_decompose(Symbol::zbar(), m, o), ConfigError);
  o.m = 0.5;
  o.r = 0.0;
  CHECK_THROWS_AS(ida_decompose(Symbol::zbar(), m, o), ConfigError);
}
