#include <doctest.h>

#include <cmath>
#include <memory>

#include "dfock/geometry.hpp"

using namespace dfock;

TEST_CASE("bump profile") {
  CHECK(bump(0.0) == 1.0);
  CHECK(bump(0.5) == 1.0);
  CHECK(bump(1.0) == 0.0);
  CHECK(bump(1.7) == 0.0);
  // S is symmetric about 1/2: S(u) + S(1 - u) = 1
  CHECK(bump(0.75) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(bump(0.6) + bump(0.9) == doctest::Approx(1.0).epsilon(1e-14));
  for (double t : {0.55, 0.65, 0.8, 0.95}) {
    const double h = 1e-6;
    const double fd = (bump(t + h) - bump(t - h)) / (2 * h);
    CHECK(bump_derivative(t) == doctest::Approx(fd).epsilon(1e-6));
  }
  CHECK(bump_derivative(0.3) == 0.0);
}

TEST_CASE("ring points cover the disk in order") {
  WeightModel m(WeightSpec::classical());
  auto pts = ring_points(m, 2.0, 0.25);
  REQUIRE(pts.size() > 10);
  for (std::size_t i = 1; i < pts.size(); ++i) CHECK(std::abs(pts[i]) >= std::abs(pts[i - 1]) - 1e-12);
  CHECK(std::abs(pts.back()) <= 2.0 + 1e-12);
}

TEST_CASE("lattices are covering and separated") {
  for (const WeightSpec& spec : {WeightSpec::classical(), WeightSpec::gaussian(1.0), WeightSpec::power(4.0, 1.0)}) {
    CAPTURE(spec.describe());
    WeightModel m(spec);
    const double rmax = spec.kind == WeightKind::power ? 1.8 : 3.0;
    Lattice lat = build_lattice(m, 1.0, rmax);
    CHECK(lat.size() > 5);
    for (std::size_t j = 0; j < lat.size(); ++j) CHECK(lat.rho[j] == doctest::Approx(m.rho(lat.centers[j])));
    auto probes = probe_grid(m, rmax, 8.0);
    LatticeCheck chk = verify_lattice(lat, probes);
    CHECK(chk.covered);
    CHECK(chk.disjoint);
    CHECK(chk.worst_separation >= -1e-9);
    CoverCount cc = covering_multiplicity(lat, 2.0, probes);
    CHECK(cc.min >= 1);
    CHECK(cc.max < 60);
  }
}

TEST_CASE("partition of unity") {
  WeightModel m(WeightSpec::power(4.0, 1.0));
  const double r = 0.5, mm = 0.5;
  auto lat = std::make_shared<Lattice>(build_lattice(m, mm * r / 2.0, 1.6));
  auto probes = probe_grid(m, 1.2, 4.0);
  Partition part = build_partition(m, lat, mm, probes);
  CHECK(part.fit_scale() == doctest::Approx(r));
  PartitionStats st = partition_stats(part, probes);
  CHECK(st.max_sum_error <= 1e-12);
  CHECK(st.max_dbar_sum <= 1e-10);
  CHECK(st.max_support_violation == 0.0);
  CHECK(std::isfinite(st.c_partition));
  CHECK(st.c_partition > 0.0);

  // dbar psi against a finite difference of psi
  const cplx z{0.41, 0.23};
  const double h = 1e-6;
  auto psi_at = [&](cplx w, int j) {
    for (auto& t : part.eval(w))
      if (t.j == j) return t.psi;
    return 0.0;
  };
  for (auto& t : part.eval(z)) {
    const double dx = (psi_at(z + h, t.j) - psi_at(z - h, t.j)) / (2 * h);
    const double dy = (psi_at(z + cplx{0, h}, t.j) - psi_at(z - cplx{0, h}, t.j)) / (2 * h);
    CHECK(std::abs(t.dbar_psi - 0.5 * cplx{dx, dy}) <= 1e-5 * (1.0 + std::abs(t.dbar_psi)));
  }
}

TEST_CASE("d_phi estimate on the classical weight") {
  WeightModel m(WeightSpec::classical());
  const cplx z{0.0, 0.0}, w{1.3, 0.4};
  const double exact = std::abs(z - w) / m.rho(z);
  const double est = d_phi_estimate(m, z, w, 0.05);
  CHECK(est >= exact - 1e-9);
  CHECK(est <= 1.09 * exact);
}

TEST_CASE("disk index visits all candidates") {
  DiskIndex idx(0.01);
  idx.insert(0, {0.0, 0.0}, 0.5);
  idx.insert(1, {3.0, 0.0}, 0.05);
  idx.insert(2, {10.0, 10.0}, 4.0);
  CHECK(idx.size() == 3);
  std::vector<int> hit;
  idx.visit({0.2, 0.1}, 0.0, [&](int id) { hit.push_back(id); });
  CHECK(std::find(hit.begin(), hit.end(), 0) != hit.end());
  hit.clear();
  idx.visit({7.5, 8.0}, 0.0, [&](int id) { hit.push_back(id); });
  CHECK(std::find(hit.begin(), hit.end(), 2) != hit.end());
}
