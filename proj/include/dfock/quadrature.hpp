#pragma once

#include <Eigen/Dense>

#include "dfock/core.hpp"

namespace dfock {

/// Gauss-Legendre rule on [-1, 1].
struct GaussRule {
  Eigen::VectorXd nodes;
  Eigen::VectorXd weights;
};

/// Cached n-point rule; references stay valid for the program lifetime.
const GaussRule& gauss_legendre(int n);

/// Polar product rule on the unit disk: Gauss-Legendre in the radius
/// (with the Jacobian s folded into the weights) times an equispaced
/// trapezoidal rule in the angle, offset by half a step. Weights sum to pi.
///
/// `powers(i, k) = points(i)^k` for k <= max_degree, where max_degree is the
/// largest degree for which the monomials stay exactly orthogonal under the
/// discrete rule.
struct DiskRule {
  int n_rad = 0;
  int n_ang = 0;
  int max_degree = 0;
  Eigen::VectorXcd points;
  Eigen::VectorXd weights;
  Eigen::MatrixXcd powers;
};

const DiskRule& disk_rule(int n_rad, int n_ang);

struct DiskQuad {
  int n_rad = 48;
  int n_ang = 96;
};

/// Integrates fn over [a, b] with `panels` equal panels of an n-point rule.
template <typename Fn>
auto integrate_panels(Fn&& fn, double a, double b, int panels, int n) {
  using R = std::invoke_result_t<Fn, double>;
  const GaussRule& g = gauss_legendre(n);
  CompensatedSum<R> acc;
  const double h = (b - a) / panels;
  for (int p = 0; p < panels; ++p) {
    const double lo = a + p * h;
    const double mid = lo + 0.5 * h;
    for (int i = 0; i < n; ++i) acc.add(R(0.5 * h * g.weights[i]) * fn(mid + 0.5 * h * g.nodes[i]));
  }
  return acc.value();
}

}  // namespace dfock
