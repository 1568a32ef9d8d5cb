#pragma once

#include <Eigen/Dense>

#include "dfock/quadrature.hpp"
#include "dfock/symbols.hpp"
#include "dfock/weights.hpp"

namespace dfock {

/// Best L^2(D(center, radius), dA) approximation of a symbol by a
/// polynomial of degree `degree` in (w - center).
struct DiskFit {
  cplx center = 0.0;
  double radius = 1.0;
  int degree = 0;
  DiskQuad quad;
  /// Coefficients of ((w - center) / radius)^k; natural coefficients are
  /// scaled_coeffs[k] / radius^k.
  Eigen::VectorXcd scaled_coeffs;
  /// Root mean square of f - h over the disk (the numerical G_2).
  double residual = 0.0;
  double mean_abs_sq = 0.0;
  /// mean|f|^2 - sum_k |c_k|^2 pi R^{2k+2}/(k+1) / (pi R^2) before clamping.
  double gap_residual_sq = 0.0;
  bool clamped = false;
  /// Ratio of extreme |R_kk| in the oracle's QR factorisation (1 for the projection).
  double condition = 1.0;

  cplx coeff(int k) const;
  cplx operator()(cplx w) const;
  /// d/dw of the fitted polynomial.
  cplx derivative(cplx w) const;
};

/// Orthogonal projection onto span{(w - z)^k : k <= K} using monomial
/// orthogonality on the disk. Residual is evaluated directly from f - h on
/// the nodes; the Pythagorean gap is kept in `gap_residual_sq`.
DiskFit disk_projection(const Symbol& f, cplx z, double R, int K, const DiskQuad& quad = {});

/// Independent route to the same fit: weighted least squares on the
/// quadrature nodes solved by column-pivoted Householder QR.
DiskFit lsq_oracle(const Symbol& f, cplx z, double R, int K, const DiskQuad& quad = {});

struct LocalOptions {
  int K = 12;
  int K_max = 24;
  bool escalate = true;
  double escalate_drop = 1e-6;
  DiskQuad quad{48, 96};
  /// Values below zero_floor * rms(f) on the disk are reported as 0.
  double zero_floor = 1e-12;
  /// Return 0 straight away on disks where the symbol is known holomorphic.
  bool use_holomorphy = true;
};

/// G_{2,r}(f)(z): residual of the local fit on D(z, r rho(z)).
double G2(const Symbol& f, const WeightModel& model, cplx z, double r, const LocalOptions& opts = {});
/// Same on an explicit disk D(z, R).
double G2_disk(const Symbol& f, cplx z, double R, const LocalOptions& opts = {});

/// Mean of f over D(z, r rho(z)).
cplx f_hat(const Symbol& f, const WeightModel& model, cplx z, double r, const DiskQuad& quad = {});
cplx disk_mean(const Symbol& f, cplx z, double R, const DiskQuad& quad = {});

/// MO_{2,r}(f)(z): root mean square deviation of f from its disk mean.
double MO2(const Symbol& f, const WeightModel& model, cplx z, double r, const LocalOptions& opts = {});
double MO2_disk(const Symbol& f, cplx z, double R, const LocalOptions& opts = {});

}  // namespace dfock
