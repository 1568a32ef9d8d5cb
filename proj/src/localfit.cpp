#include "dfock/localfit.hpp"

namespace dfock {

namespace {

Eigen::VectorXcd sample(const Symbol& f, cplx z, double R, const DiskRule& rule) {
  Eigen::VectorXcd values(rule.points.size());
  for (Eigen::Index i = 0; i < values.size(); ++i) values[i] = f(z + R * rule.points[i]);
  return values;
}

double weighted_mean_sq(const Eigen::VectorXcd& v, const Eigen::VectorXd& w) {
  CompensatedSum<double> acc;
  for (Eigen::Index i = 0; i < v.size(); ++i) acc.add(w[i] * std::norm(v[i]));
  return acc.value() / kPi;
}

// Projection coefficients of sampled values onto u^k, k <= K.
Eigen::VectorXcd project(const Eigen::VectorXcd& values, const DiskRule& rule, int K) {
  const Eigen::VectorXcd weighted = rule.weights.cast<cplx>().cwiseProduct(values);
  Eigen::VectorXcd c = rule.powers.leftCols(K + 1).adjoint() * weighted;
  for (int k = 0; k <= K; ++k) c[k] *= (k + 1) / kPi;
  return c;
}

double residual_at(const Eigen::VectorXcd& values, const Eigen::VectorXcd& c, const DiskRule& rule, int K) {
  const Eigen::VectorXcd r = values - rule.powers.leftCols(K + 1) * c.head(K + 1);
  return std::sqrt(weighted_mean_sq(r, rule.weights));
}

const DiskRule& checked_rule(const DiskQuad& quad, int K) {
  if (K < 0) throw ConfigError("local fit: degree must be nonnegative");
  const DiskRule& rule = disk_rule(quad.n_rad, quad.n_ang);
  if (K > rule.max_degree)
    throw NumericalError("local fit: degree exceeds what the disk quadrature resolves");
  return rule;
}

}  // namespace

cplx DiskFit::coeff(int k) const { return scaled_coeffs[k] / std::pow(radius, k); }

cplx DiskFit::operator()(cplx w) const {
  const cplx u = (w - center) / radius;
  cplx acc = 0.0;
  for (Eigen::Index k = scaled_coeffs.size() - 1; k >= 0; --k) acc = acc * u + scaled_coeffs[k];
  return acc;
}

cplx DiskFit::derivative(cplx w) const {
  const cplx u = (w - center) / radius;
  cplx acc = 0.0;
  for (Eigen::Index k = scaled_coeffs.size() - 1; k >= 1; --k) acc = acc * u + double(k) * scaled_coeffs[k];
  return acc / radius;
}

DiskFit disk_projection(const Symbol& f, cplx z, double R, int K, const DiskQuad& quad) {
  if (!(R > 0.0)) throw ConfigError("disk_projection: radius must be positive");
  const DiskRule& rule = checked_rule(quad, K);
  const Eigen::VectorXcd values = sample(f, z, R, rule);
  DiskFit fit;
  fit.center = z;
  fit.radius = R;
  fit.degree = K;
  fit.quad = quad;
  fit.scaled_coeffs = project(values, rule, K);
  fit.mean_abs_sq = weighted_mean_sq(values, rule.weights);
  if (!std::isfinite(fit.mean_abs_sq)) throw NumericalError("disk_projection: quadrature overflow");
  double captured = 0.0;
  for (int k = 0; k <= K; ++k) captured += std::norm(fit.scaled_coeffs[k]) / (k + 1);
  fit.gap_residual_sq = fit.mean_abs_sq - captured;
  fit.clamped = fit.gap_residual_sq < 0.0;
  fit.residual = residual_at(values, fit.scaled_coeffs, rule, K);
  return fit;
}

DiskFit lsq_oracle(const Symbol& f, cplx z, double R, int K, const DiskQuad& quad) {
  if (!(R > 0.0)) throw ConfigError("lsq_oracle: radius must be positive");
  const DiskRule& rule = checked_rule(quad, K);
  const Eigen::Index n = rule.points.size();
  Eigen::MatrixXcd A(n, K + 1);
  Eigen::VectorXcd b(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const cplx w = z + R * rule.points[i];
    const cplx u = (w - z) / R;
    const double sw = std::sqrt(rule.weights[i]);
    cplx pw = sw;
    for (int k = 0; k <= K; ++k) {
      A(i, k) = pw;
      pw *= u;
    }
    b[i] = sw * f(w);
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXcd> qr(A);
  DiskFit fit;
  fit.center = z;
  fit.radius = R;
  fit.degree = K;
  fit.quad = quad;
  fit.scaled_coeffs = qr.solve(b);
  const auto diag = qr.matrixR().diagonal().cwiseAbs();
  fit.condition = diag.maxCoeff() / diag.minCoeff();
  if (!std::isfinite(fit.condition) || fit.condition > 1e12)
    throw NumericalError("lsq_oracle: normal equations are ill-conditioned");
  fit.mean_abs_sq = b.squaredNorm() / kPi;
  fit.residual = std::sqrt((A * fit.scaled_coeffs - b).squaredNorm() / kPi);
  fit.gap_residual_sq = fit.residual * fit.residual;
  return fit;
}

double G2_disk(const Symbol& f, cplx z, double R, const LocalOptions& opts) {
  if (opts.use_holomorphy && f.holomorphic_on_disk(z, R)) return 0.0;
  const int top = opts.escalate ? std::max(opts.K_max, opts.K + 4) : opts.K;
  const DiskRule& rule = checked_rule(opts.quad, top);
  const Eigen::VectorXcd values = sample(f, z, R, rule);
  const double rms = std::sqrt(weighted_mean_sq(values, rule.weights));
  if (!std::isfinite(rms)) throw NumericalError("G2: quadrature overflow");
  const Eigen::VectorXcd c = project(values, rule, top);
  double res = residual_at(values, c, rule, opts.K);
  if (opts.escalate) {
    const double next = residual_at(values, c, rule, opts.K + 4);
    if (res - next > opts.escalate_drop) res = residual_at(values, c, rule, opts.K_max);
  }
  return res <= opts.zero_floor * rms ? 0.0 : res;
}

double G2(const Symbol& f, const WeightModel& model, cplx z, double r, const LocalOptions& opts) {
  if (!(r > 0.0)) throw ConfigError("G2: r must be positive");
  return G2_disk(f, z, r * model.rho(z), opts);
}

cplx disk_mean(const Symbol& f, cplx z, double R, const DiskQuad& quad) {
  const DiskRule& rule = disk_rule(quad.n_rad, quad.n_ang);
  CompensatedSum<cplx> acc;
  for (Eigen::Index i = 0; i < rule.points.size(); ++i) acc.add(rule.weights[i] * f(z + R * rule.points[i]));
  return acc.value() / kPi;
}

cplx f_hat(const Symbol& f, const WeightModel& model, cplx z, double r, const DiskQuad& quad) {
  if (!(r > 0.0)) throw ConfigError("f_hat: r must be positive");
  return disk_mean(f, z, r * model.rho(z), quad);
}

double MO2_disk(const Symbol& f, cplx z, double R, const LocalOptions& opts) {
  const DiskRule& rule = disk_rule(opts.quad.n_rad, opts.quad.n_ang);
  Eigen::VectorXcd values = sample(f, z, R, rule);
  const double rms = std::sqrt(weighted_mean_sq(values, rule.weights));
  CompensatedSum<cplx> acc;
  for (Eigen::Index i = 0; i < values.size(); ++i) acc.add(rule.weights[i] * values[i]);
  values.array() -= acc.value() / kPi;
  const double mo = std::sqrt(weighted_mean_sq(values, rule.weights));
  return mo <= opts.zero_floor * rms ? 0.0 : mo;
}

double MO2(const Symbol& f, const WeightModel& model, cplx z, double r, const LocalOptions& opts) {
  if (!(r > 0.0)) throw ConfigError("MO2: r must be positive");
  return MO2_disk(f, z, r * model.rho(z), opts);
}

}  // namespace dfock
