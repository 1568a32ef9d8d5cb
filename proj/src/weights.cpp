#include "dfock/weights.hpp"

#include <cstdint>
#include <limits>
#include <mutex>
#include <shared_mutex>
#include <sstream>
#include <unordered_map>

namespace dfock {

WeightSpec WeightSpec::gaussian(double a) {
  WeightSpec s;
  s.kind = WeightKind::gaussian;
  s.a = a;
  return s;
}

WeightSpec WeightSpec::power(double m, double c) {
  WeightSpec s;
  s.kind = WeightKind::power;
  s.m = m;
  s.c = c;
  return s;
}

WeightSpec WeightSpec::custom_radial(std::vector<double> r, std::vector<double> lap) {
  WeightSpec s;
  s.kind = WeightKind::custom_radial;
  s.profile_r = std::move(r);
  s.profile_lap = std::move(lap);
  return s;
}

WeightSpec WeightSpec::custom_planar(PlanarGrid grid) {
  WeightSpec s;
  s.kind = WeightKind::custom_planar;
  s.planar = std::move(grid);
  return s;
}

namespace {

void require_profile(const std::vector<double>& v) {
  bool any_positive = false;
  for (double x : v) {
    if (!std::isfinite(x) || x < 0.0) throw ConfigError("weight profile has a negative or non-finite sample");
    any_positive = any_positive || x > 0.0;
  }
  if (!any_positive) throw ConfigError("weight profile is identically zero");
}

}  // namespace

void WeightSpec::validate() const {
  switch (kind) {
    case WeightKind::gaussian:
      if (!(a > 0.0) || !std::isfinite(a)) throw ConfigError("gaussian weight: scale a must be positive");
      break;
    case WeightKind::power:
      if (!(m > 0.0) || !std::isfinite(m)) throw ConfigError("power weight: exponent m must be positive");
      if (!(c > 0.0) || !std::isfinite(c)) throw ConfigError("power weight: coefficient c must be positive");
      break;
    case WeightKind::custom_radial:
      if (profile_r.size() < 2 || profile_r.size() != profile_lap.size())
        throw ConfigError("custom_radial weight: need >= 2 (r, laplacian) samples");
      for (std::size_t i = 0; i < profile_r.size(); ++i) {
        if (profile_r[i] < 0.0 || (i > 0 && profile_r[i] <= profile_r[i - 1]))
          throw ConfigError("custom_radial weight: radii must be nonnegative and strictly increasing");
      }
      require_profile(profile_lap);
      break;
    case WeightKind::custom_planar:
      if (planar.nx < 2 || planar.ny < 2 || !(planar.h > 0.0) ||
          planar.values.size() != static_cast<std::size_t>(planar.nx) * planar.ny)
        throw ConfigError("custom_planar weight: malformed grid");
      require_profile(planar.values);
      break;
  }
}

std::string WeightSpec::describe() const {
  std::ostringstream os;
  os.precision(17);
  switch (kind) {
    case WeightKind::gaussian: os << "gaussian(a=" << a << ")"; break;
    case WeightKind::power: os << "power(m=" << m << ",c=" << c << ")"; break;
    case WeightKind::custom_radial: os << "custom_radial(" << profile_r.size() << " nodes)"; break;
    case WeightKind::custom_planar: os << "custom_planar(" << planar.nx << "x" << planar.ny << ")"; break;
  }
  return os.str();
}

// Piecewise-linear radial Laplacian profile with constant extension on both
// sides, integrated twice to recover phi(r) = int_0^r M(s)/s ds with
// M(s) = int_0^s Lap(t) t dt.
class RadialProfile {
 public:
  RadialProfile() = default;
  RadialProfile(const std::vector<double>& r, const std::vector<double>& lap) {
    if (r.front() > 0.0) {
      knots_.push_back(0.0);
      lap_.push_back(lap.front());
    }
    knots_.insert(knots_.end(), r.begin(), r.end());
    lap_.insert(lap_.end(), lap.begin(), lap.end());
    m_.assign(knots_.size(), 0.0);
    phi_.assign(knots_.size(), 0.0);
    for (std::size_t i = 0; i + 1 < knots_.size(); ++i) {
      m_[i + 1] = moment(i, knots_[i + 1]);
      phi_[i + 1] = phi_[i] + phi_increment(i, knots_[i + 1]);
    }
  }

  double laplacian(double r) const {
    if (r <= knots_.front()) return lap_.front();
    if (r >= knots_.back()) return lap_.back();
    const std::size_t i = segment(r);
    const double t = (r - knots_[i]) / (knots_[i + 1] - knots_[i]);
    return lap_[i] + t * (lap_[i + 1] - lap_[i]);
  }

  double dphi(double r) const {
    if (r <= 0.0) return 0.0;
    return moment_at(r) / r;
  }

  double phi(double r) const {
    if (r <= 0.0) return 0.0;
    const std::size_t n = knots_.size() - 1;
    if (r >= knots_[n]) {
      const double tn = knots_[n];
      const double ln = lap_[n];
      return phi_[n] + (m_[n] - 0.5 * ln * tn * tn) * std::log(r / tn) + 0.25 * ln * (r * r - tn * tn);
    }
    const std::size_t i = segment(r);
    return phi_[i] + phi_increment(i, r);
  }

 private:
  std::vector<double> knots_, lap_, m_, phi_;

  std::size_t segment(double r) const {
    auto it = std::upper_bound(knots_.begin(), knots_.end(), r);
    return static_cast<std::size_t>(std::distance(knots_.begin(), it)) - 1;
  }

  // M(s) for s in segment i, Lap = alpha + beta t there.
  double moment(std::size_t i, double s) const {
    const double t0 = knots_[i], t1 = knots_[i + 1];
    const double beta = (lap_[i + 1] - lap_[i]) / (t1 - t0);
    const double alpha = lap_[i] - beta * t0;
    return m_[i] + alpha * (s * s - t0 * t0) / 2.0 + beta * (s * s * s - t0 * t0 * t0) / 3.0;
  }

  double moment_at(double r) const {
    const std::size_t n = knots_.size() - 1;
    if (r >= knots_[n]) return m_[n] + 0.5 * lap_[n] * (r * r - knots_[n] * knots_[n]);
    return moment(segment(r), r);
  }

  double phi_increment(std::size_t i, double s) const {
    const double t0 = knots_[i];
    if (s <= t0) return 0.0;
    return integrate_panels([&](double t) { return t > 0.0 ? moment(i, t) / t : 0.0; }, t0, s, 1, 16);
  }
};

struct WeightModel::Impl {
  struct KeyHash {
    std::size_t operator()(const std::pair<std::int64_t, std::int64_t>& k) const noexcept {
      const auto a = static_cast<std::uint64_t>(k.first);
      const auto b = static_cast<std::uint64_t>(k.second);
      return std::hash<std::uint64_t>{}(a * 0x9E3779B97F4A7C15ULL ^ (b + 0x7F4A7C15ULL + (a << 6) + (a >> 2)));
    }
  };
  mutable std::shared_mutex mutex;
  std::unordered_map<std::pair<std::int64_t, std::int64_t>, double, KeyHash> cache;
  RadialProfile profile;
};

WeightModel::WeightModel(WeightSpec spec, WeightOptions opts)
    : spec_(std::move(spec)), opts_(opts), impl_(std::make_shared<Impl>()) {
  spec_.validate();
  if (!(opts_.rho_tol > 0.0)) throw ConfigError("rho_tol must be positive");
  if (opts_.quad.n_rad < 2 || opts_.quad.n_ang < 4) throw ConfigError("weight quadrature too coarse");
  if (spec_.kind == WeightKind::custom_radial) impl_->profile = RadialProfile(spec_.profile_r, spec_.profile_lap);
}

WeightModel build_weight_model(const WeightSpec& spec, const DiskQuad& quad, double rho_tol) {
  WeightOptions opts;
  opts.quad = quad;
  opts.rho_tol = rho_tol;
  return WeightModel(spec, opts);
}

double WeightModel::phi_radial(double r) const {
  switch (spec_.kind) {
    case WeightKind::gaussian: return spec_.a * r * r;
    case WeightKind::power: return spec_.c * std::pow(r, spec_.m);
    case WeightKind::custom_radial: return impl_->profile.phi(r);
    case WeightKind::custom_planar: break;
  }
  throw ConfigError("phi is not available for custom_planar weights");
}

double WeightModel::dphi_radial(double r) const {
  switch (spec_.kind) {
    case WeightKind::gaussian: return 2.0 * spec_.a * r;
    case WeightKind::power: return spec_.c * spec_.m * std::pow(r, spec_.m - 1.0);
    case WeightKind::custom_radial: return impl_->profile.dphi(r);
    case WeightKind::custom_planar: break;
  }
  throw ConfigError("phi is not available for custom_planar weights");
}

double WeightModel::phi(cplx z) const { return phi_radial(std::abs(z)); }

double WeightModel::laplacian_radial(double r) const {
  switch (spec_.kind) {
    case WeightKind::gaussian: return 4.0 * spec_.a;
    case WeightKind::power: return spec_.c * spec_.m * spec_.m * std::pow(r, spec_.m - 2.0);
    case WeightKind::custom_radial: return impl_->profile.laplacian(r);
    case WeightKind::custom_planar: break;
  }
  return laplacian(cplx(r, 0.0));
}

double WeightModel::laplacian(cplx z) const {
  if (spec_.kind != WeightKind::custom_planar) return laplacian_radial(std::abs(z));
  const PlanarGrid& g = spec_.planar;
  const double fx = (z.real() - g.x0) / g.h;
  const double fy = (z.imag() - g.y0) / g.h;
  if (fx < 0.0 || fy < 0.0 || fx > g.nx - 1 || fy > g.ny - 1)
    throw NumericalError("point outside the custom_planar weight grid");
  const int ix = std::min(static_cast<int>(fx), g.nx - 2);
  const int iy = std::min(static_cast<int>(fy), g.ny - 2);
  const double tx = fx - ix, ty = fy - iy;
  auto at = [&](int i, int j) { return g.values[static_cast<std::size_t>(j) * g.nx + i]; };
  return (1 - tx) * (1 - ty) * at(ix, iy) + tx * (1 - ty) * at(ix + 1, iy) + (1 - tx) * ty * at(ix, iy + 1) +
         tx * ty * at(ix + 1, iy + 1);
}

double WeightModel::mu_disk(cplx z, double r) const {
  if (!(r > 0.0)) throw ConfigError("mu_disk: radius must be positive");
  if (spec_.kind == WeightKind::custom_planar && r < spec_.planar.h)
    throw NumericalError("mu_disk: custom_planar grid is coarser than the disk radius");
  const DiskRule& rule = disk_rule(opts_.quad.n_rad, opts_.quad.n_ang);
  CompensatedSum<double> acc;
  for (Eigen::Index i = 0; i < rule.points.size(); ++i) acc.add(rule.weights[i] * laplacian(z + r * rule.points[i]));
  return r * r * acc.value();
}

double WeightModel::rho(cplx z) const {
  const double q = opts_.cache_quantum;
  std::pair<std::int64_t, std::int64_t> key;
  cplx at;
  if (radial()) {
    key = {std::llround(std::abs(z) / q), 0};
    at = cplx(key.first * q, 0.0);
  } else {
    key = {std::llround(z.real() / q), std::llround(z.imag() / q)};
    at = cplx(key.first * q, key.second * q);
  }
  {
    std::shared_lock lock(impl_->mutex);
    auto it = impl_->cache.find(key);
    if (it != impl_->cache.end()) return it->second;
  }
  const double value = solve_rho(at);
  std::unique_lock lock(impl_->mutex);
  impl_->cache.emplace(key, value);
  return value;
}

std::size_t WeightModel::cache_size() const {
  std::shared_lock lock(impl_->mutex);
  return impl_->cache.size();
}

// Bracket expansion in r, then a bracketed Illinois iteration on
// (log r, log mu) with a bisection step whenever the secant stalls.
double WeightModel::solve_rho(cplx z) const {
  const double tol = opts_.rho_tol;
  const int max_iter = opts_.max_iter;
  const double lap = laplacian(z);
  double r = (lap > 0.0 && std::isfinite(lap)) ? 1.0 / std::sqrt(kPi * lap) : 1.0;
  if (spec_.kind == WeightKind::custom_planar) r = std::max(r, spec_.planar.h);

  double mu = mu_disk(z, r);
  if (std::abs(mu - 1.0) <= tol) return r;
  double lo, hi, mlo, mhi;
  int iter = 0;
  if (mu < 1.0) {
    lo = r, mlo = mu;
    hi = 2.0 * r;
    while ((mhi = mu_disk(z, hi)) < 1.0) {
      lo = hi, mlo = mhi;
      hi *= 2.0;
      if (++iter > max_iter) throw NumericalError("rho: bracket expansion exceeded the iteration cap");
    }
  } else {
    hi = r, mhi = mu;
    lo = 0.5 * r;
    while ((mlo = mu_disk(z, lo)) >= 1.0) {
      hi = lo, mhi = mlo;
      lo *= 0.5;
      if (++iter > max_iter) throw NumericalError("rho: bracket expansion exceeded the iteration cap");
    }
  }
  if (std::abs(mhi - 1.0) <= tol) return hi;

  // g(x) = log mu(e^x); root of g in [log lo, log hi].
  double xa = std::log(lo), xb = std::log(hi);
  double ga = mlo > 0.0 ? std::log(mlo) : -745.0;
  double gb = std::log(mhi);
  int side = 0;
  for (int it = 0; it < max_iter; ++it) {
    double x = (ga > -700.0) ? (xa * gb - xb * ga) / (gb - ga) : 0.5 * (xa + xb);
    if (!(x > xa && x < xb)) x = 0.5 * (xa + xb);
    if (it % 4 == 3) x = 0.5 * (xa + xb);
    const double rx = std::exp(x);
    const double mx = mu_disk(z, rx);
    if (std::abs(mx - 1.0) <= tol) return rx;
    const double gx = mx > 0.0 ? std::log(mx) : -745.0;
    if (gx < 0.0) {
      xa = x, ga = gx;
      if (side == -1) gb *= 0.5;
      side = -1;
    } else {
      xb = x, gb = gx;
      if (side == 1) ga *= 0.5;
      side = 1;
    }
    if (xb - xa <= 1e-15 * std::max(1.0, std::abs(xb))) {
      const double rm = std::exp(0.5 * (xa + xb));
      if (std::abs(mu_disk(z, rm) - 1.0) <= 100.0 * tol) return rm;
      break;
    }
  }
  throw NumericalError("rho: root finder did not reach rho_tol");
}

DoublingReport doubling_diagnostic(const WeightModel& model, std::span<const cplx> points,
                                   std::span<const double> radii) {
  if (points.size() < 2) throw ConfigError("doubling_diagnostic: need at least two sample points");
  DoublingReport rep;
  rep.samples = points.size();
  for (const cplx& z : points) {
    for (double r : radii) {
      const double small = model.mu_disk(z, r);
      if (small > 0.0) rep.c_dbl = std::max(rep.c_dbl, model.mu_disk(z, 2.0 * r) / small);
    }
  }
  std::vector<double> rh(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) rh[i] = model.rho(points[i]);
  double worst = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i)
    for (std::size_t j = i + 1; j < points.size(); ++j)
      worst = std::max(worst, std::abs(rh[i] - rh[j]) - std::abs(points[i] - points[j]));
  rep.lipschitz_violation = worst;

  // Envelopes of log rho over equal bins in log|z| (|z| > 1).
  double lmin = std::numeric_limits<double>::infinity(), lmax = -lmin;
  for (const cplx& z : points)
    if (std::abs(z) > 1.0) {
      lmin = std::min(lmin, std::log(std::abs(z)));
      lmax = std::max(lmax, std::log(std::abs(z)));
    }
  if (!(lmax > lmin)) {
    rep.eta_hat = rep.beta_hat = std::numeric_limits<double>::quiet_NaN();
    return rep;
  }
  const int bins = 8;
  std::vector<double> lo(bins, std::numeric_limits<double>::infinity()), hi(bins, -lo[0]);
  std::vector<double> center(bins);
  std::vector<int> used(bins, 0);
  for (std::size_t i = 0; i < points.size(); ++i) {
    const double az = std::abs(points[i]);
    if (az <= 1.0) continue;
    const double l = std::log(az);
    const int b = std::min(bins - 1, static_cast<int>((l - lmin) / (lmax - lmin) * bins));
    lo[b] = std::min(lo[b], std::log(rh[i]));
    hi[b] = std::max(hi[b], std::log(rh[i]));
    center[b] += l;
    ++used[b];
  }
  auto slope = [&](const std::vector<double>& y) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = 0;
    for (int b = 0; b < bins; ++b) {
      if (!used[b]) continue;
      const double x = center[b] / used[b];
      sx += x, sy += y[b], sxx += x * x, sxy += x * y[b];
      ++n;
    }
    if (n < 2) return std::numeric_limits<double>::quiet_NaN();
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
  };
  rep.beta_hat = slope(hi);
  rep.eta_hat = -slope(lo);
  return rep;
}

}  // namespace dfock
