#include "dfock/fockops.hpp"

#include <numeric>
#include <sstream>

#include "dfock/quadrature.hpp"

namespace dfock {

namespace {

void require_radial(const WeightModel& model, const char* who) {
  if (!model.radial()) throw ConfigError(std::string(who) + ": operator computations need a radial weight");
}

struct Exponent {
  const WeightModel& model;
  double s;
  double E(double u) const { return (s + 1.0) * u - 2.0 * model.phi_radial(std::exp(u)); }
  double dE(double u) const {
    const double r = std::exp(u);
    return s + 1.0 - 2.0 * r * model.dphi_radial(r);
  }
  // Panel width: the local Gaussian width, shrunk where the exponent is steep.
  double width(double u, double factor) const {
    const double r = std::exp(u);
    const double lap = model.laplacian_radial(r);
    double w = lap > 0.0 ? 1.0 / (r * std::sqrt(2.0 * lap)) : 1.0;
    const double slope = std::abs(dE(u));
    if (slope > 0.0) w = std::min(w, 4.0 / slope);
    return std::max(factor * std::min(w, 1.0), 1e-7);
  }
};

double peak(const Exponent& ex, double ulo, double uhi) {
  if (std::isfinite(ulo) && ex.dE(ulo) <= 0.0) return ulo;
  if (std::isfinite(uhi) && ex.dE(uhi) >= 0.0) return uhi;
  double a = std::isfinite(ulo) ? ulo : std::min(0.0, uhi);
  for (int i = 0; ex.dE(a) <= 0.0; ++i) {
    if (i > 60) throw NumericalError("radial_integral: integrand not integrable at the origin");
    a -= std::ldexp(1.0, i);
  }
  double b = std::isfinite(uhi) ? uhi : std::max(1.0, a + 1.0);
  for (int i = 0; ex.dE(b) >= 0.0; ++i) {
    if (i > 12) throw NumericalError("radial_integral: weight does not confine the integrand");
    b += std::ldexp(1.0, i);
  }
  for (int it = 0; it < 200 && b - a > 1e-13 * std::max(1.0, std::abs(a)); ++it) {
    const double mid = 0.5 * (a + b);
    (ex.dE(mid) > 0.0 ? a : b) = mid;
  }
  return 0.5 * (a + b);
}

}  // namespace

Scaled radial_integral(const WeightModel& model, double s, const std::function<cplx(double)>& g, double lo,
                       double hi, const std::vector<double>& breaks, const RadialQuad& quad) {
  require_radial(model, "radial_integral");
  if (!(hi > lo) || lo < 0.0) return {};
  const Exponent ex{model, s};
  const double ulo = lo > 0.0 ? std::log(lo) : -std::numeric_limits<double>::infinity();
  const double uhi = std::isfinite(hi) ? std::log(hi) : std::numeric_limits<double>::infinity();
  const double u0 = peak(ex, ulo, uhi);
  const double emax = ex.E(u0);

  std::vector<double> edges{u0};
  for (int dir : {1, -1}) {
    double u = u0;
    for (int count = 0;; ++count) {
      if (count > 200000) throw NumericalError("radial_integral: panel walk did not terminate");
      const double bound = dir > 0 ? uhi : ulo;
      if (u == bound) break;
      double next = u + dir * ex.width(u, quad.width);
      if ((dir > 0 && next >= bound) || (dir < 0 && next <= bound)) next = bound;
      edges.push_back(next);
      u = next;
      if (ex.E(u) < emax - quad.depth) break;
    }
  }
  const double first = *std::min_element(edges.begin(), edges.end());
  const double last = *std::max_element(edges.begin(), edges.end());
  for (double b : breaks)
    if (b > 0.0 && std::log(b) > first && std::log(b) < last) edges.push_back(std::log(b));
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());

  const GaussRule& rule = gauss_legendre(quad.nodes);
  CompensatedSum<cplx> acc;
  for (std::size_t p = 0; p + 1 < edges.size(); ++p) {
    const double a = edges[p], b = edges[p + 1];
    const double half = 0.5 * (b - a), mid = 0.5 * (a + b);
    for (int i = 0; i < quad.nodes; ++i) {
      const double u = mid + half * rule.nodes[i];
      acc.add(half * rule.weights[i] * std::exp(ex.E(u) - emax) * g(std::exp(u)));
    }
  }
  return {acc.value(), emax, std::exp(last)};
}

double BasisTable::log_convexity_defect() const {
  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t n = 1; n + 1 < log_b.size(); ++n)
    worst = std::max(worst, 2.0 * log_b[n] - log_b[n - 1] - log_b[n + 1] - 1e-12 * std::abs(log_b[n]));
  return worst;
}

namespace {

double log_norm(const WeightModel& model, int n, const RadialQuad& quad, double* reach = nullptr) {
  const Scaled v = radial_integral(model, 2.0 * n + 1.0, [](double) { return cplx(1.0); }, 0.0,
                                   std::numeric_limits<double>::infinity(), {}, quad);
  if (!(v.mantissa.real() > 0.0)) throw NumericalError("basis_norms: nonpositive moment");
  if (reach) *reach = std::max(*reach, v.reach);
  return std::log(2.0 * kPi) + std::log(v.mantissa.real()) + v.log_scale;
}

}  // namespace

BasisTable basis_norms(const WeightModel& model, int N, const RadialQuad& quad) {
  require_radial(model, "basis_norms");
  if (N < 0) throw ConfigError("basis_norms: N must be nonnegative");
  BasisTable t{model, N, quad, {}, 0.0};
  t.log_b.resize(N + 1);
  for (int n = 0; n <= N; ++n) t.log_b[n] = log_norm(model, n, quad, &t.radius);
  return t;
}

KernelValue kernel_eval(const BasisTable& basis, cplx w, cplx z) {
  const cplx q = w * std::conj(z);
  KernelValue out;
  if (q == cplx(0.0)) {
    out.value = std::exp(-basis.log_b[0]);
    return out;
  }
  const cplx lq = std::log(q);
  CompensatedSum<cplx> acc;
  double prev = 0.0, last = 0.0;
  for (int n = 0; n <= basis.N; ++n) {
    const cplx term = std::exp(double(n) * lq - basis.log_b[n]);
    acc.add(term);
    prev = last;
    last = std::abs(term);
  }
  out.value = acc.value();
  const double ratio = prev > 0.0 ? last / prev : 0.0;
  out.tail = ratio < 1.0 ? last * ratio / (1.0 - ratio) : std::numeric_limits<double>::infinity();
  if (out.tail > 1e-8 * std::abs(out.value))
    throw NumericalError("kernel_eval: basis truncation too short for this point");
  return out;
}

DecayFit kernel_decay_fit(const BasisTable& basis, cplx z, const std::vector<cplx>& offsets) {
  const WeightModel& model = basis.model;
  const double rz = model.rho(z);
  std::vector<double> xs, ys;
  for (cplx d : offsets) {
    if (d == cplx(0.0)) continue;
    const cplx w = z + d;
    const double k = std::abs(kernel_eval(basis, w, z).value);
    if (!(k > 0.0)) continue;
    xs.push_back(std::abs(d) / rz);
    ys.push_back(std::log(k) + std::log(model.rho(w)) + std::log(rz) - model.phi(w) - model.phi(z));
  }
  if (xs.size() < 3) throw ConfigError("kernel_decay_fit: need at least three nonzero offsets");

  // For fixed epsilon the model y = a - c x^eps is linear in (a, c).
  auto solve = [&](double eps, double& a, double& c) {
    const std::size_t n = xs.size();
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const double t = std::pow(xs[i], eps);
      sx += t, sy += ys[i], sxx += t * t, sxy += t * ys[i];
    }
    const double det = n * sxx - sx * sx;
    const double slope = (n * sxy - sx * sy) / det;
    a = (sy - slope * sx) / n;
    c = -slope;
    double sse = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const double e = ys[i] - (a - c * std::pow(xs[i], eps));
      sse += e * e;
    }
    return sse;
  };
  double best = std::numeric_limits<double>::infinity(), best_eps = 1.0, a = 0, c = 0;
  for (int i = 1; i <= 400; ++i) {
    const double eps = 0.01 * i;
    const double sse = solve(eps, a, c);
    if (sse < best) best = sse, best_eps = eps;
  }
  double lo = std::max(1e-3, best_eps - 0.01), hi = best_eps + 0.01;
  const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
  for (int it = 0; it < 60; ++it) {
    const double m1 = hi - phi * (hi - lo), m2 = lo + phi * (hi - lo);
    if (solve(m1, a, c) < solve(m2, a, c))
      hi = m2;
    else
      lo = m1;
  }
  DecayFit fit;
  fit.epsilon = 0.5 * (lo + hi);
  const double sse = solve(fit.epsilon, a, c);
  fit.C = std::exp(a);
  fit.c = c;
  fit.residual = std::sqrt(sse / xs.size());
  fit.samples = xs.size();
  return fit;
}

Eigen::MatrixXcd GramBlock::dense() const {
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(N + 1, N + 1);
  for (std::size_t b = 0; b < blocks.size(); ++b)
    for (std::size_t i = 0; i < index[b].size(); ++i)
      for (std::size_t j = 0; j < index[b].size(); ++j) m(index[b][i], index[b][j]) = blocks[b](i, j);
  return m;
}

GramBlock GramBlock::leading(int n) const {
  GramBlock out;
  out.N = std::min(n, N);
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    const auto& idx = index[b];
    const auto keep = static_cast<Eigen::Index>(std::upper_bound(idx.begin(), idx.end(), out.N) - idx.begin());
    if (keep == 0) continue;
    out.index.emplace_back(idx.begin(), idx.begin() + keep);
    out.blocks.push_back(blocks[b].topLeftCorner(keep, keep));
  }
  return out;
}

GramBlock hankel_gram(const BasisTable& basis, const Symbol& f, int N) {
  const WeightModel& model = basis.model;
  require_radial(model, "hankel_gram");
  const auto modes_opt = f.modes();
  if (!modes_opt) throw ConfigError("hankel_gram: symbol '" + f.name() + "' has no angular mode decomposition");
  if (f.kind() == SymbolKind::fbeta)
    throw ConfigError("hankel_gram: use the single-mode surrogate for fbeta");
  const std::vector<RadialMode>& modes = *modes_opt;
  if (N < 0) throw ConfigError("hankel_gram: N must be nonnegative");

  int kmax = 0;
  for (const RadialMode& m : modes) kmax = std::max(kmax, m.k);
  std::vector<double> log_b(basis.log_b.begin(), basis.log_b.begin() + std::min(basis.N, N + kmax) + 1);
  for (int n = static_cast<int>(log_b.size()); n <= N + kmax; ++n) log_b.push_back(log_norm(model, n, basis.quad));

  // output mode -> list of (n, mode index)
  std::map<int, std::vector<std::pair<int, int>>> by_output;
  for (int n = 0; n <= N; ++n)
    for (std::size_t i = 0; i < modes.size(); ++i) by_output[n + modes[i].k].push_back({n, static_cast<int>(i)});

  std::vector<int> parent(N + 1);
  std::iota(parent.begin(), parent.end(), 0);
  std::function<int(int)> find = [&](int x) { return parent[x] == x ? x : parent[x] = find(parent[x]); };
  for (const auto& [m, list] : by_output)
    for (const auto& e : list) parent[find(e.first)] = find(list.front().first);

  const double log2pi = std::log(2.0 * kPi);

  // d_{n,i} = <f z^n, z^m> / b_m with m = n + k_i, the projection coefficient
  // in the unnormalised monomial basis.
  std::map<std::pair<int, int>, cplx> proj;
  auto coeff = [&](int n, int i) {
    auto key = std::make_pair(n, i);
    auto it = proj.find(key);
    if (it != proj.end()) return it->second;
    const RadialMode& md = modes[i];
    const int m = n + md.k;
    const Scaled v = radial_integral(model, n + m + 1.0, md.g, md.lo, md.hi, md.breaks, basis.quad);
    const cplx d = v.mantissa * std::exp(v.log_scale + log2pi - log_b[m]);
    proj.emplace(key, d);
    return d;
  };

  std::map<int, std::vector<int>> members;
  for (int n = 0; n <= N; ++n) members[find(n)].push_back(n);
  std::vector<int> slot(N + 1), owner(N + 1);
  GramBlock out;
  out.N = N;
  for (auto& [root, idx] : members) {
    for (std::size_t i = 0; i < idx.size(); ++i) {
      slot[idx[i]] = static_cast<int>(i);
      owner[idx[i]] = static_cast<int>(out.blocks.size());
    }
    out.index.push_back(idx);
    out.blocks.push_back(Eigen::MatrixXcd::Zero(idx.size(), idx.size()));
  }
  // entire symbols: f e_n is already holomorphic, H_f = 0 exactly
  if (f.holomorphic_on_disk(0.0, 1e300)) return out;

  // Each entry integrates the product of the two residuals f e_n - P(f e_n)
  // in the shared output mode directly, so the projection enters only to
  // second order.
  for (const auto& [m, list] : by_output) {
    for (std::size_t a = 0; a < list.size(); ++a) {
      for (std::size_t b = a; b < list.size(); ++b) {
        const auto [n1, i1] = list[a];
        const auto [n2, i2] = list[b];
        const RadialMode& A = modes[i1];
        const RadialMode& B = modes[i2];
        const cplx d1 = m >= 0 ? coeff(n1, i1) : cplx(0.0);
        const cplx d2 = m >= 0 ? coeff(n2, i2) : cplx(0.0);
        double lo = std::max(A.lo, B.lo), hi = std::min(A.hi, B.hi);
        if (m >= 0) lo = 0.0, hi = std::numeric_limits<double>::infinity();
        if (!(hi > lo)) continue;
        std::vector<double> br = A.breaks;
        br.insert(br.end(), B.breaks.begin(), B.breaks.end());
        for (double x : {A.lo, A.hi, B.lo, B.hi})
          if (x > 0.0 && std::isfinite(x)) br.push_back(x);
        const int ka = A.k, kb = B.k;
        auto resid = [](const RadialMode& md, cplx d, int k, double r) {
          cplx v = r >= md.lo && r <= md.hi ? md.g(r) : cplx(0.0);
          if (d != cplx(0.0)) v -= d * std::pow(r, k);
          return v;
        };
        const Scaled v = radial_integral(
            model, n1 + n2 + 1.0,
            [&, d1, d2, ka, kb](double r) { return resid(A, d1, ka, r) * std::conj(resid(B, d2, kb, r)); }, lo, hi,
            br, basis.quad);
        const cplx value = v.mantissa * std::exp(v.log_scale + log2pi - 0.5 * (log_b[n1] + log_b[n2]));
        auto& blk = out.blocks[owner[n1]];
        blk(slot[n1], slot[n2]) += value;
        if (a != b) blk(slot[n2], slot[n1]) += std::conj(value);
      }
    }
  }
  return out;
}

std::vector<double> singular_values(const GramBlock& gram) {
  std::vector<double> sv;
  for (const Eigen::MatrixXcd& blk : gram.blocks) {
    Eigen::VectorXd ev;
    if (blk.rows() == 1) {
      ev = Eigen::VectorXd::Constant(1, blk(0, 0).real());
    } else {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(blk, Eigen::EigenvaluesOnly);
      if (es.info() != Eigen::Success) throw NumericalError("singular_values: eigensolver failed");
      ev = es.eigenvalues();
    }
    for (double e : ev) {
      if (e < -1e-10) throw NumericalError("singular_values: Gram matrix is not positive semidefinite");
      sv.push_back(std::sqrt(std::max(e, 0.0)));
    }
  }
  std::sort(sv.begin(), sv.end(), std::greater<>());
  // residual amplitudes carry ~1e-13 relative error, so anything below the
  // floor is indistinguishable from zero (and would pollute p < 1 sums)
  if (!sv.empty())
    for (double& s : sv)
      if (s < kSvalFloor * sv.front()) s = 0.0;
  return sv;
}

SchattenNorm schatten_quasi_norm(const std::vector<double>& svals, double p) {
  if (!(p > 0.0)) throw ConfigError("schatten_quasi_norm: p must be positive");
  SchattenNorm out;
  CompensatedSum<double> acc;
  out.partial.reserve(svals.size());
  for (double s : svals) {
    acc.add(s > 0.0 ? std::pow(s, p) : 0.0);
    out.partial.push_back(acc.value());
  }
  out.value = std::pow(acc.value(), 1.0 / p);
  return out;
}

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::summable: return "summable";
    case Verdict::diverging: return "diverging";
    case Verdict::converged: return "converged";
    case Verdict::inconclusive: break;
  }
  return "inconclusive";
}

namespace {

double ls_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) sx += x[i], sy += y[i], sxx += x[i] * x[i], sxy += x[i] * y[i];
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace

SchattenReport schatten_report(const BasisTable& basis, const Symbol& f, const std::vector<int>& N_schedule,
                               const std::vector<double>& p_list, const SchattenOptions& opts) {
  if (N_schedule.empty()) throw ConfigError("schatten_report: empty N schedule");
  for (std::size_t i = 1; i < N_schedule.size(); ++i)
    if (N_schedule[i] <= N_schedule[i - 1]) throw ConfigError("schatten_report: N schedule must increase");
  SchattenReport rep;
  rep.symbol = f.name();
  rep.N = N_schedule;
  const GramBlock gram = hankel_gram(basis, f, N_schedule.back());
  std::vector<std::vector<double>> svals;
  for (int n : N_schedule) svals.push_back(singular_values(gram.leading(n)));
  rep.svals = svals.back();

  for (double p : p_list) {
    SchattenTrace tr;
    tr.p = p;
    for (const auto& sv : svals) tr.sums.push_back(std::pow(schatten_quasi_norm(sv, p).value, p));
    const std::size_t k = tr.sums.size();
    if (k >= 2) {
      std::vector<double> lnN;
      for (int n : N_schedule) lnN.push_back(std::log(double(n)));
      tr.log_slope = ls_slope(lnN, tr.sums);
      const double last_inc = tr.sums[k - 1] - tr.sums[k - 2];
      if (last_inc <= opts.converge_tol * std::max(1.0, tr.sums.back())) {
        tr.verdict = Verdict::summable;
      } else if (k >= 3) {
        std::vector<double> x, y;
        for (std::size_t i = 1; i < k; ++i) {
          const double inc = tr.sums[i] - tr.sums[i - 1];
          if (inc > 0.0) x.push_back(std::log(double(N_schedule[i]))), y.push_back(std::log(inc));
        }
        if (x.size() >= 2) {
          tr.increment_exponent = ls_slope(x, y);
          if (tr.increment_exponent < opts.summable_exponent) {
            tr.verdict = Verdict::summable;
            const double q = double(N_schedule[k - 1]) / N_schedule[k - 2];
            const double g = std::pow(q, tr.increment_exponent);
            tr.tail_estimate = last_inc * g / (1.0 - g);
          } else {
            tr.verdict = Verdict::diverging;
          }
        }
      }
    }
    tr.norm = tr.verdict == Verdict::diverging ? std::numeric_limits<double>::infinity()
                                                 : std::pow(tr.sums.back() + tr.tail_estimate, 1.0 / p);
    rep.traces.push_back(tr);
  }
  return rep;
}

RadialDensity RadialDensity::scaled(double c) const {
  RadialDensity d = *this;
  auto inner = g;
  d.g = [inner, c](double r) { return c * inner(r); };
  std::ostringstream os;
  os << c << "*" << name;
  d.name = os.str();
  return d;
}

RadialDensity RadialDensity::indicator(double a) {
  if (!(a > 0.0)) throw ConfigError("indicator density: radius must be positive");
  std::ostringstream os;
  os << "indicator(" << a << ")";
  return {os.str(), [](double) { return 1.0; }, 0.0, a, {a}};
}

std::vector<double> toeplitz_matrix(const BasisTable& basis, const RadialDensity& g, int N) {
  require_radial(basis.model, "toeplitz_matrix");
  if (N > basis.N) throw ConfigError("toeplitz_matrix: N exceeds the basis table");
  std::vector<double> t(N + 1);
  auto gg = g.g;
  for (int n = 0; n <= N; ++n) {
    const Scaled v = radial_integral(
        basis.model, 2.0 * n + 1.0,
        [gg](double r) {
          const double val = gg(r);
          if (val < 0.0) throw ConfigError("toeplitz_matrix: negative density");
          return cplx(val);
        },
        g.lo, g.hi, g.breaks, basis.quad);
    t[n] = v.mantissa.real() * std::exp(v.log_scale + std::log(2.0 * kPi) - basis.log_b[n]);
  }
  return t;
}

double averaging_transform(const WeightModel& model, const RadialDensity& g, double r, cplx z) {
  if (!(r > 0.0)) throw ConfigError("averaging_transform: r must be positive");
  const double R = r * model.rho(z);
  const DiskRule& rule = disk_rule(64, 128);
  CompensatedSum<double> acc;
  for (Eigen::Index i = 0; i < rule.points.size(); ++i) acc.add(rule.weights[i] * g(std::abs(z + R * rule.points[i])));
  return acc.value() / kPi;
}

ToeplitzReport toeplitz_equivalence_report(const BasisTable& basis, const std::vector<RadialDensity>& family,
                                           double p, double r, int N, double rmax) {
  if (!(p > 0.0) || !(r > 0.0) || !(rmax > 0.0)) throw ConfigError("toeplitz report: p, r, rmax must be positive");
  const WeightModel& model = basis.model;
  ToeplitzReport rep;
  const GaussRule& gl = gauss_legendre(8);
  for (const RadialDensity& d : family) {
    ToeplitzRow row;
    row.name = d.name;
    const std::vector<double> t = toeplitz_matrix(basis, d, N);
    CompensatedSum<double> lhs;
    for (double v : t) lhs.add(std::pow(v, p));
    row.lhs = std::pow(lhs.value(), 1.0 / p);
    if (t.back() > 1e-6 * t.front()) row.note = "diagonal not yet decayed at N";

    // mu_hat is radial here: integrate 2 pi t mu_hat(t)^p / rho(t)^2 dt
    const double top = std::isfinite(d.hi) ? std::min(rmax, d.hi + 2.0 * r * model.rho(d.hi) + 1e-12) : rmax;
    CompensatedSum<double> rhs;
    double a = 0.0;
    while (a < top) {
      const double b = std::min(top, a + 0.25 * r * model.rho(a));
      for (int i = 0; i < 8; ++i) {
        const double x = 0.5 * (a + b) + 0.5 * (b - a) * gl.nodes[i];
        const double mh = averaging_transform(model, d, r, x);
        const double rho = model.rho(x);
        if (mh > 0.0) rhs.add(0.5 * (b - a) * gl.weights[i] * 2.0 * kPi * x * std::pow(mh, p) / (rho * rho));
      }
      a = b;
    }
    if (averaging_transform(model, d, r, top) > 1e-6 * averaging_transform(model, d, r, 0.0))
      row.note += row.note.empty() ? "truncated at rmax" : "; truncated at rmax";
    row.rhs = std::pow(rhs.value(), 1.0 / p);
    if (row.lhs == 0.0 && row.rhs == 0.0) {
      row.excluded = true;
      row.note = "zero density";
    } else {
      row.ratio = row.lhs / row.rhs;
    }
    rep.rows.push_back(row);
  }
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for (const auto& row : rep.rows)
    if (!row.excluded) lo = std::min(lo, row.ratio), hi = std::max(hi, row.ratio);
  rep.spread = hi > 0.0 ? hi / lo : 0.0;
  return rep;
}

}  // namespace dfock
