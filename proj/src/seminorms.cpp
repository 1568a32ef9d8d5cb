#include "dfock/seminorms.hpp"

#include "dfock/quadrature.hpp"

namespace dfock {

namespace {

struct Node {
  double t = 0.0;
  double theta = 0.0;
  double weight = 0.0;  // includes the Jacobian t and the angular measure
  std::size_t ring = 0;
  bool excluded = false;
};

double ring_rho(const WeightModel& model, double t) {
  if (model.radial()) return model.rho(t);
  double lo = std::numeric_limits<double>::infinity();
  for (int j = 0; j < 16; ++j) lo = std::min(lo, model.rho(std::polar(t, 2.0 * kPi * j / 16.0)));
  return lo;
}

// Radii where the local quantity stops being smooth: support edges of the
// symbol shifted by the disk radius.
std::vector<double> special_radii(const Symbol& f, const WeightModel& model, double r) {
  std::vector<double> out;
  std::vector<double> base;
  if (auto modes = f.modes())
    for (const RadialMode& m : *modes) {
      for (double x : {m.lo, m.hi})
        if (x > 0.0 && std::isfinite(x)) base.push_back(x);
      for (double x : m.breaks)
        if (x > 0.0) base.push_back(x);
    }
  for (double b : base) {
    out.push_back(b);
    for (int sgn : {-1, 1}) {
      double t = b;
      for (int it = 0; it < 4; ++it) t = std::max(0.0, b + sgn * r * ring_rho(model, std::max(t, 0.0)));
      out.push_back(t);
    }
  }
  return out;
}

SeminormReport run(const Symbol& f, const WeightModel& model, const SeminormOptions& opts, bool ida) {
  if (!(opts.p > 0.0)) throw ConfigError("seminorm: p must be positive");
  if (!(opts.r > 0.0)) throw ConfigError("seminorm: r must be positive");
  if (opts.resolution < 1) throw ConfigError("seminorm: resolution must be at least 1");
  if (opts.schedule.empty()) throw ConfigError("seminorm: empty Rmax schedule");
  for (std::size_t i = 0; i < opts.schedule.size(); ++i)
    if (!(opts.schedule[i] > 0.0) || (i > 0 && opts.schedule[i] <= opts.schedule[i - 1]))
      throw ConfigError("seminorm: Rmax schedule must be positive and increasing");

  SeminormReport rep;
  rep.quantity = ida ? "IDA" : "IMO";
  rep.symbol = f.name();
  rep.p = opts.p;
  rep.alpha = opts.alpha;
  rep.r = opts.r;
  rep.schedule = opts.schedule;
  rep.radial_reduction = opts.allow_radial && model.radial() && f.rotation_covariant();
  const std::optional<double> cut = f.cut_angle();

  // radial panel edges
  std::vector<double> forced = special_radii(f, model, opts.r);
  forced.insert(forced.end(), opts.schedule.begin(), opts.schedule.end());
  std::sort(forced.begin(), forced.end());
  const double top = opts.schedule.back();
  std::vector<double> edges{0.0};
  std::size_t next_forced = 0;
  while (edges.back() < top) {
    const double t = edges.back();
    double nt = std::min(top, t + ring_rho(model, t));
    while (next_forced < forced.size() && forced[next_forced] <= t) ++next_forced;
    if (next_forced < forced.size() && forced[next_forced] < nt) nt = forced[next_forced];
    edges.push_back(nt);
  }

  const GaussRule& gl = gauss_legendre(opts.resolution);
  std::vector<Node> nodes;
  std::vector<double> ring_t;
  std::vector<std::size_t> panel_end;  // nodes.size() after each radial panel
  for (std::size_t e = 0; e + 1 < edges.size(); ++e) {
    const double a = edges[e], b = edges[e + 1];
    for (int i = 0; i < opts.resolution; ++i) {
      const double t = 0.5 * (a + b) + 0.5 * (b - a) * gl.nodes[i];
      const double wr = 0.5 * (b - a) * gl.weights[i] * t;
      const std::size_t ring = ring_t.size();
      ring_t.push_back(t);
      if (rep.radial_reduction) {
        nodes.push_back({t, 0.0, 2.0 * kPi * wr, ring, false});
        continue;
      }
      const double rho_t = ring_rho(model, t);
      double half = 0.0;
      double gamma = 0.0;
      if (cut) {
        gamma = *cut;
        half = std::min(kPi, opts.cut_factor * rho_t / t);
      }
      auto arc = [&](double from, double to, bool excluded) {
        if (!(to > from)) return;
        const int panels = std::max(1, static_cast<int>(std::ceil((to - from) * t / rho_t)));
        const double h = (to - from) / panels;
        for (int p = 0; p < panels; ++p)
          for (int j = 0; j < opts.resolution; ++j) {
            const double th = from + (p + 0.5) * h + 0.5 * h * gl.nodes[j];
            nodes.push_back({t, th, wr * 0.5 * h * gl.weights[j], ring, excluded});
          }
      };
      arc(gamma + half, gamma + 2.0 * kPi - half, false);
      if (half > 0.0) arc(gamma - half, gamma + half, true);
    }
    panel_end.push_back(nodes.size());
  }

  LocalOptions local = opts.local;
  if (!ida) local.quad = opts.mo_quad;
  std::vector<double> q(nodes.size()), integrand(nodes.size());
  parallel_for(nodes.size(), opts.threads, [&](std::size_t i) {
    const cplx z = std::polar(nodes[i].t, nodes[i].theta);
    const double rz = model.rho(z);
    const double R = opts.r * rz;
    const double v = ida ? G2_disk(f, z, R, local) : MO2_disk(f, z, R, local);
    q[i] = v;
    integrand[i] = v > 0.0 ? std::pow(std::pow(rz, opts.alpha) * v, opts.p) : 0.0;
  });

  // ordered reduction: partial integrals at each schedule radius
  CompensatedSum<double> main, cut_part;
  std::size_t k = 0, n = 0;
  for (std::size_t e = 0; e + 1 < edges.size(); ++e) {
    for (; n < panel_end[e]; ++n) (nodes[n].excluded ? cut_part : main).add(nodes[n].weight * integrand[n]);
    while (k < opts.schedule.size() && edges[e + 1] >= opts.schedule[k] * (1.0 - 1e-15)) {
      rep.partial.push_back(main.value());
      rep.excluded.push_back(cut_part.value());
      ++k;
    }
  }

  rep.profile.resize(ring_t.size());
  std::vector<double> wsum(ring_t.size(), 0.0);
  for (std::size_t i = 0; i < ring_t.size(); ++i) rep.profile[i].t = ring_t[i];
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (nodes[i].excluded) continue;
    auto& s = rep.profile[nodes[i].ring];
    s.mean += nodes[i].weight * q[i];
    wsum[nodes[i].ring] += nodes[i].weight;
    s.max = std::max(s.max, q[i]);
  }
  for (std::size_t i = 0; i < ring_t.size(); ++i)
    if (wsum[i] > 0.0) rep.profile[i].mean /= wsum[i];

  rep.fit = divergence_scan(rep.schedule, rep.partial, opts.log_band);
  const std::size_t m = rep.partial.size();
  if (m < 3) {
    rep.verdict = Verdict::inconclusive;
    rep.note = "schedule shorter than 3 radii";
  } else if (rep.partial[m - 1] - rep.partial[m - 3] <= opts.converge_tol * rep.partial[m - 1] ||
             rep.partial[m - 1] == 0.0) {
    rep.verdict = Verdict::converged;
  } else if (!rep.fit.monotone) {
    rep.verdict = Verdict::inconclusive;
    rep.note = "partial integrals not monotone";
  } else if (rep.fit.pairs >= 2 && rep.fit.exponent < -opts.log_band) {
    rep.verdict = Verdict::converged;
    rep.note = "increments decaying";
  } else {
    rep.verdict = Verdict::diverging;
  }
  return rep;
}

}  // namespace

SeminormReport ida_seminorm(const Symbol& f, const WeightModel& model, const SeminormOptions& opts) {
  return run(f, model, opts, true);
}

SeminormReport imo_seminorm(const Symbol& f, const WeightModel& model, const SeminormOptions& opts) {
  return run(f, model, opts, false);
}

DivergenceFit divergence_scan(const std::vector<double>& R, const std::vector<double>& I, double log_band) {
  if (R.size() != I.size()) throw ConfigError("divergence_scan: schedule and integrals differ in length");
  DivergenceFit fit;
  double scale = 0.0;
  for (double v : I) scale = std::max(scale, std::abs(v));
  std::vector<double> x, y;
  for (std::size_t i = 0; i + 1 < I.size(); ++i) {
    const double inc = I[i + 1] - I[i];
    if (inc < -1e-12 * scale) fit.monotone = false;
    if (inc > 0.0) {
      x.push_back(std::log(R[i + 1]));
      y.push_back(std::log(inc));
    } else {
      fit.positive = false;
    }
  }
  fit.pairs = x.size();
  if (x.size() >= 2) {
    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) sx += x[i], sy += y[i], sxx += x[i] * x[i], sxy += x[i] * y[i];
    fit.exponent = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    const double icpt = (sy - fit.exponent * sx) / n;
    double sse = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) sse += std::pow(y[i] - icpt - fit.exponent * x[i], 2);
    fit.residual = std::sqrt(sse / n);
  } else {
    fit.residual = std::numeric_limits<double>::infinity();
  }
  fit.log_divergence = fit.pairs >= 2 && fit.positive && fit.monotone && std::abs(fit.exponent) <= log_band;
  return fit;
}

DivergenceFit divergence_scan(const SeminormReport& report, double log_band) {
  return divergence_scan(report.schedule, report.partial, log_band);
}

}  // namespace dfock
