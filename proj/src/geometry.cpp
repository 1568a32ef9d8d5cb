#include "dfock/geometry.hpp"

#include <queue>

namespace dfock {

void DiskIndex::insert(int id, cplx center, double radius) {
  std::size_t level = 0;
  while (base_ * std::ldexp(1.0, static_cast<int>(level)) < radius) ++level;
  if (levels_.size() <= level) levels_.resize(level + 1);
  const double cell = base_ * std::ldexp(1.0, static_cast<int>(level));
  const auto ix = static_cast<std::int64_t>(std::floor(center.real() / cell));
  const auto iy = static_cast<std::int64_t>(std::floor(center.imag() / cell));
  levels_[level][key(ix, iy)].push_back(id);
  ++count_;
}

namespace {

double ring_rho(const WeightModel& model, double t) {
  if (model.radial()) return model.rho(t);
  double lo = std::numeric_limits<double>::infinity();
  for (int j = 0; j < 16; ++j) lo = std::min(lo, model.rho(std::polar(t, 2.0 * kPi * j / 16.0)));
  // neighbours of the sampled points can sit lower by the Lipschitz bound
  return lo / (1.0 + 2.0 * kPi * t / 16.0 / std::max(lo, 1e-300));
}

}  // namespace

std::vector<cplx> ring_points(const WeightModel& model, double rmax, double step) {
  if (!(rmax > 0.0) || !(step > 0.0)) throw ConfigError("ring_points: rmax and step must be positive");
  std::vector<cplx> pts{cplx(0.0)};
  double t = 0.0;
  while (t < rmax) {
    t = std::min(rmax, t + step * ring_rho(model, t));
    const double h = step * ring_rho(model, t);
    const auto n = static_cast<std::size_t>(std::ceil(2.0 * kPi * t / h));
    for (std::size_t j = 0; j < n; ++j) pts.push_back(std::polar(t, -kPi + 2.0 * kPi * (j + 0.5) / n));
  }
  return pts;
}

Lattice build_lattice(const WeightModel& model, double r, double rmax, const LatticeOptions& opts) {
  if (!(r > 0.0)) throw ConfigError("build_lattice: r must be positive");
  if (!(rmax > 0.0)) throw ConfigError("build_lattice: Rmax must be positive");
  Lattice lat;
  lat.r = r;
  lat.rmax = rmax;
  DiskIndex index(r * model.rho(0.0) / 8.0);

  auto covered = [&](cplx z, double margin) {
    bool hit = false;
    index.visit(z, 0.0, [&](int j) {
      if (!hit && std::abs(z - lat.centers[j]) < r * lat.rho[j] - margin) hit = true;
    });
    return hit;
  };
  auto accept = [&](cplx z) {
    const double rz = model.rho(z);
    index.insert(static_cast<int>(lat.centers.size()), z, r * rz);
    lat.centers.push_back(z);
    lat.rho.push_back(rz);
  };

  // a candidate counts as covered only with one candidate spacing to spare,
  // so every point between candidates is covered as well
  for (cplx z : ring_points(model, rmax, opts.candidate_step * r))
    if (!covered(z, opts.candidate_step * r * model.rho(z))) accept(z);

  const std::vector<cplx> probes = probe_grid(model, rmax, opts.probes_per_rho);
  for (int round = 0;; ++round) {
    std::size_t added = 0;
    for (cplx z : probes)
      if (!covered(z, 0.0)) accept(z), ++added;
    if (added == 0) break;
    if (round + 1 >= opts.max_repair_rounds)
      throw NumericalError("build_lattice: repair pass did not converge");
  }

  const LatticeCheck check = verify_lattice(lat, probes);
  if (!check.covered || !check.disjoint) {
    std::string msg = "build_lattice: invariant check failed";
    if (!check.uncovered.empty()) {
      msg += "; uncovered:";
      for (std::size_t i = 0; i < std::min<std::size_t>(check.uncovered.size(), 8); ++i)
        msg += " (" + std::to_string(check.uncovered[i].real()) + "," + std::to_string(check.uncovered[i].imag()) + ")";
    }
    throw NumericalError(msg);
  }
  return lat;
}

LatticeCheck verify_lattice(const Lattice& lat, const std::vector<cplx>& probes) {
  LatticeCheck out;
  out.probes = probes.size();
  if (lat.centers.empty()) {
    out.covered = probes.empty();
    out.uncovered = probes;
    return out;
  }
  const double min_rho = *std::min_element(lat.rho.begin(), lat.rho.end());
  const double max_rho = *std::max_element(lat.rho.begin(), lat.rho.end());

  DiskIndex cover(lat.r * min_rho);
  DiskIndex small(lat.r * min_rho / 5.0);
  for (std::size_t j = 0; j < lat.size(); ++j) {
    cover.insert(static_cast<int>(j), lat.centers[j], lat.r * lat.rho[j]);
    small.insert(static_cast<int>(j), lat.centers[j], lat.r * lat.rho[j] / 5.0);
  }
  for (cplx z : probes) {
    if (std::abs(z) > lat.rmax) continue;
    bool hit = false;
    cover.visit(z, 0.0, [&](int j) { hit = hit || std::abs(z - lat.centers[j]) < lat.r * lat.rho[j]; });
    if (!hit) {
      out.covered = false;
      out.uncovered.push_back(z);
    }
  }
  out.worst_separation = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < lat.size(); ++j) {
    small.visit(lat.centers[j], lat.r * lat.rho[j] / 5.0 + lat.r * max_rho / 5.0, [&](int k) {
      if (static_cast<std::size_t>(k) == j) return;
      const double gap = std::abs(lat.centers[j] - lat.centers[k]) - lat.r / 5.0 * (lat.rho[j] + lat.rho[k]);
      out.worst_separation = std::min(out.worst_separation, gap);
    });
  }
  if (lat.size() == 1) out.worst_separation = 0.0;
  out.disjoint = out.worst_separation >= -1e-9;
  return out;
}

CoverCount covering_multiplicity(const Lattice& lat, double m, const std::vector<cplx>& probes) {
  if (!(m > 0.0)) throw ConfigError("covering_multiplicity: dilation must be positive");
  CoverCount out;
  if (probes.empty() || lat.centers.empty()) return out;
  const double min_rho = *std::min_element(lat.rho.begin(), lat.rho.end());
  DiskIndex index(m * lat.r * min_rho);
  for (std::size_t j = 0; j < lat.size(); ++j) index.insert(static_cast<int>(j), lat.centers[j], m * lat.r * lat.rho[j]);
  out.min = std::numeric_limits<int>::max();
  for (cplx z : probes) {
    int n = 0;
    index.visit(z, 0.0, [&](int j) { n += std::abs(z - lat.centers[j]) < m * lat.r * lat.rho[j]; });
    out.max = std::max(out.max, n);
    out.min = std::min(out.min, n);
  }
  if (m >= 1.0 && out.min < 1) throw NumericalError("covering_multiplicity: probe not covered at dilation >= 1");
  return out;
}

namespace {

double sigma(double u) { return u > 0.0 ? std::exp(-1.0 / u) : 0.0; }
double dsigma(double u) { return u > 0.0 ? std::exp(-1.0 / u) / (u * u) : 0.0; }

}  // namespace

double bump(double t) {
  if (t <= 0.5) return 1.0;
  if (t >= 1.0) return 0.0;
  const double u = 2.0 - 2.0 * t;
  const double a = sigma(u), b = sigma(1.0 - u);
  return a / (a + b);
}

double bump_derivative(double t) {
  if (t <= 0.5 || t >= 1.0) return 0.0;
  const double u = 2.0 - 2.0 * t;
  const double a = sigma(u), b = sigma(1.0 - u);
  const double ds = (dsigma(u) * b + a * dsigma(1.0 - u)) / ((a + b) * (a + b));
  return -2.0 * ds;
}

Partition::Partition(std::shared_ptr<const Lattice> lattice, double m)
    : lattice_(std::move(lattice)), m_(m), support_(2.0 * lattice_->r) {
  if (!(m > 0.0 && m < 1.0)) throw ConfigError("partition: m must lie in (0, 1)");
  if (lattice_->centers.empty()) throw ConfigError("partition: empty lattice");
  const double min_rho = *std::min_element(lattice_->rho.begin(), lattice_->rho.end());
  index_ = DiskIndex(support_ * min_rho);
  for (std::size_t j = 0; j < lattice_->size(); ++j)
    index_.insert(static_cast<int>(j), lattice_->centers[j], support_ * lattice_->rho[j]);
}

std::vector<Partition::Term> Partition::eval(cplx z) const {
  std::vector<Term> terms;
  std::vector<double> eta;
  std::vector<cplx> deta;
  index_.visit(z, 0.0, [&](int j) {
    const cplx d = z - lattice_->centers[j];
    const double s = support_ * lattice_->rho[j];
    const double dist = std::abs(d);
    if (dist >= s) return;
    const double e = bump(dist / s);
    if (e <= 0.0) return;
    terms.push_back({j, 0.0, 0.0});
    eta.push_back(e);
    deta.push_back(dist > 0.0 ? bump_derivative(dist / s) * d / (2.0 * dist * s) : cplx(0.0));
  });
  // lattice order, independent of hash layout
  std::vector<std::size_t> order(terms.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return terms[a].j < terms[b].j; });
  CompensatedSum<double> total;
  CompensatedSum<cplx> dtotal;
  for (std::size_t i : order) total.add(eta[i]), dtotal.add(deta[i]);
  const double S = total.value();
  const cplx dS = dtotal.value();
  std::vector<Term> out;
  out.reserve(terms.size());
  if (S <= 0.0) return out;
  for (std::size_t i : order)
    out.push_back({terms[i].j, eta[i] / S, (deta[i] * S - eta[i] * dS) / (S * S)});
  return out;
}

Partition build_partition(const WeightModel& model, std::shared_ptr<const Lattice> lattice, double m,
                          const std::vector<cplx>& probes) {
  (void)model;
  Partition part(std::move(lattice), m);
  for (cplx z : probes) {
    if (std::abs(z) > part.lattice().rmax) continue;
    if (part.eval(z).empty())
      throw NumericalError("build_partition: bump sum vanishes at (" + std::to_string(z.real()) + ", " +
                           std::to_string(z.imag()) + ")");
  }
  return part;
}

PartitionStats partition_stats(const Partition& partition, const std::vector<cplx>& probes) {
  PartitionStats st;
  const Lattice& lat = partition.lattice();
  for (cplx z : probes) {
    if (std::abs(z) > lat.rmax) continue;
    ++st.probes;
    double sum = 0.0;
    cplx dsum = 0.0;
    for (const auto& t : partition.eval(z)) {
      sum += t.psi;
      dsum += t.dbar_psi;
      st.c_partition = std::max(st.c_partition, lat.rho[t.j] * std::abs(t.dbar_psi));
      const double reach = std::abs(z - lat.centers[t.j]) - partition.support_factor() * lat.rho[t.j];
      if (t.psi > 0.0 && reach >= 0.0) st.max_support_violation = std::max(st.max_support_violation, reach);
    }
    st.max_sum_error = std::max(st.max_sum_error, std::abs(sum - 1.0));
    st.max_dbar_sum = std::max(st.max_dbar_sum, std::abs(dsum));
  }
  return st;
}

double d_phi_estimate(const WeightModel& model, cplx z, cplx w, double mesh) {
  if (!(mesh > 0.0)) throw ConfigError("d_phi_estimate: mesh must be positive");
  const double L = std::abs(w - z);
  if (L == 0.0) return 0.0;
  const cplx e = (w - z) / L;
  const cplx n = e * cplx(0.0, 1.0);
  const double margin = std::max(0.5 * L, 2.0 * std::max(model.rho(z), model.rho(w)));
  double rho_min = std::numeric_limits<double>::infinity();
  for (double s : {-margin, 0.0, 0.5 * L, L, L + margin})
    for (double q : {-margin, 0.0, margin}) rho_min = std::min(rho_min, model.rho(z + s * e + q * n));
  // Lipschitz slack for points of the box between the samples
  rho_min = std::max(rho_min - 0.5 * margin, 0.25 * rho_min);
  const double h0 = std::min(mesh, rho_min / 4.0);
  const auto na = static_cast<int>(std::ceil(L / h0));
  const double h = L / na;
  const int extra = static_cast<int>(std::ceil(margin / h));
  const int nx = na + 2 * extra + 1;
  const int ny = 2 * extra + 1;
  if (static_cast<long long>(nx) * ny > 20'000'000LL) throw NumericalError("d_phi_estimate: mesh too fine for domain");
  auto node = [&](int i, int j) { return z + (i - extra) * h * e + (j - extra) * h * n; };
  auto id = [&](int i, int j) { return static_cast<std::size_t>(j) * nx + i; };
  std::vector<double> dist(static_cast<std::size_t>(nx) * ny, std::numeric_limits<double>::infinity());
  using Item = std::pair<double, std::size_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
  const std::size_t src = id(extra, extra), dst = id(extra + na, extra);
  dist[src] = 0.0;
  heap.push({0.0, src});
  const int di[8] = {1, -1, 0, 0, 1, 1, -1, -1};
  const int dj[8] = {0, 0, 1, -1, 1, -1, 1, -1};
  while (!heap.empty()) {
    auto [d, u] = heap.top();
    heap.pop();
    if (d > dist[u]) continue;
    if (u == dst) return d;
    const int i = static_cast<int>(u % nx), j = static_cast<int>(u / nx);
    const cplx a = node(i, j);
    for (int k = 0; k < 8; ++k) {
      const int i2 = i + di[k], j2 = j + dj[k];
      if (i2 < 0 || j2 < 0 || i2 >= nx || j2 >= ny) continue;
      const cplx b = node(i2, j2);
      const double wgt = std::abs(b - a) / model.rho(0.5 * (a + b));
      const std::size_t v = id(i2, j2);
      if (d + wgt < dist[v]) {
        dist[v] = d + wgt;
        heap.push({dist[v], v});
      }
    }
  }
  throw NumericalError("d_phi_estimate: target unreachable");
}

}  // namespace dfock
