#include "dfock/decompose.hpp"

namespace dfock {

Decomposition::Decomposition(Symbol f, WeightModel model, std::shared_ptr<const Partition> partition,
                             std::vector<DiskFit> fits, double r, double m)
    : f_(std::move(f)), model_(std::move(model)), partition_(std::move(partition)), fits_(std::move(fits)), r_(r), m_(m) {
  if (fits_.size() != partition_->lattice().size()) throw ConfigError("decomposition: one fit per lattice centre");
}

cplx Decomposition::f1(cplx z) const {
  CompensatedSum<cplx> acc;
  for (const auto& t : partition_->eval(z)) acc.add(fits_[t.j](z) * t.psi);
  return acc.value();
}

cplx Decomposition::f2(cplx z) const { return f_(z) - f1(z); }

cplx Decomposition::dbar_f1(cplx z) const {
  const auto terms = partition_->eval(z);
  if (terms.empty()) return 0.0;
  const cplx anchor = fits_[terms.front().j](z);
  CompensatedSum<cplx> acc;
  for (const auto& t : terms) acc.add((fits_[t.j](z) - anchor) * t.dbar_psi);
  return acc.value();
}

cplx Decomposition::dbar_f1_direct(cplx z) const {
  CompensatedSum<cplx> acc;
  for (const auto& t : partition_->eval(z)) acc.add(fits_[t.j](z) * t.dbar_psi);
  return acc.value();
}

Decomposition ida_decompose(const Symbol& f, const WeightModel& model, const DecomposeOptions& opts) {
  if (!(opts.r > 0.0)) throw ConfigError("ida_decompose: r must be positive");
  if (!(opts.m > 0.0 && opts.m < 1.0)) throw ConfigError("ida_decompose: m must lie in (0, 1)");
  if (opts.K < 0 || opts.K_max < opts.K) throw ConfigError("ida_decompose: need 0 <= K <= K_max");
  auto lattice = std::make_shared<const Lattice>(build_lattice(model, opts.m * opts.r / 2.0, opts.rmax));
  auto partition = std::make_shared<const Partition>(
      build_partition(model, lattice, opts.m, probe_grid(model, opts.rmax)));

  std::vector<DiskFit> fits(lattice->size());
  parallel_for(lattice->size(), opts.threads, [&](std::size_t j) {
    const double R = opts.r * lattice->rho[j];
    DiskFit fit = disk_projection(f, lattice->centers[j], R, opts.K, opts.fit_quad);
    if (fit.residual > opts.escalate_tol * std::sqrt(fit.mean_abs_sq) && opts.K_max > opts.K) {
      fit = disk_projection(f, lattice->centers[j], R, opts.K_max, opts.fit_quad);
      if (!std::isfinite(fit.residual)) throw NumericalError("ida_decompose: fit escalation failed");
    }
    fits[j] = std::move(fit);
  });
  return Decomposition(f, model, partition, std::move(fits), opts.r, opts.m);
}

std::vector<cplx> decomposition_probes(const Decomposition& dec, double rmin, double rmax, bool refine,
                                       std::size_t max_probes) {
  const Lattice& lat = dec.lattice();
  const WeightModel& model = dec.model();
  auto keep = [&](cplx z) {
    const double az = std::abs(z);
    // the mean over D^{mr}(z) and the fits feeding it stay inside the domain
    return az >= rmin && az <= rmax && az + 2.0 * dec.r() * model.rho(z) <= lat.rmax;
  };
  std::vector<cplx> out;
  // neighbours: centres closer than twice the covering radius
  const double reach = 2.0 * lat.r;
  DiskIndex index(lat.r * *std::min_element(lat.rho.begin(), lat.rho.end()));
  for (std::size_t j = 0; j < lat.size(); ++j) index.insert(static_cast<int>(j), lat.centers[j], reach * lat.rho[j]);
  for (std::size_t j = 0; j < lat.size(); ++j) {
    const cplx a = lat.centers[j];
    if (keep(a)) out.push_back(a);
    std::vector<int> nbrs;
    index.visit(a, 0.0, [&](int k) {
      if (static_cast<std::size_t>(k) > j && std::abs(a - lat.centers[k]) < reach * lat.rho[k]) nbrs.push_back(k);
    });
    std::sort(nbrs.begin(), nbrs.end());
    for (int k : nbrs) {
      const cplx b = lat.centers[k];
      if (keep(0.5 * (a + b))) out.push_back(0.5 * (a + b));
      if (refine) {
        if (keep(0.75 * a + 0.25 * b)) out.push_back(0.75 * a + 0.25 * b);
        if (keep(0.25 * a + 0.75 * b)) out.push_back(0.25 * a + 0.75 * b);
      }
    }
  }
  if (max_probes > 0 && out.size() > max_probes) {
    std::vector<cplx> thin;
    const double stride = static_cast<double>(out.size()) / max_probes;
    for (std::size_t i = 0; i < max_probes; ++i) thin.push_back(out[static_cast<std::size_t>(i * stride)]);
    out.swap(thin);
  }
  return out;
}

DecompositionReport verify_decomposition(const Decomposition& dec, const std::vector<cplx>& probes,
                                         const VerifyOptions& opts) {
  const WeightModel& model = dec.model();
  const Symbol& f = dec.symbol();
  const DiskRule& rule = disk_rule(opts.mean_quad.n_rad, opts.mean_quad.n_ang);
  DecompositionReport rep;
  rep.probes = probes.size();
  rep.rows.resize(probes.size());
  std::vector<double> recon(probes.size()), gap(probes.size());
  parallel_for(probes.size(), opts.threads, [&](std::size_t i) {
    const cplx z = probes[i];
    const double rz = model.rho(z);
    ProbeRow row;
    row.z = z;
    const cplx d = dec.dbar_f1(z);
    row.dbar_term = rz * std::abs(d);
    gap[i] = std::abs(d - dec.dbar_f1_direct(z));
    const cplx f1 = dec.f1(z);
    recon[i] = std::abs(f1 + (f(z) - f1) - f(z));
    const double R = dec.m() * dec.r() * rz;
    CompensatedSum<double> dd, ff;
    for (Eigen::Index q = 0; q < rule.points.size(); ++q) {
      const cplx w = z + R * rule.points[q];
      dd.add(rule.weights[q] * std::norm(dec.dbar_f1(w)));
      ff.add(rule.weights[q] * std::norm(dec.f2(w)));
    }
    row.dbar_mean = rz * std::sqrt(std::max(0.0, dd.value() / kPi));
    row.f2_mean = std::sqrt(std::max(0.0, ff.value() / kPi));
    row.reference = G2_disk(f, z, opts.reference_factor * dec.r() * rz, opts.local);
    rep.rows[i] = row;
  });
  for (std::size_t i = 0; i < probes.size(); ++i) {
    const ProbeRow& row = rep.rows[i];
    rep.max_lhs = std::max(rep.max_lhs, row.lhs());
    rep.max_reconstruction_error = std::max(rep.max_reconstruction_error, recon[i]);
    rep.max_anchor_gap = std::max(rep.max_anchor_gap, gap[i]);
    if (row.reference >= opts.reference_floor) {
      ++rep.ratio_probes;
      rep.max_ratio = std::max(rep.max_ratio, row.lhs() / row.reference);
    } else if (row.lhs() > opts.lhs_floor) {
      ++rep.violations;
    }
  }
  return rep;
}

}  // namespace dfock
