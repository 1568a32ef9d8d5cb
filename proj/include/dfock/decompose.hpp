#pragma once

#include <memory>
#include <vector>

#include "dfock/geometry.hpp"
#include "dfock/localfit.hpp"

namespace dfock {

struct DecomposeOptions {
  double r = 0.5;
  double m = 0.5;
  int K = 12;
  /// Refit at this degree when the degree-K fit leaves more than
  /// escalate_tol * rms(f) on the disk.
  int K_max = 24;
  double escalate_tol = 1e-10;
  DiskQuad fit_quad{48, 96};
  /// Domain radius of the lattice.
  double rmax = 3.0;
  int threads = 1;
};

/// f = f1 + f2 with f1 = sum_j h_j psi_j, h_j the local holomorphic fit on
/// D(a_j, r rho(a_j)) and psi_j the partition subordinate to D^{mr}(a_j).
class Decomposition {
 public:
  Decomposition(Symbol f, WeightModel model, std::shared_ptr<const Partition> partition, std::vector<DiskFit> fits,
                double r, double m);

  cplx f1(cplx z) const;
  cplx f2(cplx z) const;
  /// Anchored form sum_j (h_j(z) - h_{j0}(z)) dbar psi_j(z), j0 the first active index.
  cplx dbar_f1(cplx z) const;
  /// Plain sum_j h_j(z) dbar psi_j(z).
  cplx dbar_f1_direct(cplx z) const;

  const Symbol& symbol() const { return f_; }
  const WeightModel& model() const { return model_; }
  const Partition& partition() const { return *partition_; }
  const Lattice& lattice() const { return partition_->lattice(); }
  const std::vector<DiskFit>& fits() const { return fits_; }
  std::vector<DiskFit>& mutable_fits() { return fits_; }
  double r() const { return r_; }
  double m() const { return m_; }

 private:
  Symbol f_;
  WeightModel model_;
  std::shared_ptr<const Partition> partition_;
  std::vector<DiskFit> fits_;
  double r_, m_;
};

/// Lattice at scale m r / 2 so the bump supports are D^{mr}(a_j).
Decomposition ida_decompose(const Symbol& f, const WeightModel& model, const DecomposeOptions& opts = {});

struct VerifyOptions {
  /// Reference G is taken at R = reference_factor * r.
  double reference_factor = 3.0;
  DiskQuad mean_quad{12, 24};
  LocalOptions local{};
  /// Probes with G_ref below this are checked on the left side alone.
  double reference_floor = 1e-8;
  double lhs_floor = 1e-6;
  int threads = 1;
};

struct ProbeRow {
  cplx z = 0.0;
  double dbar_term = 0.0;  // rho |dbar f1|
  double dbar_mean = 0.0;  // rho (mean |dbar f1|^2)^{1/2} over D^{mr}(z)
  double f2_mean = 0.0;    // (mean |f2|^2)^{1/2} over D^{mr}(z)
  double reference = 0.0;  // G_{2,R}(f)(z)
  double lhs() const { return dbar_term + dbar_mean + f2_mean; }
};

struct DecompositionReport {
  double max_ratio = 0.0;
  double max_lhs = 0.0;
  std::size_t probes = 0;
  std::size_t ratio_probes = 0;
  std::size_t violations = 0;
  double max_reconstruction_error = 0.0;  // |f1 + f2 - f|
  double max_anchor_gap = 0.0;            // |anchored - direct dbar f1|
  std::vector<ProbeRow> rows;
};

/// Lattice centres and midpoints of neighbouring pairs (plus quarter points
/// when `refine`), restricted to rmin <= |z| <= rmax minus a margin that keeps
/// the averaging disks inside the lattice domain, then thinned by a fixed
/// stride to at most max_probes.
std::vector<cplx> decomposition_probes(const Decomposition& dec, double rmin, double rmax, bool refine = false,
                                       std::size_t max_probes = 400);

DecompositionReport verify_decomposition(const Decomposition& dec, const std::vector<cplx>& probes,
                                         const VerifyOptions& opts = {});

}  // namespace dfock
