#pragma once

#include <cstdint>
#include <limits>
#include <memory>
#include <unordered_map>
#include <vector>

#include "dfock/weights.hpp"

namespace dfock {

/// Multi-level uniform hash grid over disks of widely varying radii. A disk
/// lives on the coarsest-needed level whose cell is at least its radius, so
/// a containment query only scans a 3x3 block per level.
class DiskIndex {
 public:
  explicit DiskIndex(double base_cell = 1e-3) : base_(base_cell) {}

  void insert(int id, cplx center, double radius);

  /// Calls fn(id) for every disk that may satisfy |z - center| < radius + extra.
  /// Callers apply the exact test.
  template <typename Fn>
  void visit(cplx z, double extra, Fn&& fn) const {
    for (std::size_t level = 0; level < levels_.size(); ++level) {
      const auto& cells = levels_[level];
      if (cells.empty()) continue;
      const double cell = base_ * std::ldexp(1.0, static_cast<int>(level));
      const auto reach = static_cast<std::int64_t>(std::ceil((cell + extra) / cell));
      const auto ix = static_cast<std::int64_t>(std::floor(z.real() / cell));
      const auto iy = static_cast<std::int64_t>(std::floor(z.imag() / cell));
      for (std::int64_t dx = -reach; dx <= reach; ++dx)
        for (std::int64_t dy = -reach; dy <= reach; ++dy) {
          auto it = cells.find(key(ix + dx, iy + dy));
          if (it == cells.end()) continue;
          for (int id : it->second) fn(id);
        }
    }
  }

  std::size_t size() const { return count_; }

 private:
  static std::int64_t key(std::int64_t ix, std::int64_t iy) { return (ix << 32) ^ (iy & 0xffffffffLL); }
  double base_;
  std::size_t count_ = 0;
  std::vector<std::unordered_map<std::int64_t, std::vector<int>>> levels_;
};

/// Points on concentric rings |z| = t_i <= rmax ordered by (|z|, arg), with
/// radial and arc spacing `step * rho` where rho is the smallest radius
/// field value sampled on the ring. Used for probe grids and lattice
/// candidates.
std::vector<cplx> ring_points(const WeightModel& model, double rmax, double step);

/// Default probe grid: 4 points per rho length.
inline std::vector<cplx> probe_grid(const WeightModel& model, double rmax, double per_rho = 4.0) {
  return ring_points(model, rmax, 1.0 / per_rho);
}

struct Lattice {
  double r = 1.0;
  double rmax = 1.0;
  std::vector<cplx> centers;
  std::vector<double> rho;

  std::size_t size() const { return centers.size(); }
};

struct LatticeOptions {
  /// Candidate spacing in units of r * rho.
  double candidate_step = 0.1;
  double probes_per_rho = 4.0;
  int max_repair_rounds = 20;
};

struct LatticeCheck {
  bool covered = true;
  bool disjoint = true;
  std::size_t probes = 0;
  std::vector<cplx> uncovered;
  /// min over pairs of |a_j - a_k| - (r/5)(rho_j + rho_k); must be >= -1e-9.
  double worst_separation = 0.0;
};

/// Greedy cover-scan over candidates of increasing modulus, then a repair
/// pass adding a center at every uncovered probe; both invariants are
/// verified before returning.
Lattice build_lattice(const WeightModel& model, double r, double rmax, const LatticeOptions& opts = {});

LatticeCheck verify_lattice(const Lattice& lattice, const std::vector<cplx>& probes);

struct CoverCount {
  int max = 0;
  int min = 0;
};

/// Max (and min) over probes of #{j : z in D(a_j, m r rho(a_j))}.
CoverCount covering_multiplicity(const Lattice& lattice, double m, const std::vector<cplx>& probes);

/// Smooth cutoff: 1 on [0, 1/2], 0 on [1, inf), S(2 - 2t) between with
/// S(u) = sigma(u) / (sigma(u) + sigma(1 - u)), sigma(u) = exp(-1/u).
double bump(double t);
double bump_derivative(double t);

/// Partition of unity psi_j = eta_j / sum_k eta_k with
/// eta_j(z) = bump(|z - a_j| / (support * rho(a_j))).
///
/// The bump plateau is the lattice covering disk, so the support radius is
/// twice the lattice scale. The nominal fit scale is support / m, so the
/// supports are the disks D^{m r_fit}(a_j).
class Partition {
 public:
  struct Term {
    int j = 0;
    double psi = 0.0;
    cplx dbar_psi = 0.0;
  };

  Partition(std::shared_ptr<const Lattice> lattice, double m);

  const Lattice& lattice() const { return *lattice_; }
  std::shared_ptr<const Lattice> lattice_ptr() const { return lattice_; }
  double m() const { return m_; }
  double support_factor() const { return support_; }
  double fit_scale() const { return support_ / m_; }

  /// Active terms at z (those with eta_j(z) > 0), in lattice order.
  std::vector<Term> eval(cplx z) const;

 private:
  std::shared_ptr<const Lattice> lattice_;
  double m_;
  double support_;
  DiskIndex index_;
};

/// Throws NumericalError if sum_k eta_k vanishes at any probe.
Partition build_partition(const WeightModel& model, std::shared_ptr<const Lattice> lattice, double m,
                          const std::vector<cplx>& probes);

struct PartitionStats {
  double max_sum_error = 0.0;       // |sum psi_j - 1|
  double max_dbar_sum = 0.0;        // |sum dbar psi_j|
  double c_partition = 0.0;         // sup rho(a_j) |dbar psi_j|
  double max_support_violation = 0; // psi_j > 0 outside its support disk
  std::size_t probes = 0;
};

PartitionStats partition_stats(const Partition& partition, const std::vector<cplx>& probes);

/// Shortest path on an 8-neighbour grid graph aligned with the segment
/// [z, w], edge weight |dz| / rho(edge midpoint). Over-estimates d_phi by at
/// most the grid metric factor.
double d_phi_estimate(const WeightModel& model, cplx z, cplx w, double mesh);

}  // namespace dfock
