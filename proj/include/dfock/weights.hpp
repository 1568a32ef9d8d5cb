#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "dfock/core.hpp"
#include "dfock/quadrature.hpp"

namespace dfock {

enum class WeightKind { gaussian, power, custom_radial, custom_planar };

/// Regular grid of Laplacian samples, row-major: values[iy * nx + ix] sits
/// at (x0 + ix * h, y0 + iy * h).
struct PlanarGrid {
  double x0 = 0.0;
  double y0 = 0.0;
  double h = 0.0;
  int nx = 0;
  int ny = 0;
  std::vector<double> values;
};

/// Description of a subharmonic weight phi through its Laplacian.
/// Laplacian convention: d^2/dx^2 + d^2/dy^2, so Lap |z|^2 = 4.
struct WeightSpec {
  WeightKind kind = WeightKind::gaussian;
  double a = 0.5;  // gaussian: phi = a |z|^2
  double m = 2.0;  // power: phi = c |z|^m
  double c = 1.0;
  std::vector<double> profile_r;    // custom_radial nodes (increasing)
  std::vector<double> profile_lap;  // Lap phi at those nodes
  PlanarGrid planar;

  static WeightSpec gaussian(double a);
  /// phi = |z|^2 / 2, i.e. the weight e^{-|z|^2}.
  static WeightSpec classical() { return gaussian(0.5); }
  static WeightSpec power(double m, double c);
  static WeightSpec custom_radial(std::vector<double> r, std::vector<double> lap);
  static WeightSpec custom_planar(PlanarGrid grid);

  /// Throws ConfigError when parameters or profiles are invalid.
  void validate() const;
  bool radial() const { return kind != WeightKind::custom_planar; }
  std::string describe() const;
};

struct WeightOptions {
  DiskQuad quad{24, 48};
  double rho_tol = 1e-10;
  int max_iter = 200;
  double cache_quantum = 1e-6;
};

/// Weight phi together with its Laplacian measure and the radius field rho.
///
/// Immutable after construction apart from the rho memo table, which is
/// shared between copies and guarded for concurrent use. Cache keys snap the
/// point to a `cache_quantum` grid and rho is solved at the snapped point, so
/// results never depend on evaluation order. Radial weights key on |z| only.
class WeightModel {
 public:
  explicit WeightModel(WeightSpec spec, WeightOptions opts = {});

  const WeightSpec& spec() const { return spec_; }
  const WeightOptions& options() const { return opts_; }
  bool radial() const { return spec_.radial(); }

  double phi(cplx z) const;
  /// Radial profile phi(r); throws for planar weights.
  double phi_radial(double r) const;
  double dphi_radial(double r) const;

  double laplacian(cplx z) const;
  double laplacian_radial(double r) const;

  /// mu(D(z, r)) = int_{D(z,r)} Lap phi dA by polar quadrature centred at z.
  double mu_disk(cplx z, double r) const;

  /// The radius with mu(D(z, rho)) = 1.
  double rho(cplx z) const;

  std::size_t cache_size() const;

 private:
  struct Impl;
  WeightSpec spec_;
  WeightOptions opts_;
  std::shared_ptr<Impl> impl_;

  double solve_rho(cplx z) const;
};

WeightModel build_weight_model(const WeightSpec& spec, const DiskQuad& quad, double rho_tol);

inline double mu_disk(const WeightModel& model, cplx z, double r) { return model.mu_disk(z, r); }
inline double rho(const WeightModel& model, cplx z) { return model.rho(z); }

struct DoublingReport {
  double c_dbl = 1.0;
  double lipschitz_violation = 0.0;
  double eta_hat = 0.0;   // minus the slope of the lower envelope of log rho vs log|z|
  double beta_hat = 0.0;  // slope of the upper envelope
  std::size_t samples = 0;
};

/// Doubling constant over (point, radius) samples, worst Lipschitz excess
/// of rho over all point pairs, and envelope exponents fitted on |z| > 1.
DoublingReport doubling_diagnostic(const WeightModel& model, std::span<const cplx> points,
                                   std::span<const double> radii);

}  // namespace dfock
