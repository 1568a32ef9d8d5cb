#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dfock/symbols.hpp"
#include "dfock/weights.hpp"

namespace dfock {

/// Panel rule for radial integrals int g(r) r^s e^{-2 phi(r)} dr.
/// The integral is taken in u = ln r, where the exponent is concave; panels
/// are `width` local Gaussian widths wide with `nodes` Gauss-Legendre points
/// and extend until the exponent has dropped by `depth` below its maximum.
struct RadialQuad {
  int nodes = 16;
  double width = 1.0;
  double depth = 45.0;
};

/// mantissa * exp(log_scale)
struct Scaled {
  cplx mantissa = 0.0;
  double log_scale = 0.0;
  double reach = 0.0;  // largest radius visited
};

/// int_{lo}^{hi} g(r) r^s e^{-2 phi(r)} dr on a radial weight. `breaks`
/// are forced panel edges (jumps of g).
Scaled radial_integral(const WeightModel& model, double s, const std::function<cplx(double)>& g, double lo,
                       double hi, const std::vector<double>& breaks = {}, const RadialQuad& quad = {});

/// Squared monomial norms b_n = 2 pi int r^{2n+1} e^{-2 phi} dr, kept in log
/// form because they overflow quickly.
struct BasisTable {
  WeightModel model;
  int N = 0;
  RadialQuad quad;
  std::vector<double> log_b;
  /// Largest radius touched by the quadrature.
  double radius = 0.0;

  double b(int n) const { return std::exp(log_b.at(n)); }
  /// Worst violation of log b_{n-1} + log b_{n+1} >= 2 log b_n (<= 0 is fine).
  double log_convexity_defect() const;
};

BasisTable basis_norms(const WeightModel& model, int N, const RadialQuad& quad = {});

struct KernelValue {
  cplx value = 0.0;
  /// Geometric bound on the omitted terms n > N.
  double tail = 0.0;
};

/// K(w, z) = sum_{n <= N} w^n conj(z)^n / b_n. Throws when the tail bound
/// exceeds 1e-8 of the partial sum.
KernelValue kernel_eval(const BasisTable& basis, cplx w, cplx z);

struct DecayFit {
  double epsilon = 0.0;
  double C = 0.0;
  /// y = log C - c x^epsilon
  double c = 0.0;
  double residual = 0.0;
  std::size_t samples = 0;
};

/// Fits log(|K(w,z)| rho(w) rho(z) e^{-phi(w)-phi(z)}) against
/// -c (|z-w|/rho(z))^epsilon over w = z + offsets (zero offsets skipped).
DecayFit kernel_decay_fit(const BasisTable& basis, cplx z, const std::vector<cplx>& offsets);

/// Gram matrix of H_f on span{e_0..e_N}, grouped into blocks of indices
/// coupled through a shared angular output mode.
struct GramBlock {
  int N = 0;
  std::vector<std::vector<int>> index;  // block -> basis indices (ascending)
  std::vector<Eigen::MatrixXcd> blocks;

  Eigen::MatrixXcd dense() const;
  /// Same Gram restricted to indices <= n.
  GramBlock leading(int n) const;
};

/// Requires a radial weight and a mode-decomposable symbol. Output modes
/// are never truncated, so the Gram for N' < N is the leading block.
GramBlock hankel_gram(const BasisTable& basis, const Symbol& f, int N);

inline constexpr double kSvalFloor = 1e-12;

/// Square roots of the Gram eigenvalues, descending. Eigenvalues in
/// [-1e-10, 0) are clamped; anything lower is an assembly fault. Values
/// below kSvalFloor * s_max are returned as 0.
std::vector<double> singular_values(const GramBlock& gram);

struct SchattenNorm {
  double value = 0.0;
  std::vector<double> partial;  // partial sums of s_j^p
};

SchattenNorm schatten_quasi_norm(const std::vector<double>& svals, double p);

enum class Verdict { summable, diverging, inconclusive, converged };
std::string to_string(Verdict v);

struct SchattenTrace {
  double p = 1.0;
  std::vector<double> sums;  // sum_n s_n^p at each N of the schedule
  Verdict verdict = Verdict::inconclusive;
  /// slope of log(increment) against log N (negative: tail summable)
  double increment_exponent = 0.0;
  /// slope of the partial sum against ln N
  double log_slope = 0.0;
  double tail_estimate = 0.0;
  /// sums.back() + tail_estimate, raised to 1/p; infinite when diverging.
  double norm = 0.0;
};

struct SchattenReport {
  std::string symbol;
  std::vector<int> N;
  std::vector<double> svals;  // at N.back()
  std::vector<SchattenTrace> traces;
};

struct SchattenOptions {
  double converge_tol = 1e-8;
  double summable_exponent = -0.005;
};

SchattenReport schatten_report(const BasisTable& basis, const Symbol& f, const std::vector<int>& N_schedule,
                               const std::vector<double>& p_list, const SchattenOptions& opts = {});

/// Radial density g(|z|) for Toeplitz symbols dmu = g dA.
struct RadialDensity {
  std::string name;
  std::function<double(double)> g;
  double lo = 0.0;
  double hi = std::numeric_limits<double>::infinity();
  std::vector<double> breaks;

  double operator()(double r) const { return r >= lo && r <= hi ? g(r) : 0.0; }
  RadialDensity scaled(double c) const;
  static RadialDensity indicator(double a);
};

/// t_n = 2 pi int g r^{2n+1} e^{-2 phi} dr / b_n.
std::vector<double> toeplitz_matrix(const BasisTable& basis, const RadialDensity& g, int N);

/// Mean of g over D(z, r rho(z)).
double averaging_transform(const WeightModel& model, const RadialDensity& g, double r, cplx z);

struct ToeplitzRow {
  std::string name;
  double lhs = 0.0;
  double rhs = 0.0;
  double ratio = 0.0;
  bool excluded = false;
  std::string note;
};

struct ToeplitzReport {
  std::vector<ToeplitzRow> rows;
  double spread = 0.0;  // max ratio / min ratio over included rows
};

/// LHS (sum t_n^p)^{1/p}; RHS (int mu_hat_r^p rho^{-2} dA)^{1/p} over |z| <= rmax.
ToeplitzReport toeplitz_equivalence_report(const BasisTable& basis, const std::vector<RadialDensity>& family,
                                           double p, double r, int N, double rmax);

}  // namespace dfock
