#pragma once

#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "dfock/core.hpp"

namespace dfock {

/// One angular mode g(|z|) e^{i k arg z} of a symbol. `g` is evaluated only
/// inside [lo, hi]; `breaks` lists radii where g (or a derivative) jumps.
struct RadialMode {
  int k = 0;
  std::function<cplx(double)> g;
  double lo = 0.0;
  double hi = std::numeric_limits<double>::infinity();
  std::vector<double> breaks;
};

/// Grid samples of a complex symbol, bilinearly interpolated; zero outside.
struct SampledField {
  double x0 = 0.0, y0 = 0.0, h = 1.0;
  int nx = 0, ny = 0;
  std::vector<cplx> values;  // values[iy * nx + ix]
};

enum class SymbolKind { xia, fbeta, zbar, mode_sum, sampled, custom };

/// A symbol f on the plane: closed forms used by the theorems plus
/// mode sums, sampled grids and arbitrary evaluators.
///
/// Value semantics; the evaluator state is shared and immutable, so symbols
/// are cheap to copy and safe to evaluate concurrently.
class Symbol {
 public:
  /// 1/z on |z| >= 1, zero inside.
  static Symbol xia();
  /// Principal branch of z^{beta-1} on |z| >= 1 with its cut along the ray
  /// at `cut_angle` (default: negative real axis), zero inside.
  static Symbol fbeta(double beta, double cut_angle = kPi);
  /// zbar |z|^{beta-2} on |z| >= 1: single-valued, one angular mode, equal
  /// to xia at beta = 0.
  static Symbol fbeta_surrogate(double beta);
  static Symbol zbar();
  static Symbol mode_sum(std::vector<RadialMode> modes, std::string name = "mode_sum");
  static Symbol sampled(SampledField field);
  static Symbol custom(std::function<cplx(cplx)> fn, std::string name = "custom");

  /// Holomorphic polynomial sum_k coeffs[k] z^k as a mode sum.
  static Symbol polynomial(std::vector<cplx> coeffs);
  /// c * zbar on |z| <= a.
  static Symbol zbar_disk(double a, cplx c = 1.0);
  /// 2 Re z = z + zbar on |z| <= a (real valued, two modes).
  static Symbol re_disk(double a);
  /// zbar exp(-|z|^2 / s).
  static Symbol zbar_decay(double s);

  cplx operator()(cplx z) const;

  SymbolKind kind() const { return kind_; }
  const std::string& name() const { return name_; }
  double beta() const { return beta_; }

  /// Angular decomposition, when one exists. fbeta answers with its
  /// single-mode surrogate.
  std::optional<std::vector<RadialMode>> modes() const;
  bool mode_decomposable() const { return modes_ != nullptr; }
  /// f(e^{it} z) = e^{ikt} f(z) for a single k, so |G| and MO are radial
  /// whenever the weight is.
  bool rotation_covariant() const;

  /// Branch cut ray angle for fbeta.
  std::optional<double> cut_angle() const;

  /// Conservative test that f is holomorphic on a neighbourhood of the
  /// closed disk D(z, R). `false` means "unknown".
  bool holomorphic_on_disk(cplx z, double R) const;

  Symbol conj() const;
  Symbol scaled(cplx c) const;

 private:
  SymbolKind kind_ = SymbolKind::custom;
  std::string name_;
  double beta_ = 0.0;
  double cut_ = kPi;
  bool conjugated_ = false;
  std::shared_ptr<const std::function<cplx(cplx)>> eval_;
  std::shared_ptr<const std::vector<RadialMode>> modes_;
  std::function<bool(cplx, double)> holo_;
};

/// Builds a symbol from its name as printed by Symbol::name(): xia, zbar,
/// fbeta(b), fbeta_surrogate(b), zbar_disk(a,c), re_disk(a), zbar_decay(s),
/// polynomial(c0,c1,...), const(c), conj(<name>).
Symbol parse_symbol(const std::string& text);

}  // namespace dfock
