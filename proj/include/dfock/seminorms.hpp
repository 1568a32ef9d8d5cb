#pragma once

#include <string>
#include <vector>

#include "dfock/fockops.hpp"
#include "dfock/localfit.hpp"

namespace dfock {

struct SeminormOptions {
  double p = 1.0;
  double alpha = -2.0;
  double r = 1.0;
  std::vector<double> schedule{5.0, 10.0, 20.0, 40.0};
  /// Gauss nodes per rho-wide panel, radially and along arcs.
  int resolution = 4;
  /// Disk rules for the local quantities; G needs degree K_max.
  LocalOptions local{12, 24, true, 1e-6, {26, 56}, 1e-12, true};
  DiskQuad mo_quad{16, 32};
  double converge_tol = 1e-4;
  /// |increment exponent| below this with positive increments reads as log growth.
  double log_band = 0.15;
  /// Half-angle of the excluded branch-cut sector is min(pi, cut_factor rho / |z|).
  double cut_factor = 4.0;
  /// Use the 1-D radial integral when |G| or MO is known to be radial.
  bool allow_radial = true;
  int threads = 1;
};

struct ProfileSample {
  double t = 0.0;
  double mean = 0.0;  // angular mean of G or MO on the ring
  double max = 0.0;
};

struct DivergenceFit {
  double exponent = 0.0;
  double residual = 0.0;
  bool monotone = true;
  bool positive = true;  // all increments > 0
  bool log_divergence = false;
  std::size_t pairs = 0;
};

struct SeminormReport {
  std::string quantity;  // "IDA" or "IMO"
  std::string symbol;
  double p = 1.0, alpha = 0.0, r = 1.0;
  std::vector<double> schedule;
  std::vector<double> partial;
  /// Branch-cut sector contribution, reported apart and never added in.
  std::vector<double> excluded;
  Verdict verdict = Verdict::inconclusive;
  DivergenceFit fit;
  bool radial_reduction = false;
  std::vector<ProfileSample> profile;
  std::string note;
};

SeminormReport ida_seminorm(const Symbol& f, const WeightModel& model, const SeminormOptions& opts = {});
SeminormReport imo_seminorm(const Symbol& f, const WeightModel& model, const SeminormOptions& opts = {});

/// Least-squares slope of log(I_{i+1} - I_i) against log R_{i+1}.
DivergenceFit divergence_scan(const std::vector<double>& R, const std::vector<double>& I, double log_band = 0.15);
DivergenceFit divergence_scan(const SeminormReport& report, double log_band = 0.15);

}  // namespace dfock
