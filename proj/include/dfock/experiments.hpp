#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "dfock/decompose.hpp"
#include "dfock/fockops.hpp"
#include "dfock/io.hpp"
#include "dfock/seminorms.hpp"

namespace dfock {

struct Numerics {
  int quad_rad = 24;  // rho solver disk rule
  int quad_ang = 48;
  double rho_tol = 1e-10;
  int resolution = 4;  // seminorm nodes per rho panel
  double converge_tol = 1e-4;
  double log_band = 0.15;
  /// Ratio band that counts as "equivalent" (reported, soft).
  double band = 10.0;
  /// Last annulus max below compact_tol * (largest annulus max) reads as -> 0.
  double compact_tol = 1e-3;
};

/// Everything an experiment run needs. Unset optionals and empty lists are
/// filled per experiment by resolve_defaults.
struct ExperimentConfig {
  std::string id;
  WeightSpec weight = WeightSpec::classical();
  std::vector<double> p;
  std::optional<double> r;
  std::optional<double> m;
  std::optional<int> K;
  std::optional<int> K_max;
  std::optional<double> alpha;
  std::optional<double> beta;
  std::vector<int> N;
  std::vector<double> Rmax;
  /// Separate schedule for the 2-D IDA integral of the principal-branch f_beta.
  std::vector<double> ida_Rmax;
  std::vector<std::string> symbols;
  std::vector<double> densities;
  /// Lattice domain radius (decomposition) or integration radius (Toeplitz).
  std::optional<double> domain;
  std::filesystem::path output = "dfock_out";
  int threads = 1;
  Numerics num;
};

inline const std::vector<std::string>& experiment_ids() {
  static const std::vector<std::string> ids{"xia_bc",      "fbeta_norms", "equivalence",        "berger_coburn_p",
                                            "compactness", "toeplitz_equiv", "decomposition_check"};
  return ids;
}

/// Fills defaults for cfg.id and validates ranges; throws ConfigError.
ExperimentConfig resolve_defaults(ExperimentConfig cfg);
json to_json(const ExperimentConfig& cfg);
WeightModel make_model(const ExperimentConfig& cfg);

struct Check {
  std::string name;
  bool passed = false;
  /// Soft checks are reported but never fail the run.
  bool hard = true;
  json measured;
  std::string tolerance;
  std::string detail;
};

struct ExperimentReport {
  std::string experiment;
  json config;
  std::vector<Check> checks;
  json results = json::object();
  std::vector<std::string> artifacts;  // file names inside the output directory

  bool passed() const;
  const Check* find(const std::string& name) const;
  /// schema_version 1; the timestamp is the only run-dependent field.
  json to_json(bool with_timestamp = true) const;
};

ExperimentReport xia_bc_experiment(const ExperimentConfig& cfg);
ExperimentReport fbeta_norms_experiment(const ExperimentConfig& cfg);
ExperimentReport equivalence_experiment(const ExperimentConfig& cfg);
ExperimentReport berger_coburn_p_experiment(const ExperimentConfig& cfg);
ExperimentReport compactness_profile(const ExperimentConfig& cfg);
ExperimentReport toeplitz_equiv_experiment(const ExperimentConfig& cfg);
ExperimentReport decomposition_check_experiment(const ExperimentConfig& cfg);

/// Resolves defaults, dispatches on cfg.id and writes report.json plus the
/// CSV artifacts into cfg.output.
ExperimentReport run_experiment(const ExperimentConfig& cfg);

/// Closed forms on the classical weight for f = 1/z on |z| >= 1:
/// |H_f e_n| and |H_fbar e_n| (the Gram matrices are diagonal).
double xia_hankel_column(int n);
double conj_xia_hankel_column(int n);

}  // namespace dfock
