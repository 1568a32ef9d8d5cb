// dfock: command-line front end. Exit codes: 0 pass, 1 check failure,
// 2 config error, 3 numerical fault.

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "dfock/config.hpp"
#include "dfock/decompose.hpp"
#include "dfock/experiments.hpp"
#include "dfock/io.hpp"
#include "dfock/seminorms.hpp"

using namespace dfock;
namespace fs = std::filesystem;

namespace {

struct WeightArgs {
  std::string kind = "classical";
  double a = 0.5;
  double exponent = 4.0;
  double coef = 1.0;
  std::string profile;
  double rho_tol = 1e-10;

  void attach(CLI::App* app) {
    app->add_option("--weight", kind, "classical | gaussian | power | custom")
        ->check(CLI::IsMember({"classical", "gaussian", "power", "custom"}))
        ->capture_default_str();
    app->add_option("--gauss-a", a, "gaussian: phi = a|z|^2, a > 0")->check(CLI::PositiveNumber)->capture_default_str();
    app->add_option("--exponent", exponent, "power: phi = coef |z|^exponent, exponent > 0")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    app->add_option("--coef", coef, "power: coefficient > 0")->check(CLI::PositiveNumber)->capture_default_str();
    app->add_option("--profile", profile, "custom: CSV (r,laplacian_phi) or (x,y,laplacian_phi)");
    app->add_option("--rho-tol", rho_tol, "relative tolerance of the rho solver, > 0")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
  }

  WeightSpec spec() const {
    if (kind == "classical") return WeightSpec::classical();
    if (kind == "gaussian") return WeightSpec::gaussian(a);
    if (kind == "power") return WeightSpec::power(exponent, coef);
    if (profile.empty()) throw ConfigError("--weight custom needs --profile");
    return load_weight_profile(profile);
  }

  WeightModel model() const {
    WeightOptions wo;
    wo.rho_tol = rho_tol;
    return WeightModel(spec(), wo);
  }
};

cplx parse_point(const std::string& s) {
  std::vector<double> v;
  std::stringstream ss(s);
  std::string part;
  while (std::getline(ss, part, ',')) {
    std::size_t pos = 0;
    try {
      v.push_back(std::stod(part, &pos));
    } catch (const std::logic_error&) {
      pos = 0;
    }
    if (pos == 0) throw ConfigError("point '" + s + "': expected x,y");
  }
  if (v.size() == 1) return v[0];
  if (v.size() == 2) return {v[0], v[1]};
  throw ConfigError("point '" + s + "': expected x,y");
}

fs::path output_dir(const std::string& flag) {
  if (const char* env = std::getenv("DFOCK_OUTPUT_DIR"); env && *env) return env;
  return flag;
}

void print(const json& j) { std::cout << j.dump(2) << "\n"; }

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dfock: doubling Fock space laboratory (radius field, lattices, IDA/IMO, Hankel and Toeplitz)"};
  app.require_subcommand(1);
  app.fallthrough();
  std::string out_flag = "dfock_out";
  int threads = 1;
  app.add_option("--output", out_flag, "output directory (env DFOCK_OUTPUT_DIR overrides)")->capture_default_str();
  app.add_option("--threads", threads, "worker threads, >= 1")->check(CLI::PositiveNumber)->capture_default_str();

  WeightArgs w;
  std::string z_str = "0", w_str = "0", symbol = "xia";
  double r = 1.0, m = 0.5, rmax = 3.0, p = 1.0, alpha = -2.0, grid = 0.1;
  int K = 12, N = 60;
  std::vector<double> schedule{5, 10, 20, 40}, p_list{1.0}, radii{0.5, 1.0, 2.0};
  std::vector<int> N_list{100, 200, 400};

  auto* rho_cmd = app.add_subcommand("rho", "rho(z), the radius with mu(D(z, rho)) = 1");
  w.attach(rho_cmd);
  rho_cmd->add_option("--z", z_str, "point x,y")->capture_default_str();

  auto* dbl_cmd = app.add_subcommand("doubling", "doubling constant, Lipschitz check and rho growth exponents");
  w.attach(dbl_cmd);
  dbl_cmd->add_option("--rmax", rmax, "sample disk radius > 0")->check(CLI::PositiveNumber)->capture_default_str();
  dbl_cmd->add_option("--radii", radii, "disk radii for the doubling ratio, > 0")->capture_default_str();

  auto* lat_cmd = app.add_subcommand("lattice", "build and verify an r-lattice; writes lattice.csv");
  w.attach(lat_cmd);
  lat_cmd->add_option("--r", r, "lattice scale > 0")->check(CLI::PositiveNumber)->capture_default_str();
  lat_cmd->add_option("--rmax", rmax, "domain radius > 0")->check(CLI::PositiveNumber)->capture_default_str();

  auto* part_cmd = app.add_subcommand("partition", "partition of unity statistics on a lattice");
  w.attach(part_cmd);
  part_cmd->add_option("--r", r, "lattice scale > 0")->check(CLI::PositiveNumber)->capture_default_str();
  part_cmd->add_option("--m", m, "ratio in (0,1)")->check(CLI::Range(1e-6, 1.0 - 1e-6))->capture_default_str();
  part_cmd->add_option("--rmax", rmax, "domain radius > 0")->check(CLI::PositiveNumber)->capture_default_str();

  auto* g2_cmd = app.add_subcommand("g2", "G_{2,r}(f)(z); writes fit.json (the local fit)");
  auto* mo2_cmd = app.add_subcommand("mo2", "MO_{2,r}(f)(z)");
  for (auto* c : {g2_cmd, mo2_cmd}) {
    w.attach(c);
    c->add_option("--symbol", symbol, "symbol name, e.g. xia, conj(xia), zbar, fbeta(0.5)")->capture_default_str();
    c->add_option("--z", z_str, "point x,y")->capture_default_str();
    c->add_option("--r", r, "disk scale > 0")->check(CLI::PositiveNumber)->capture_default_str();
    c->add_option("--K", K, "fit degree >= 0")->check(CLI::NonNegativeNumber)->capture_default_str();
  }

  auto* ida_cmd = app.add_subcommand("ida", "truncated IDA^{p,2,alpha}_r integrals with verdict");
  auto* imo_cmd = app.add_subcommand("imo", "truncated IMO^{p,2,alpha}_r integrals with verdict");
  for (auto* c : {ida_cmd, imo_cmd}) {
    w.attach(c);
    c->add_option("--symbol", symbol, "symbol name")->capture_default_str();
    c->add_option("--p", p, "exponent > 0")->check(CLI::PositiveNumber)->capture_default_str();
    c->add_option("--alpha", alpha, "rho exponent")->capture_default_str();
    c->add_option("--r", r, "disk scale > 0")->check(CLI::PositiveNumber)->capture_default_str();
    c->add_option("--Rmax", schedule, "increasing truncation radii")->capture_default_str();
  }

  auto* dec_cmd = app.add_subcommand("decompose", "IDA decomposition f = f1 + f2 with bound verification");
  w.attach(dec_cmd);
  dec_cmd->add_option("--symbol", symbol, "symbol name")->capture_default_str();
  dec_cmd->add_option("--r", r, "fit scale > 0")->check(CLI::PositiveNumber)->capture_default_str();
  dec_cmd->add_option("--m", m, "ratio in (0,1)")->check(CLI::Range(1e-6, 1.0 - 1e-6))->capture_default_str();
  dec_cmd->add_option("--rmax", rmax, "lattice domain radius > 0")->check(CLI::PositiveNumber)->capture_default_str();
  dec_cmd->add_option("--grid", grid, "spacing of the dumped f1/f2 grid > 0")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();

  auto* basis_cmd = app.add_subcommand("basis", "log b_n = log ||z^n||^2; writes basis.csv");
  w.attach(basis_cmd);
  basis_cmd->add_option("--N", N, "max degree >= 0")->check(CLI::NonNegativeNumber)->capture_default_str();

  auto* ker_cmd = app.add_subcommand("kernel", "reproducing kernel K(w, z) by truncated series");
  w.attach(ker_cmd);
  ker_cmd->add_option("--w", w_str, "point x,y")->capture_default_str();
  ker_cmd->add_option("--z", z_str, "point x,y")->capture_default_str();
  ker_cmd->add_option("--N", N, "series length >= 1")->check(CLI::PositiveNumber)->capture_default_str();

  auto* hank_cmd = app.add_subcommand("hankel", "singular values and Schatten traces of H_f; writes svals_<f>.csv");
  w.attach(hank_cmd);
  hank_cmd->add_option("--symbol", symbol, "mode-decomposable symbol name")->capture_default_str();
  hank_cmd->add_option("--N", N_list, "increasing basis sizes")->capture_default_str();
  hank_cmd->add_option("--p", p_list, "exponents > 0")->capture_default_str();

  auto* toep_cmd = app.add_subcommand("toeplitz", "Toeplitz Schatten norm vs averaging-transform integral");
  w.attach(toep_cmd);
  toep_cmd->add_option("--a", radii, "indicator radii > 0")->capture_default_str();
  toep_cmd->add_option("--p", p, "exponent > 0")->check(CLI::PositiveNumber)->capture_default_str();
  toep_cmd->add_option("--r", r, "averaging scale > 0")->check(CLI::PositiveNumber)->capture_default_str();
  toep_cmd->add_option("--N", N, "basis size >= 1")->check(CLI::PositiveNumber)->capture_default_str();
  toep_cmd->add_option("--rmax", rmax, "integration radius > 0")->check(CLI::PositiveNumber)->capture_default_str();

  auto* exp_cmd = app.add_subcommand("experiment", "run an experiment from a config file or by id");
  std::string config_path, exp_id;
  std::vector<std::string> sets;
  exp_cmd->add_option("config", config_path, "config file (see --schema)");
  exp_cmd->add_option("--id", exp_id, "experiment id when no config file is given");
  exp_cmd->add_option("--set", sets, "override key=value or section.key=value (repeatable)");
  bool schema = false;
  exp_cmd->add_flag("--schema", schema, "print the config schema and exit");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  const fs::path out = output_dir(out_flag);
  try {
    if (*rho_cmd) {
      const WeightModel model = w.model();
      std::cout << fmt(model.rho(parse_point(z_str))) << "\n";
      return 0;
    }
    if (*dbl_cmd) {
      const WeightModel model = w.model();
      const auto pts = probe_grid(model, rmax, 1.0);
      const DoublingReport rep = doubling_diagnostic(model, pts, radii);
      print(to_json(rep));
      return rep.lipschitz_violation <= 1e-8 ? 0 : 1;
    }
    if (*lat_cmd) {
      const WeightModel model = w.model();
      const Lattice lat = build_lattice(model, r, rmax);
      const LatticeCheck chk = verify_lattice(lat, probe_grid(model, rmax));
      save_lattice_csv(out / "lattice.csv", lat);
      json j = to_json(chk);
      j["centers"] = lat.size();
      j["file"] = (out / "lattice.csv").string();
      print(j);
      return chk.covered && chk.disjoint ? 0 : 1;
    }
    if (*part_cmd) {
      const WeightModel model = w.model();
      auto lat = std::make_shared<const Lattice>(build_lattice(model, r, rmax));
      const auto probes = probe_grid(model, 0.8 * rmax);
      const Partition part = build_partition(model, lat, m, probes);
      const PartitionStats st = partition_stats(part, probes);
      json j = to_json(st);
      j["lattice"] = {{"r", r}, {"rmax", rmax}, {"centers", lat->size()}};
      j["partition"] = {{"m", m}, {"support_factor", part.support_factor()}, {"fit_scale", part.fit_scale()}};
      print(j);
      return st.max_sum_error <= 1e-12 && st.max_dbar_sum <= 1e-10 ? 0 : 1;
    }
    if (*g2_cmd || *mo2_cmd) {
      const WeightModel model = w.model();
      const Symbol f = parse_symbol(symbol);
      const cplx z = parse_point(z_str);
      LocalOptions lo;
      lo.K = K;
      lo.K_max = std::max(K, lo.K_max);
      if (*g2_cmd) {
        const double v = G2(f, model, z, r, lo);
        const DiskFit fit = disk_projection(f, z, r * model.rho(z), K, lo.quad);
        write_json(out / "fit.json", to_json(fit));
        print({{"G2", v}, {"rho", model.rho(z)}, {"fit", (out / "fit.json").string()}});
      } else {
        print({{"MO2", MO2(f, model, z, r, lo)}, {"rho", model.rho(z)}});
      }
      return 0;
    }
    if (*ida_cmd || *imo_cmd) {
      const WeightModel model = w.model();
      const Symbol f = parse_symbol(symbol);
      SeminormOptions so;
      so.p = p;
      so.alpha = alpha;
      so.r = r;
      so.schedule = schedule;
      so.threads = threads;
      const SeminormReport rep = *ida_cmd ? ida_seminorm(f, model, so) : imo_seminorm(f, model, so);
      const std::string name = std::string(*ida_cmd ? "ida" : "imo") + ".json";
      write_json(out / name, to_json(rep));
      write_csv(out / ("profile_" + std::string(*ida_cmd ? "ida" : "imo") + ".csv"), profile_table(rep));
      print(to_json(rep));
      return rep.verdict == Verdict::inconclusive ? 1 : 0;
    }
    if (*dec_cmd) {
      const WeightModel model = w.model();
      const Symbol f = parse_symbol(symbol);
      DecomposeOptions dopt;
      dopt.r = r;
      dopt.m = m;
      dopt.rmax = rmax;
      dopt.threads = threads;
      const Decomposition dec = ida_decompose(f, model, dopt);
      VerifyOptions vo;
      vo.threads = threads;
      const DecompositionReport rep = verify_decomposition(dec, decomposition_probes(dec, 0.0, rmax), vo);
      dump_decomposition(out / "decomposition", dec, rmax, grid);
      json j = to_json(rep);
      j["lattice_size"] = dec.lattice().size();
      write_json(out / "decomposition.json", j);
      print(j);
      return rep.violations == 0 && std::isfinite(rep.max_ratio) ? 0 : 1;
    }
    if (*basis_cmd) {
      const BasisTable b = basis_norms(w.model(), N);
      CsvTable t{{"n", "log_b"}, {}, {}};
      for (int n = 0; n <= N; ++n) t.rows.push_back({double(n), b.log_b[n]});
      write_csv(out / "basis.csv", t);
      print({{"N", N}, {"log_convexity_defect", b.log_convexity_defect()}, {"radius", b.radius}});
      return b.log_convexity_defect() <= 1e-12 ? 0 : 1;
    }
    if (*ker_cmd) {
      const BasisTable b = basis_norms(w.model(), N);
      const KernelValue k = kernel_eval(b, parse_point(w_str), parse_point(z_str));
      print({{"re", k.value.real()}, {"im", k.value.imag()}, {"tail_bound", k.tail}});
      return 0;
    }
    if (*hank_cmd) {
      const BasisTable b = basis_norms(w.model(), N_list.empty() ? 0 : N_list.back() + 4);
      const Symbol f = parse_symbol(symbol);
      const SchattenReport rep = schatten_report(b, f, N_list, p_list);
      std::string tag;
      for (char ch : f.name()) tag += std::isalnum(static_cast<unsigned char>(ch)) || ch == '.' ? ch : '_';
      write_csv(out / ("svals_" + tag + ".csv"), svals_table(rep.svals));
      write_json(out / "hankel.json", to_json(rep));
      print(to_json(rep));
      return 0;
    }
    if (*toep_cmd) {
      const BasisTable b = basis_norms(w.model(), N);
      std::vector<RadialDensity> fam;
      for (double a : radii) fam.push_back(RadialDensity::indicator(a));
      const ToeplitzReport rep = toeplitz_equivalence_report(b, fam, p, r, N, rmax);
      CsvTable t{{"density", "lhs", "rhs", "ratio"}, {}, {}};
      for (const auto& row : rep.rows) t.labels.push_back(row.name), t.rows.push_back({row.lhs, row.rhs, row.ratio});
      write_csv(out / "ratios.csv", t);
      print(to_json(rep));
      return 0;
    }
    if (*exp_cmd) {
      if (schema) {
        std::cout << config_schema();
        return 0;
      }
      std::vector<std::string> all = sets;
      std::string text;
      std::string origin = "<flags>";
      fs::path base = ".";
      if (!config_path.empty()) {
        std::ifstream in(config_path);
        if (!in) throw ConfigError("cannot open config " + config_path);
        std::stringstream ss;
        ss << in.rdbuf();
        text = ss.str();
        origin = config_path;
        base = fs::path(config_path).parent_path().empty() ? fs::path(".") : fs::path(config_path).parent_path();
      }
      if (!exp_id.empty()) all.insert(all.begin(), "experiment=" + exp_id);
      if (std::getenv("DFOCK_OUTPUT_DIR") || app.get_option("--output")->count()) all.push_back("output=" + out.string());
      if (app.get_option("--threads")->count()) all.push_back("threads=" + std::to_string(threads));
      RunConfig cfg = parse_config_with_overrides(text, all, origin, base);
      const ExperimentReport rep = run_experiment(cfg);
      for (const auto& c : rep.checks)
        std::cout << (c.passed ? "PASS " : (c.hard ? "FAIL " : "WARN ")) << c.name << "  " << c.measured.dump()
                  << "  [" << c.tolerance << "]\n";
      std::cout << "report: " << (cfg.output / "report.json").string() << "\n";
      return rep.passed() ? 0 : 1;
    }
  } catch (const ConfigError& e) {
    std::cerr << json{{"error", "config"}, {"message", e.what()}}.dump() << "\n";
    return 2;
  } catch (const NumericalError& e) {
    std::cerr << json{{"error", "numerical"}, {"message", e.what()}}.dump() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << json{{"error", "numerical"}, {"message", e.what()}}.dump() << "\n";
    return 3;
  }
  return 2;
}
