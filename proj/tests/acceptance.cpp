// One line per acceptance criterion. Usage: acceptance [outdir] [criterion...]
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <memory>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "dfock/config.hpp"
#include "dfock/experiments.hpp"

using namespace dfock;
namespace fs = std::filesystem;

namespace {

fs::path g_out = "acceptance_out";

struct Outcome {
  bool passed = false;
  std::string detail;
  bool warn = false;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

ExperimentConfig config(const std::string& text, const std::string& dir) {
  ExperimentConfig c = parse_config_string(text, "acceptance");
  c.output = g_out / dir;
  return c;
}

bool check_ok(const ExperimentReport& rep, const std::string& name, std::string& detail) {
  const Check* c = rep.find(name);
  if (!c) {
    detail += " [missing check '" + name + "']";
    return false;
  }
  if (!c->passed) detail += " [" + name + ": " + c->measured.dump() + "]";
  return c->passed;
}

// 1
Outcome rho_exactness() {
  WeightModel m(WeightSpec::classical());
  std::mt19937_64 gen(1);
  std::uniform_real_distribution<double> u(-10.0, 10.0);
  double err = 0.0;
  for (int i = 0; i < 100; ++i) err = std::max(err, std::abs(m.rho(cplx{u(gen), u(gen)}) - 1.0 / std::sqrt(2 * kPi)));
  WeightModel q(WeightSpec::power(4.0, 1.0));
  const double e2 = std::abs(q.rho(0.0) - std::pow(8 * kPi, -0.25));
  return {err <= 1e-7 && e2 <= 1e-7, "classical max err " + fmt("%.2e", err) + ", power(4,1) rho(0) err " + fmt("%.2e", e2)};
}

// 2
Outcome rho_lipschitz() {
  double worst = -INFINITY;
  for (const WeightSpec& s : {WeightSpec::classical(), WeightSpec::power(4.0, 1.0)}) {
    WeightModel m(s);
    std::mt19937_64 gen(2);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    for (int i = 0; i < 10000; ++i) {
      const cplx z{u(gen), u(gen)}, w{u(gen), u(gen)};
      worst = std::max(worst, std::abs(m.rho(z) - m.rho(w)) - std::abs(z - w));
    }
  }
  return {worst <= 1e-8, "max(|rho(w)-rho(z)| - |w-z|) = " + fmt("%.3e", worst) + " over 2 x 10^4 pairs"};
}

// 3
Outcome kernel() {
  BasisTable b = basis_norms(WeightModel(WeightSpec::classical()), 80);
  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> rad(0.0, 3.0), ang(-kPi, kPi);
  double rel = 0.0;
  for (int i = 0; i < 400; ++i) {
    const cplx w = std::polar(rad(gen), ang(gen)), z = std::polar(rad(gen), ang(gen));
    const cplx want = std::exp(w * std::conj(z)) / kPi;
    rel = std::max(rel, std::abs(kernel_eval(b, w, z).value - want) / std::abs(want));
  }
  WeightModel q(WeightSpec::power(4.0, 1.0));
  BasisTable bq = basis_norms(q, 700);
  double lo = INFINITY, hi = 0.0;
  for (double t = 0.0; t <= 3.0 + 1e-12; t += 0.05)
    for (double th : {0.0, 1.0}) {
      const cplx z = std::polar(t, th);
      const double k = kernel_eval(bq, z, z).value.real();
      const double v = std::sqrt(k) * std::exp(-q.phi(z)) * q.rho(z);
      lo = std::min(lo, v), hi = std::max(hi, v);
    }
  const double spread = hi / lo;
  return {rel <= 1e-8 && spread <= 2.0,
          "classical max rel err " + fmt("%.2e", rel) + " (N=80); power(4,1) norm spread " + fmt("%.4f", spread)};
}

// 4
Outcome projection_oracle() {
  const std::vector<Symbol> syms{Symbol::xia(),
                                 Symbol::xia().conj(),
                                 Symbol::zbar(),
                                 Symbol::fbeta(0.5),
                                 Symbol::fbeta_surrogate(0.5),
                                 Symbol::zbar_disk(1.0),
                                 Symbol::zbar_disk(2.0, 2.0),
                                 Symbol::re_disk(1.0),
                                 Symbol::zbar_decay(2.0),
                                 Symbol::polynomial({1.0, 0.5, 0.25}),
                                 Symbol::custom([](cplx z) { return std::exp(std::conj(z)); }),
                                 Symbol::custom([](cplx z) { return cplx{std::norm(z), 0.0}; })};
  WeightModel m(WeightSpec::classical());
  std::mt19937_64 gen(4);
  std::uniform_real_distribution<double> u(-3.0, 3.0), rr(0.5, 3.0);
  std::vector<std::pair<cplx, double>> disks;
  for (int i = 0; i < 20; ++i) {
    const cplx z{u(gen), u(gen)};
    disks.push_back({z, rr(gen) * m.rho(z)});
  }
  // residuals below 1e-8 rms(f) are roundoff (both routes scatter by ~4e-15 rms there)
  double worst = 0.0;
  int resolved = 0;
  for (const Symbol& f : syms)
    for (auto [z, R] : disks) {
      DiskFit a = disk_projection(f, z, R, 12);
      DiskFit b = lsq_oracle(f, z, R, 12);
      const double floor = 1e-8 * std::sqrt(a.mean_abs_sq);
      if (std::max(a.residual, b.residual) > floor) ++resolved;
      worst = std::max(worst, std::abs(a.residual - b.residual) / std::max({a.residual, b.residual, floor}));
    }
  double gerr = 0.0;
  for (const WeightSpec& s : {WeightSpec::classical(), WeightSpec::power(4.0, 1.0)}) {
    WeightModel w(s);
    for (auto [z, R] : disks)
      for (double r : {0.5, 1.0, 3.0}) {
        const double want = r * w.rho(z) / std::sqrt(2.0);
        gerr = std::max(gerr, std::abs(G2(Symbol::zbar(), w, z, r) - want) / want);
      }
  }
  return {worst <= 1e-6 && gerr <= 1e-6,
          "12 x 20 residual rel diff " + fmt("%.2e", worst) + " (" + std::to_string(resolved) +
                                           " above the 1e-8 rms floor); G2(zbar) vs r rho/sqrt2 rel err " + fmt("%.2e", gerr)};
}

// 5
Outcome lattice_partition() {
  struct Preset {
    WeightSpec spec;
    double rmax;
  };
  const std::vector<Preset> presets{{WeightSpec::classical(), 3.0}, {WeightSpec::gaussian(1.0), 2.5},
                                    {WeightSpec::power(4.0, 1.0), 1.6}};
  bool ok = true;
  double sum_err = 0.0, dbar = 0.0, drift = 0.0;
  std::ostringstream note;
  for (const Preset& p : presets) {
    WeightModel m(p.spec);
    for (double r : {1.0, 0.5}) {
      Lattice lat = build_lattice(m, r, p.rmax);
      LatticeCheck chk = verify_lattice(lat, probe_grid(m, p.rmax, 8.0));
      ok = ok && chk.covered && chk.disjoint;
    }
    auto lat = std::make_shared<Lattice>(build_lattice(m, 0.5, p.rmax));
    const double inner = 0.75 * p.rmax;
    auto coarse = probe_grid(m, inner, 4.0), fine = probe_grid(m, inner, 8.0);
    Partition part = build_partition(m, lat, 0.5, fine);
    PartitionStats a = partition_stats(part, coarse), b = partition_stats(part, fine);
    sum_err = std::max({sum_err, a.max_sum_error, b.max_sum_error});
    dbar = std::max({dbar, a.max_dbar_sum, b.max_dbar_sum});
    const double d = std::abs(b.c_partition / a.c_partition - 1.0);
    drift = std::max(drift, d);
    ok = ok && std::isfinite(a.c_partition) && std::isfinite(b.c_partition);
    note << " " << p.spec.describe() << " C=" << fmt("%.4g", b.c_partition);
  }
  ok = ok && sum_err <= 1e-12 && dbar <= 1e-10 && drift <= 0.10;
  return {ok, "cover/disjoint on 3 presets, |sum psi - 1| " + fmt("%.1e", sum_err) + ", |sum dbar psi| " +
                  fmt("%.1e", dbar) + ", C drift under 2x probe refinement " + fmt("%.3f", drift) + ";" + note.str()};
}

// 6
Outcome decomposition() {
  bool ok = true;
  std::string detail;
  for (const std::string w : {"classical", "power"}) {
    ExperimentReport rep = run_experiment(config(
        "experiment = decomposition_check\nweight = " + w + "\nsymbols = zbar, xia, fbeta(0.5), polynomial(1,0.5,0.25)\n",
        "c6_" + w));
    ok = ok && rep.passed();
    double worst = 0.0;
    for (const Check& c : rep.checks)
      if (c.name.starts_with("ratio stable")) worst = std::max(worst, c.measured["relative_change"].get<double>());
    detail += w + ": " + (rep.passed() ? "all checks pass" : "checks failed") + ", worst refinement change " +
              fmt("%.3f", worst) + "; ";
  }
  return {ok, detail + "entire symbol LHS checked"};
}

// 7
ExperimentReport g_xia;
Outcome xia() {
  const auto t0 = std::chrono::steady_clock::now();
  g_xia = run_experiment(config("experiment = xia_bc\n", "c7"));
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::string d;
  bool ok = true;
  for (const char* n : {"H_f summable p=1", "H_f p=1 converged by N=60", "H_fbar p=1 log slope",
                        "s_1(H_f) against oracle", "s_1(H_fbar) against oracle"})
    ok = check_ok(g_xia, n, d) && ok;
  ok = ok && secs <= 600.0;
  const Check* s = g_xia.find("H_fbar p=1 log slope");
  return {ok, "log slope " + (s ? s->measured["slope"].dump() : "?") + ", runtime " + fmt("%.1f", secs) + " s" + d};
}

// 8
Outcome berger() {
  ExperimentReport rep = run_experiment(config("experiment = berger_coburn_p\n", "c8"));
  std::string d;
  bool ok = check_ok(rep, "finite H_f and H_fbar p=1.5", d);
  ok = check_ok(rep, "finite H_f and H_fbar p=2", d) && ok;
  bool band = true;
  std::string ratios;
  for (const char* n : {"ratio band p=1.5", "ratio band p=2"})
    if (const Check* c = rep.find(n)) {
      band = band && c->passed;
      ratios += " " + std::string(n + 11) + " " + c->measured.dump();
    }
  return {ok, "all S_p norms finite;" + ratios + d, !band};
}

// 9
Outcome equivalence() {
  ExperimentReport rep = run_experiment(config("experiment = equivalence\np = 2\n", "c9"));
  const Check* inc = rep.find("symbols with both sides converged p=2");
  const Check* band = rep.find("ratio band p=2");
  if (!inc || !band) return {false, "missing checks"};
  const int included = inc->measured["included"].get<int>();
  return {included >= 6, std::to_string(included) + " symbols included, band " + band->measured["band"].dump(),
          !band->passed};
}

// 10
Outcome sandwich() {
  WeightModel m(WeightSpec::classical());
  const std::vector<std::string> names{"zbar_disk(1,1)", "zbar_disk(1,2)", "zbar_disk(2,1)", "zbar_disk(2,2)",
                                       "xia",            "conj(xia)",      "re_disk(1)",     "zbar_decay(2)"};
  std::vector<Symbol> fam;
  for (const auto& n : names) fam.push_back(parse_symbol(n));
  std::mt19937_64 gen(10);
  std::uniform_real_distribution<double> u(-4.0, 4.0);
  double slack = -INFINITY;
  for (int i = 0; i < 1000; ++i) {
    const Symbol& f = fam[i % fam.size()];
    const cplx z{u(gen), u(gen)};
    slack = std::max(slack, G2(f, m, z, 1.0) - MO2(f, m, z, 1.0));
  }
  SeminormOptions o;
  o.p = 2.0;
  o.alpha = -1.0;
  o.schedule = {4.0, 8.0, 16.0, 32.0};
  bool ok = slack <= 1e-9;
  double cmax = 0.0;
  for (const Symbol& f : fam) {
    const SeminormReport a = ida_seminorm(f, m, o), b = ida_seminorm(f.conj(), m, o), c = imo_seminorm(f, m, o);
    const double ia = std::sqrt(a.partial.back()), ib = std::sqrt(b.partial.back()), im = std::sqrt(c.partial.back());
    ok = ok && ia <= im * (1 + 1e-9) && ib <= im * (1 + 1e-9);
    ok = ok && c.verdict == Verdict::converged;
    const double C = im / (ia + ib);
    ok = ok && std::isfinite(C);
    cmax = std::max(cmax, C);
  }
  return {ok, "max(G2 - MO2) " + fmt("%.2e", slack) + " on 1000 probes; max C = " + fmt("%.4f", cmax) +
                  " over 8 symbols"};
}

// 11
Outcome fbeta() {
  ExperimentReport cl = run_experiment(config("experiment = fbeta_norms\np = 1\n", "c11_classical"));
  ExperimentReport pw = run_experiment(config("experiment = fbeta_norms\nweight = power\np = 0.5\n", "c11_power"));
  std::string d;
  bool ok = check_ok(cl, "IDA(f_beta) converged", d);
  ok = check_ok(cl, "IMO(f_beta) diverging", d) && ok;
  ok = check_ok(cl, "IMO log-diverging", d) && ok;
  ok = check_ok(pw, "IMO divergence exponent vs rho-aware prediction", d) && ok;
  const json& pm = pw.find("IMO divergence exponent vs rho-aware prediction")->measured;
  return {ok, "classical increment exponent " + cl.results["divergence"]["measured_exponent"].dump() +
                  "; power(4,1) p=0.5 exponent " + pm["measured"].dump() + " vs " + pm["prediction"].dump() + d};
}

// 12
Outcome toeplitz() {
  ExperimentReport rep = run_experiment(config("experiment = toeplitz_equiv\n", "c12"));
  std::string d;
  bool ok = check_ok(rep, "ratio band p=1", d);
  ok = check_ok(rep, "scaling covariance p=1", d) && ok;
  return {ok, "spread " + rep.find("ratio band p=1")->measured["spread"].dump() + d};
}

// 13
Outcome determinism() {
  auto strip = [](const fs::path& p) {
    std::ifstream in(p);
    json j = json::parse(in);
    j.erase("timestamp");
    return j.dump();
  };
  const ExperimentConfig c = config("experiment = xia_bc\n", "c13");
  run_experiment(c);
  const std::string a = strip(c.output / "report.json");
  run_experiment(c);
  const std::string b = strip(c.output / "report.json");
  return {a == b, a == b ? "report.json identical apart from timestamp" : "report.json differs"};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"rho exactness", rho_exactness},
      {"rho Lipschitz", rho_lipschitz},
      {"kernel closed form", kernel},
      {"local projection oracle", projection_oracle},
      {"lattice/partition invariants", lattice_partition},
      {"decomposition bound", decomposition},
      {"Xia dichotomy", xia},
      {"Berger-Coburn p>1", berger},
      {"Schatten/IDA ratio band", equivalence},
      {"IMO/IDA sandwich", sandwich},
      {"f_beta divergence", fbeta},
      {"Toeplitz equivalence", toeplitz},
      {"determinism", determinism}};
  std::vector<int> pick;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (!a.empty() && std::isdigit(static_cast<unsigned char>(a[0])))
      pick.push_back(std::stoi(a));
    else
      g_out = a;
  }
  if (pick.empty())
    for (int i = 1; i <= 13; ++i) pick.push_back(i);

  int failed = 0;
  for (int k : pick) {
    if (k < 1 || k > 13) {
      std::fprintf(stderr, "no criterion %d\n", k);
      return 2;
    }
    const auto& [name, fn] = criteria[k - 1];
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const char* tag = !o.passed ? "FAIL" : o.warn ? "PASS (warn)" : "PASS";
    std::printf("[%s] %2d %s: %s (%.1f s)\n", tag, k, name.c_str(), o.detail.c_str(), secs);
    std::fflush(stdout);
    if (!o.passed) ++failed;
  }
  return failed ? 1 : 0;
}
