#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "dfock/config.hpp"
#include "dfock/experiments.hpp"

using namespace dfock;
namespace fs = std::filesystem;

namespace {

fs::path outdir(const std::string& name) {
  fs::path d = fs::temp_directory_path() / "dfock_test_experiments" / name;
  fs::remove_all(d);
  return d;
}

json read_json(const fs::path& p) {
  std::ifstream in(p);
  return json::parse(in);
}

}  // namespace

TEST_CASE("xia closed-form columns") {
  // n = 0: E1(1); n = 1: Q(1)(1 - Q(1)) with Q(1) = 1/e
  CHECK(xia_hankel_column(0) == doctest::Approx(std::sqrt(0.21938393439552027)).epsilon(1e-14));
  const double e1 = std::exp(-1.0);
  CHECK(xia_hankel_column(1) == doctest::Approx(std::sqrt(e1 * (1 - e1))).epsilon(1e-14));
  CHECK(conj_xia_hankel_column(1) == doctest::Approx(std::sqrt(e1 - 2 * e1 * e1)).epsilon(1e-14));
  CHECK(conj_xia_hankel_column(1) == doctest::Approx(0.311783).epsilon(1e-5));
}

TEST_CASE("xia_bc writes a passing report") {
  RunConfig c = parse_config_string("experiment = xia_bc\n");
  c.output = outdir("xia");
  ExperimentReport rep = run_experiment(c);
  CHECK(rep.passed());
  for (const Check& k : rep.checks) {
    CAPTURE(k.name);
    if (k.hard) CHECK(k.passed);
  }
  json j = read_json(c.output / "report.json");
  CHECK(j["schema_version"] == 1);
  CHECK(j["experiment"] == "xia_bc");
  CHECK(j.contains("timestamp"));
  for (const std::string& a : rep.artifacts) CHECK(fs::exists(c.output / a));
}

TEST_CASE("reports are deterministic apart from the timestamp") {
  RunConfig c = parse_config_string("experiment = toeplitz_equiv\n");
  c.output = outdir("det1");
  json a = run_experiment(c).to_json(false);
  c.output = outdir("det2");
  json b = run_experiment(c).to_json(false);
  a["config"].erase("output");
  b["config"].erase("output");
  CHECK(a.dump() == b.dump());
  CHECK_FALSE(a.contains("timestamp"));
}

TEST_CASE("toeplitz_equiv passes on the classical weight") {
  RunConfig c = parse_config_string("experiment = toeplitz_equiv\n");
  c.output = outdir("toe");
  ExperimentReport rep = run_experiment(c);
  CHECK(rep.passed());
  REQUIRE(rep.find("Toeplitz eigenvalues against P(n+1, a^2)") != nullptr);
}

TEST_CASE("compactness: decaying symbol passes, non-decaying fails") {
  RunConfig c = parse_config_string("experiment = compactness\n");
  c.output = outdir("cmp");
  CHECK(run_experiment(c).passed());
  RunConfig d = parse_config_string("experiment = compactness\nsymbols = zbar\n");
  d.output = outdir("cmp2");
  CHECK_FALSE(run_experiment(d).passed());
}

TEST_CASE("config to JSON is stable") {
  RunConfig c = parse_config_string("experiment = fbeta_norms\nweight = power\n");
  json j = to_json(c);
  CHECK(j["experiment"] == "fbeta_norms");
  CHECK(j.dump().find("power") != std::string::npos);
  CHECK(c.ida_Rmax == std::vector<double>{2.0, 3.0, 4.0});
}
