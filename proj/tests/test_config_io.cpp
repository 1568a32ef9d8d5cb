#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>

#include "dfock/config.hpp"
#include "dfock/io.hpp"

using namespace dfock;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  fs::path dir = fs::temp_directory_path() / "dfock_test_config_io";
  fs::create_directories(dir);
  return dir / name;
}

std::string error_of(const std::string& text) {
  try {
    parse_config_string(text, "case.cfg");
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("minimal config resolves experiment defaults") {
  RunConfig c = parse_config_string("experiment = xia_bc\n");
  CHECK(c.id == "xia_bc");
  CHECK(c.weight.kind == WeightKind::gaussian);
  CHECK(c.weight.a == 0.5);
  CHECK(c.N == std::vector<int>{250, 500, 1000, 2000});
  CHECK_FALSE(c.p.empty());
}

TEST_CASE("sections, lists and comments") {
  RunConfig c = parse_config_string(
      "# comment\n"
      "[run]\n"
      "experiment = equivalence   # trailing\n"
      "p = [2]\n"
      "N = 100, 200, 400\n"
      "symbols = [xia, conj(xia), zbar_disk(1,2)]\n"
      "[weight]\n"
      "kind = power\n"
      "m = 3\n"
      "[numerics]\n"
      "band = 12\n");
  CHECK(c.N == std::vector<int>{100, 200, 400});
  CHECK(c.symbols.size() == 3);
  CHECK(c.symbols[2] == "zbar_disk(1,2)");
  CHECK(c.weight.kind == WeightKind::power);
  CHECK(c.weight.m == 3.0);
  CHECK(c.weight.c == 1.0);
  CHECK(c.num.band == 12.0);
}

TEST_CASE("errors name the line and the key") {
  const std::string neg = error_of("experiment = fbeta_norms\nr = -1\n");
  CHECK(neg.find("case.cfg:2") != std::string::npos);
  CHECK(neg.find("r: must be positive") != std::string::npos);

  const std::string sched = error_of("experiment = xia_bc\nN = [10, 5]\n");
  CHECK(sched.find("case.cfg:2") != std::string::npos);
  CHECK(sched.find("N:") != std::string::npos);
  CHECK(sched.find("strictly increasing") != std::string::npos);

  CHECK(error_of("experiment = xia_bc\nfoo = 1\n").find("case.cfg:2: unknown key 'foo'") != std::string::npos);
  CHECK(error_of("experiment = xia_bc\n[bogus]\n").find("unknown section") != std::string::npos);
  CHECK(error_of("experiment = xia_bc\np = 1\np = 2\n").find("duplicate") != std::string::npos);
  CHECK(error_of("p = 1\n").find("experiment") != std::string::npos);
  CHECK(error_of("experiment = nope\n").find("unknown experiment") != std::string::npos);
  CHECK(error_of("experiment = xia_bc\nN = 1.5, 3\n").find("N") != std::string::npos);
  CHECK(error_of("experiment = xia_bc\n[weight]\nkind = classical\na = 2\n").find("does not apply") !=
        std::string::npos);
  CHECK(error_of("experiment = xia_bc\nsymbols = nonsense(\n").find("symbols") != std::string::npos);
}

TEST_CASE("overrides") {
  RunConfig c = parse_config_with_overrides("experiment = equivalence\n", {"p=1", "weight=power", "numerics.band=3"});
  CHECK(c.p == std::vector<double>{1.0});
  CHECK(c.weight.kind == WeightKind::power);
  CHECK(c.num.band == 3.0);
  CHECK_FALSE(config_schema().empty());
}

TEST_CASE("custom weight profiles from CSV") {
  const fs::path radial = scratch("radial.csv");
  {
    std::ofstream out(radial);
    out << "r,laplacian_phi\n";
    for (int i = 0; i <= 80; ++i) out << 0.1 * i << ",2\n";
  }
  WeightSpec s = load_weight_profile(radial);
  CHECK(s.kind == WeightKind::custom_radial);
  CHECK(WeightModel(s).rho(1.0) == doctest::Approx(1.0 / std::sqrt(2 * kPi)).epsilon(1e-8));

  const fs::path planar = scratch("planar.csv");
  {
    std::ofstream out(planar);
    out << "x,y,laplacian_phi\n";
    for (int iy = 0; iy <= 80; ++iy)
      for (int ix = 0; ix <= 80; ++ix) out << -4 + 0.1 * ix << "," << -4 + 0.1 * iy << ",2\n";
  }
  WeightSpec p = load_weight_profile(planar);
  CHECK(p.kind == WeightKind::custom_planar);
  CHECK(p.planar.nx == 81);
  CHECK(WeightModel(p).rho(cplx{0.5, 0.5}) == doctest::Approx(1.0 / std::sqrt(2 * kPi)).epsilon(1e-8));

  RunConfig c = parse_config_string("experiment = toeplitz_equiv\n[weight]\nkind = custom\nprofile = radial.csv\n",
                                    "x.cfg", radial.parent_path());
  CHECK(c.weight.kind == WeightKind::custom_radial);
}

TEST_CASE("CSV round trips") {
  const fs::path f = scratch("t.csv");
  CsvTable t{{"name", "a", "b"}, {{1.0, 1.0 / 3.0}, {-2.5e-300, 7.0}}, {"x,y", "say \"hi\""}};
  write_csv(f, t);
  CsvTable u = read_csv(f);
  CHECK(u.header == t.header);
  CHECK(u.labels == t.labels);
  CHECK(u.rows == t.rows);

  std::ofstream(scratch("bad.csv")) << "a,b\n1,2\n3,zz\n";
  try {
    read_csv(scratch("bad.csv"));
    FAIL("no error");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find(":3") != std::string::npos);
  }
}

TEST_CASE("lattice CSV round trip") {
  WeightModel m(WeightSpec::classical());
  Lattice lat = build_lattice(m, 1.0, 2.0);
  save_lattice_csv(scratch("lat.csv"), lat);
  Lattice back = load_lattice_csv(scratch("lat.csv"), 1.0, 2.0);
  REQUIRE(back.size() == lat.size());
  for (std::size_t j = 0; j < lat.size(); ++j) {
    CHECK(back.centers[j] == lat.centers[j]);
    CHECK(back.rho[j] == lat.rho[j]);
  }
}

TEST_CASE("sampled symbols interpolate bilinearly") {
  const fs::path f = scratch("sym.csv");
  {
    std::ofstream out(f);
    out << "x,y,re_f,im_f\n";
    for (int iy = 0; iy <= 10; ++iy)
      for (int ix = 0; ix <= 10; ++ix) {
        const double x = -1 + 0.2 * ix, y = -1 + 0.2 * iy;
        out << x << "," << y << "," << 2 * x + y << "," << -x << "\n";
      }
  }
  Symbol s = load_sampled_symbol(f);
  const cplx z{0.33, -0.41};
  CHECK(std::abs(s(z) - cplx{2 * 0.33 - 0.41, -0.33}) <= 1e-12);
  CHECK(s(cplx{5.0, 0.0}) == cplx{0.0, 0.0});
}

TEST_CASE("symbol names round trip") {
  for (const std::string name : {"xia", "zbar", "fbeta(0.5)", "fbeta_surrogate(0.25)", "zbar_disk(1,2)", "re_disk(1)",
                                 "zbar_decay(2)", "polynomial(1,0.5,0.25)", "conj(xia)"}) {
    CAPTURE(name);
    Symbol s = parse_symbol(name);
    CHECK(s.name() == name);
    Symbol t = parse_symbol(s.name());
    for (cplx z : {cplx{0.3, 0.2}, cplx{1.7, -2.1}}) CHECK(std::abs(s(z) - t(z)) <= 1e-15 * (1 + std::abs(s(z))));
  }
  CHECK(std::abs(parse_symbol("const(1+2i)")(cplx{3.0, 1.0}) - cplx{1.0, 2.0}) <= 1e-15);
  CHECK(std::abs(parse_symbol("conj(xia)")(cplx{2.0, 1.0}) - std::conj(1.0 / cplx{2.0, 1.0})) <= 1e-15);
  CHECK_THROWS_AS(parse_symbol("fbeta("), ConfigError);
  CHECK_THROWS_AS(parse_symbol("unknown"), ConfigError);
}

TEST_CASE("JSON views") {
  DiskFit fit = disk_projection(Symbol::zbar(), {1.0, 0.0}, 0.5, 2);
  json j = to_json(fit);
  CHECK(j.contains("residual"));
  CHECK(j["residual"].get<double>() == doctest::Approx(0.5 / std::sqrt(2.0)));
  json w = to_json(WeightSpec::power(4.0, 1.0));
  CHECK(w.dump().find("power") != std::string::npos);
}
