#include "dfock/io.hpp"

#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace dfock {

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// finite doubles only; JSON has no inf/nan
json num(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

json num_list(const std::vector<double>& v) {
  json out = json::array();
  for (double x : v) out.push_back(num(x));
  return out;
}

json cplx_json(cplx z) { return json::array({num(z.real()), num(z.imag())}); }

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  return s.substr(a, s.find_last_not_of(" \t\r") - a + 1);
}

// regular grid spanned by the distinct coordinates
struct Grid {
  double x0, y0, h;
  int nx, ny;
};

Grid infer_grid(const std::vector<double>& xs, const std::vector<double>& ys, const std::string& what) {
  std::set<double> ux(xs.begin(), xs.end()), uy(ys.begin(), ys.end());
  if (ux.size() < 2 || uy.size() < 2) throw ConfigError(what + ": need at least a 2x2 grid");
  const std::vector<double> vx(ux.begin(), ux.end()), vy(uy.begin(), uy.end());
  const double h = vx[1] - vx[0];
  auto regular = [h](const std::vector<double>& v) {
    for (std::size_t i = 0; i < v.size(); ++i)
      if (std::abs(v[i] - (v[0] + i * h)) > 1e-9 * std::max(1.0, std::abs(v[i]))) return false;
    return true;
  };
  if (!regular(vx) || !regular(vy)) throw ConfigError(what + ": samples do not form a regular square grid");
  if (xs.size() != vx.size() * vy.size()) throw ConfigError(what + ": grid has missing or duplicate samples");
  return {vx[0], vy[0], h, static_cast<int>(vx.size()), static_cast<int>(vy.size())};
}

std::size_t grid_index(const Grid& g, double x, double y) {
  const auto ix = static_cast<std::size_t>(std::llround((x - g.x0) / g.h));
  const auto iy = static_cast<std::size_t>(std::llround((y - g.y0) / g.h));
  return iy * g.nx + ix;
}

}  // namespace

void write_csv(const std::filesystem::path& path, const CsvTable& table) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path.string());
  for (std::size_t i = 0; i < table.header.size(); ++i) out << (i ? "," : "") << table.header[i];
  out << "\n";
  const bool labelled = !table.labels.empty();
  if (labelled && table.labels.size() != table.rows.size()) throw ConfigError("write_csv: one label per row");
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    if (labelled) {
      std::string q;
      for (char c : table.labels[r]) q += c == '"' ? std::string("\"\"") : std::string(1, c);
      out << '"' << q << '"';
    }
    for (std::size_t i = 0; i < row.size(); ++i) out << (i || labelled ? "," : "") << fmt(row[i]);
    out << "\n";
  }
}

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  CsvTable t;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    // quoted cells may hold commas; "" is a literal quote
    std::vector<std::string> cells;
    std::vector<bool> quoted;
    std::string cell;
    bool in_quotes = false, was_quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
      const char c = line[i];
      if (in_quotes) {
        if (c == '"' && i + 1 < line.size() && line[i + 1] == '"')
          cell += '"', ++i;
        else if (c == '"')
          in_quotes = false;
        else
          cell += c;
      } else if (c == '"') {
        in_quotes = was_quoted = true;
      } else if (c == ',') {
        cells.push_back(was_quoted ? cell : trim(cell));
        quoted.push_back(was_quoted);
        cell.clear();
        was_quoted = false;
      } else {
        cell += c;
      }
    }
    if (in_quotes) throw ConfigError(path.string() + ":" + std::to_string(lineno) + ": unterminated quote");
    cells.push_back(was_quoted ? cell : trim(cell));
    quoted.push_back(was_quoted);
    if (t.header.empty()) {
      t.header = cells;
      continue;
    }
    if (cells.size() != t.header.size())
      throw ConfigError(path.string() + ":" + std::to_string(lineno) + ": expected " +
                        std::to_string(t.header.size()) + " columns");
    std::size_t first = 0;
    if (quoted[0]) {
      if (t.rows.size() != t.labels.size())
        throw ConfigError(path.string() + ":" + std::to_string(lineno) + ": label column on some rows only");
      t.labels.push_back(cells[0]);
      first = 1;
    } else if (!t.labels.empty()) {
      throw ConfigError(path.string() + ":" + std::to_string(lineno) + ": missing label");
    }
    std::vector<double> row;
    for (std::size_t k = first; k < cells.size(); ++k) {
      const std::string& c = cells[k];
      std::size_t pos = 0;
      double v = 0.0;
      try {
        v = std::stod(c, &pos);
      } catch (const std::logic_error&) {
        pos = 0;
      }
      if (pos == 0 || pos != c.size())
        throw ConfigError(path.string() + ":" + std::to_string(lineno) + ": bad number '" + c + "'");
      row.push_back(v);
    }
    t.rows.push_back(std::move(row));
  }
  if (t.header.empty()) throw ConfigError(path.string() + ": empty file");
  return t;
}

void write_json(const std::filesystem::path& path, const json& doc) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << doc.dump(2) << "\n";
}

void save_lattice_csv(const std::filesystem::path& path, const Lattice& lattice) {
  CsvTable t{{"index", "re", "im", "rho"}, {}, {}};
  for (std::size_t j = 0; j < lattice.size(); ++j)
    t.rows.push_back({static_cast<double>(j), lattice.centers[j].real(), lattice.centers[j].imag(), lattice.rho[j]});
  write_csv(path, t);
}

Lattice load_lattice_csv(const std::filesystem::path& path, double r, double rmax) {
  const CsvTable t = read_csv(path);
  if (t.header != std::vector<std::string>{"index", "re", "im", "rho"})
    throw ConfigError(path.string() + ": expected header index,re,im,rho");
  Lattice lat;
  lat.r = r;
  lat.rmax = rmax;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    if (t.rows[i][0] != static_cast<double>(i)) throw ConfigError(path.string() + ": indices must run 0, 1, ...");
    if (!(t.rows[i][3] > 0.0)) throw ConfigError(path.string() + ": rho must be positive");
    lat.centers.emplace_back(t.rows[i][1], t.rows[i][2]);
    lat.rho.push_back(t.rows[i][3]);
  }
  return lat;
}

WeightSpec load_weight_profile(const std::filesystem::path& path) {
  const CsvTable t = read_csv(path);
  if (t.header == std::vector<std::string>{"r", "laplacian_phi"}) {
    std::vector<double> r, lap;
    for (const auto& row : t.rows) r.push_back(row[0]), lap.push_back(row[1]);
    WeightSpec s = WeightSpec::custom_radial(std::move(r), std::move(lap));
    s.validate();
    return s;
  }
  if (t.header == std::vector<std::string>{"x", "y", "laplacian_phi"}) {
    std::vector<double> xs, ys;
    for (const auto& row : t.rows) xs.push_back(row[0]), ys.push_back(row[1]);
    const Grid g = infer_grid(xs, ys, path.string());
    PlanarGrid pg{g.x0, g.y0, g.h, g.nx, g.ny, std::vector<double>(static_cast<std::size_t>(g.nx) * g.ny)};
    for (const auto& row : t.rows) pg.values[grid_index(g, row[0], row[1])] = row[2];
    WeightSpec s = WeightSpec::custom_planar(std::move(pg));
    s.validate();
    return s;
  }
  throw ConfigError(path.string() + ": expected columns r,laplacian_phi or x,y,laplacian_phi");
}

Symbol load_sampled_symbol(const std::filesystem::path& path) {
  const CsvTable t = read_csv(path);
  if (t.header != std::vector<std::string>{"x", "y", "re_f", "im_f"})
    throw ConfigError(path.string() + ": expected columns x,y,re_f,im_f");
  std::vector<double> xs, ys;
  for (const auto& row : t.rows) xs.push_back(row[0]), ys.push_back(row[1]);
  const Grid g = infer_grid(xs, ys, path.string());
  SampledField f{g.x0, g.y0, g.h, g.nx, g.ny, std::vector<cplx>(static_cast<std::size_t>(g.nx) * g.ny)};
  for (const auto& row : t.rows) f.values[grid_index(g, row[0], row[1])] = {row[2], row[3]};
  return Symbol::sampled(std::move(f));
}

json to_json(const DiskFit& fit) {
  json c = json::array();
  for (int k = 0; k <= fit.degree; ++k) c.push_back(cplx_json(fit.coeff(k)));
  return {{"center", cplx_json(fit.center)},
          {"radius", num(fit.radius)},
          {"degree", fit.degree},
          {"quad", {fit.quad.n_rad, fit.quad.n_ang}},
          {"coefficients", c},
          {"residual", num(fit.residual)},
          {"mean_abs_sq", num(fit.mean_abs_sq)},
          {"gap_residual_sq", num(fit.gap_residual_sq)},
          {"clamped", fit.clamped},
          {"condition", num(fit.condition)}};
}

json to_json(const SchattenReport& rep) {
  json traces = json::array();
  for (const auto& t : rep.traces)
    traces.push_back({{"p", num(t.p)},
                      {"sums", num_list(t.sums)},
                      {"verdict", to_string(t.verdict)},
                      {"increment_exponent", num(t.increment_exponent)},
                      {"log_slope", num(t.log_slope)},
                      {"tail_estimate", num(t.tail_estimate)},
                      {"norm", num(t.norm)}});
  json head = json::array();
  for (std::size_t i = 0; i < std::min<std::size_t>(10, rep.svals.size()); ++i) head.push_back(num(rep.svals[i]));
  return {{"symbol", rep.symbol}, {"N", rep.N}, {"leading_svals", head}, {"traces", traces}};
}

json to_json(const SeminormReport& rep) {
  return {{"quantity", rep.quantity},
          {"symbol", rep.symbol},
          {"p", num(rep.p)},
          {"alpha", num(rep.alpha)},
          {"r", num(rep.r)},
          {"schedule", num_list(rep.schedule)},
          {"partial", num_list(rep.partial)},
          {"excluded", num_list(rep.excluded)},
          {"verdict", to_string(rep.verdict)},
          {"increment_exponent", num(rep.fit.exponent)},
          {"fit_residual", num(rep.fit.residual)},
          {"monotone", rep.fit.monotone},
          {"log_divergence", rep.fit.log_divergence},
          {"radial_reduction", rep.radial_reduction},
          {"note", rep.note}};
}

json to_json(const DecompositionReport& rep, bool with_rows) {
  json j{{"max_ratio", num(rep.max_ratio)},
         {"max_lhs", num(rep.max_lhs)},
         {"probes", rep.probes},
         {"ratio_probes", rep.ratio_probes},
         {"violations", rep.violations},
         {"max_reconstruction_error", num(rep.max_reconstruction_error)},
         {"max_anchor_gap", num(rep.max_anchor_gap)}};
  if (with_rows) {
    json rows = json::array();
    for (const auto& r : rep.rows)
      rows.push_back({{"z", cplx_json(r.z)},
                      {"dbar_term", num(r.dbar_term)},
                      {"dbar_mean", num(r.dbar_mean)},
                      {"f2_mean", num(r.f2_mean)},
                      {"reference", num(r.reference)}});
    j["rows"] = rows;
  }
  return j;
}

json to_json(const LatticeCheck& check) {
  json unc = json::array();
  for (std::size_t i = 0; i < std::min<std::size_t>(20, check.uncovered.size()); ++i)
    unc.push_back(cplx_json(check.uncovered[i]));
  return {{"covered", check.covered},
          {"disjoint", check.disjoint},
          {"probes", check.probes},
          {"uncovered", unc},
          {"worst_separation", num(check.worst_separation)}};
}

json to_json(const PartitionStats& s) {
  return {{"max_sum_error", num(s.max_sum_error)},
          {"max_dbar_sum", num(s.max_dbar_sum)},
          {"c_partition", num(s.c_partition)},
          {"max_support_violation", num(s.max_support_violation)},
          {"probes", s.probes}};
}

json to_json(const DoublingReport& r) {
  return {{"c_dbl", num(r.c_dbl)},
          {"lipschitz_violation", num(r.lipschitz_violation)},
          {"eta_hat", num(r.eta_hat)},
          {"beta_hat", num(r.beta_hat)},
          {"samples", r.samples}};
}

json to_json(const ToeplitzReport& rep) {
  json rows = json::array();
  for (const auto& r : rep.rows)
    rows.push_back({{"name", r.name},
                    {"lhs", num(r.lhs)},
                    {"rhs", num(r.rhs)},
                    {"ratio", num(r.ratio)},
                    {"excluded", r.excluded},
                    {"note", r.note}});
  return {{"rows", rows}, {"spread", num(rep.spread)}};
}

json to_json(const WeightSpec& spec) {
  json j{{"describe", spec.describe()}};
  switch (spec.kind) {
    case WeightKind::gaussian: j["kind"] = "gaussian", j["a"] = spec.a; break;
    case WeightKind::power: j["kind"] = "power", j["m"] = spec.m, j["c"] = spec.c; break;
    case WeightKind::custom_radial: j["kind"] = "custom_radial", j["nodes"] = spec.profile_r.size(); break;
    case WeightKind::custom_planar:
      j["kind"] = "custom_planar", j["grid"] = {spec.planar.nx, spec.planar.ny, spec.planar.h};
      break;
  }
  return j;
}

CsvTable svals_table(const std::vector<double>& svals) {
  CsvTable t{{"n", "s_n"}, {}, {}};
  for (std::size_t i = 0; i < svals.size(); ++i) t.rows.push_back({static_cast<double>(i + 1), svals[i]});
  return t;
}

CsvTable profile_table(const SeminormReport& rep) {
  CsvTable t{{"t", "mean", "max"}, {}, {}};
  for (const auto& s : rep.profile) t.rows.push_back({s.t, s.mean, s.max});
  return t;
}

void dump_decomposition(const std::filesystem::path& prefix, const Decomposition& dec, double rmax, double h) {
  if (!(h > 0.0)) throw ConfigError("dump_decomposition: grid spacing must be positive");
  CsvTable coeffs{{"index", "re_center", "im_center", "radius", "k", "re_c", "im_c"}, {}, {}};
  const auto& fits = dec.fits();
  for (std::size_t j = 0; j < fits.size(); ++j)
    for (int k = 0; k <= fits[j].degree; ++k) {
      const cplx c = fits[j].coeff(k);
      coeffs.rows.push_back({static_cast<double>(j), fits[j].center.real(), fits[j].center.imag(), fits[j].radius,
                             static_cast<double>(k), c.real(), c.imag()});
    }
  write_csv(prefix.string() + "_coeffs.csv", coeffs);
  CsvTable fields{{"x", "y", "re_f1", "im_f1", "re_f2", "im_f2"}, {}, {}};
  const int n = static_cast<int>(std::floor(rmax / h));
  for (int iy = -n; iy <= n; ++iy)
    for (int ix = -n; ix <= n; ++ix) {
      const cplx z(ix * h, iy * h);
      if (std::abs(z) > rmax) continue;
      const cplx a = dec.f1(z), b = dec.f2(z);
      fields.rows.push_back({z.real(), z.imag(), a.real(), a.imag(), b.real(), b.imag()});
    }
  write_csv(prefix.string() + "_fields.csv", fields);
}

}  // namespace dfock
