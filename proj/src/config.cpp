#include "dfock/config.hpp"

#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "dfock/io.hpp"

namespace dfock {

namespace {

struct Entry {
  std::string value;
  std::string where;  // origin:line
};

const std::map<std::string, std::set<std::string>> kSchema{
    {"run", {"experiment", "output", "threads", "weight", "p", "r", "m", "K", "K_max", "alpha", "beta", "N", "Rmax",
             "ida_Rmax", "symbols", "densities", "domain"}},
    {"weight", {"kind", "a", "m", "c", "profile"}},
    {"numerics",
     {"quad_rad", "quad_ang", "rho_tol", "resolution", "converge_tol", "log_band", "band", "compact_tol"}},
};

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  return s.substr(a, s.find_last_not_of(" \t\r") - a + 1);
}

[[noreturn]] void fail(const Entry& e, const std::string& key, const std::string& msg) {
  throw ConfigError(e.where + ": " + key + ": " + msg);
}

// sections [params] and the unnamed top level share the run keys
std::string canonical_section(const std::string& s) { return s.empty() || s == "params" ? "run" : s; }

void put(std::map<std::string, Entry>& entries, const std::string& section, const std::string& key,
         const std::string& value, const std::string& where) {
  const std::string sec = canonical_section(section);
  const auto it = kSchema.find(sec);
  if (it == kSchema.end()) throw ConfigError(where + ": unknown section [" + section + "]");
  if (!it->second.count(key))
    throw ConfigError(where + ": unknown key '" + key + "'" + (sec == "run" ? "" : " in [" + section + "]"));
  const std::string q = sec + "." + key;
  if (entries.count(q)) throw ConfigError(where + ": " + key + ": duplicate key (first set at " + entries[q].where + ")");
  entries[q] = {value, where};
}

void scan(std::map<std::string, Entry>& entries, const std::string& text, const std::string& origin) {
  std::istringstream in(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string where = origin + ":" + std::to_string(lineno);
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(where + ": malformed section header");
      section = trim(line.substr(1, line.size() - 2));
      if (!kSchema.count(canonical_section(section))) throw ConfigError(where + ": unknown section [" + section + "]");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(where + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError(where + ": missing key");
    if (value.empty()) throw ConfigError(where + ": " + key + ": missing value");
    put(entries, section, key, value, where);
  }
}

std::vector<std::string> split_list(std::string v) {
  v = trim(v);
  if (!v.empty() && v.front() == '[') {
    if (v.back() != ']') throw ConfigError("unbalanced brackets");
    v = v.substr(1, v.size() - 2);
  }
  std::vector<std::string> out;
  int depth = 0;
  std::string cur;
  for (char ch : v) {
    if (ch == '(') ++depth;
    if (ch == ')') --depth;
    if (ch == ',' && depth == 0) {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur += ch;
    }
  }
  if (!trim(cur).empty()) out.push_back(trim(cur));
  for (const auto& s : out)
    if (s.empty()) throw ConfigError("empty list element");
  return out;
}

double to_double(const Entry& e, const std::string& key, const std::string& text) {
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &pos);
  } catch (const std::logic_error&) {
    fail(e, key, "not a number: '" + text + "'");
  }
  if (pos != text.size() || !std::isfinite(v)) fail(e, key, "not a number: '" + text + "'");
  return v;
}

int to_int(const Entry& e, const std::string& key, const std::string& text) {
  const double v = to_double(e, key, text);
  if (v != std::floor(v) || std::abs(v) > 1e9) fail(e, key, "not an integer: '" + text + "'");
  return static_cast<int>(v);
}

RunConfig build(const std::map<std::string, Entry>& entries, const std::filesystem::path& base_dir) {
  RunConfig cfg;
  auto get = [&](const std::string& q) -> const Entry* {
    const auto it = entries.find(q);
    return it == entries.end() ? nullptr : &it->second;
  };
  auto key_of = [](const std::string& q) { return q.substr(q.find('.') + 1); };
  auto real = [&](const std::string& q, auto&& check, const char* what) -> std::optional<double> {
    const Entry* e = get(q);
    if (!e) return std::nullopt;
    const double v = to_double(*e, key_of(q), e->value);
    if (!check(v)) fail(*e, key_of(q), what);
    return v;
  };
  auto positive = [](double v) { return v > 0.0; };
  auto any = [](double) { return true; };
  auto real_list = [&](const std::string& q, bool increasing) {
    std::vector<double> out;
    const Entry* e = get(q);
    if (!e) return out;
    std::vector<std::string> items;
    try {
      items = split_list(e->value);
    } catch (const ConfigError& err) {
      fail(*e, key_of(q), err.what());
    }
    for (const auto& s : items) out.push_back(to_double(*e, key_of(q), s));
    for (std::size_t i = 0; i < out.size(); ++i) {
      if (!(out[i] > 0.0)) fail(*e, key_of(q), "values must be positive");
      if (increasing && i && out[i] <= out[i - 1]) fail(*e, key_of(q), "schedule must be strictly increasing");
    }
    if (out.empty()) fail(*e, key_of(q), "empty list");
    return out;
  };

  const Entry* exp = get("run.experiment");
  if (!exp) throw ConfigError("config: missing required key 'experiment'");
  cfg.id = exp->value;
  const auto& ids = experiment_ids();
  if (std::find(ids.begin(), ids.end(), cfg.id) == ids.end()) fail(*exp, "experiment", "unknown experiment '" + cfg.id + "'");

  if (const Entry* e = get("run.output")) cfg.output = e->value;
  if (const Entry* e = get("run.threads")) {
    cfg.threads = to_int(*e, "threads", e->value);
    if (cfg.threads < 1) fail(*e, "threads", "must be at least 1");
  }
  cfg.p = real_list("run.p", false);
  cfg.r = real("run.r", positive, "must be positive");
  cfg.m = real("run.m", [](double v) { return v > 0.0 && v < 1.0; }, "must lie in (0, 1)");
  if (const Entry* e = get("run.K")) {
    cfg.K = to_int(*e, "K", e->value);
    if (*cfg.K < 0) fail(*e, "K", "must be nonnegative");
  }
  if (const Entry* e = get("run.K_max")) {
    cfg.K_max = to_int(*e, "K_max", e->value);
    if (*cfg.K_max < (cfg.K ? *cfg.K : 0)) fail(*e, "K_max", "must be at least K");
  }
  cfg.alpha = real("run.alpha", any, "");
  cfg.beta = real("run.beta", [](double v) { return v > 0.0 && v < 1.0; }, "must lie in (0, 1)");
  for (double v : real_list("run.N", true)) {
    if (v != std::floor(v)) fail(*get("run.N"), "N", "sizes must be integers");
    cfg.N.push_back(static_cast<int>(v));
  }
  cfg.Rmax = real_list("run.Rmax", true);
  cfg.ida_Rmax = real_list("run.ida_Rmax", true);
  cfg.densities = real_list("run.densities", false);
  cfg.domain = real("run.domain", positive, "must be positive");
  if (const Entry* e = get("run.symbols")) {
    try {
      cfg.symbols = split_list(e->value);
      for (const auto& s : cfg.symbols) parse_symbol(s);
    } catch (const ConfigError& err) {
      fail(*e, "symbols", err.what());
    }
  }

  // weight
  const Entry* kind = get("weight.kind");
  const Entry* shorthand = get("run.weight");
  if (kind && shorthand) fail(*kind, "kind", "weight given twice (top-level 'weight' and [weight] kind)");
  const Entry* wk = kind ? kind : shorthand;
  const std::string wname = wk ? wk->value : "classical";
  auto wreal = [&](const std::string& k, double dflt) {
    return real("weight." + k, positive, "must be positive").value_or(dflt);
  };
  auto reject = [&](std::initializer_list<const char*> keys) {
    for (const char* k : keys)
      if (const Entry* e = get(std::string("weight.") + k)) fail(*e, k, "does not apply to weight '" + wname + "'");
  };
  if (wname == "classical") {
    reject({"a", "m", "c", "profile"});
    cfg.weight = WeightSpec::classical();
  } else if (wname == "gaussian") {
    reject({"m", "c", "profile"});
    cfg.weight = WeightSpec::gaussian(wreal("a", 0.5));
  } else if (wname == "power") {
    reject({"a", "profile"});
    cfg.weight = WeightSpec::power(wreal("m", 4.0), wreal("c", 1.0));
  } else if (wname == "custom") {
    reject({"a", "m", "c"});
    const Entry* prof = get("weight.profile");
    if (!prof) throw ConfigError((wk ? wk->where + ": " : std::string()) + "weight: custom needs [weight] profile");
    std::filesystem::path path = prof->value;
    if (path.is_relative()) path = base_dir / path;
    try {
      cfg.weight = load_weight_profile(path);
    } catch (const ConfigError& err) {
      fail(*prof, "profile", err.what());
    }
  } else {
    fail(*wk, "weight", "unknown weight '" + wname + "' (classical, gaussian, power, custom)");
  }
  try {
    cfg.weight.validate();
  } catch (const ConfigError& err) {
    throw ConfigError((wk ? wk->where + ": " : std::string()) + "weight: " + err.what());
  }

  // numerics
  auto nint = [&](const char* k, int& dst, int lo) {
    if (const Entry* e = get(std::string("numerics.") + k)) {
      dst = to_int(*e, k, e->value);
      if (dst < lo) fail(*e, k, "must be at least " + std::to_string(lo));
    }
  };
  auto npos = [&](const char* k, double& dst) {
    if (auto v = real(std::string("numerics.") + k, positive, "tolerance must be positive")) dst = *v;
  };
  nint("quad_rad", cfg.num.quad_rad, 2);
  nint("quad_ang", cfg.num.quad_ang, 4);
  nint("resolution", cfg.num.resolution, 1);
  npos("rho_tol", cfg.num.rho_tol);
  npos("converge_tol", cfg.num.converge_tol);
  npos("log_band", cfg.num.log_band);
  npos("band", cfg.num.band);
  npos("compact_tol", cfg.num.compact_tol);

  try {
    return resolve_defaults(cfg);
  } catch (const ConfigError& err) {
    throw ConfigError(std::string("config: ") + err.what());
  }
}

}  // namespace

RunConfig parse_config_with_overrides(const std::string& text, const std::vector<std::string>& assignments,
                                      const std::string& origin, const std::filesystem::path& base_dir) {
  std::map<std::string, Entry> entries;
  scan(entries, text, origin);
  for (std::size_t i = 0; i < assignments.size(); ++i) {
    const std::string& a = assignments[i];
    const std::string where = "--set #" + std::to_string(i + 1);
    const auto eq = a.find('=');
    if (eq == std::string::npos) throw ConfigError(where + ": expected key=value");
    std::string key = trim(a.substr(0, eq)), section;
    if (const auto dot = key.find('.'); dot != std::string::npos) section = key.substr(0, dot), key = key.substr(dot + 1);
    const std::string q = canonical_section(section) + "." + key;
    entries.erase(q);  // overrides replace file values
    put(entries, section, key, trim(a.substr(eq + 1)), where);
  }
  return build(entries, base_dir);
}

RunConfig parse_config_string(const std::string& text, const std::string& origin,
                              const std::filesystem::path& base_dir) {
  return parse_config_with_overrides(text, {}, origin, base_dir);
}

RunConfig parse_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_string(ss.str(), path.string(), path.parent_path().empty() ? "." : path.parent_path());
}

std::string config_schema() {
  return R"(Config file: key = value lines, optional [section] headers, '#' comments.
Lists: "1, 2, 3" or "[1, 2, 3]". Unknown keys are rejected.

top level / [run] / [params]
  experiment   xia_bc | fbeta_norms | equivalence | berger_coburn_p |
               compactness | toeplitz_equiv | decomposition_check   (required)
  weight       classical | gaussian | power | custom   (default classical)
  output       output directory (env DFOCK_OUTPUT_DIR overrides)
  threads      worker threads >= 1
  p            list of exponents > 0
  r            disk scale > 0          m      partition ratio in (0, 1)
  K, K_max     local fit degrees, 0 <= K <= K_max
  alpha        weight exponent (default -2/p)
  beta         f_beta exponent in (0, 1)
  N            basis sizes, strictly increasing
  Rmax         seminorm radii, strictly increasing
  ida_Rmax     radii for the 2-D IDA of the principal f_beta
  symbols      list of symbol names, e.g. xia, conj(xia), zbar_disk(1,2),
               re_disk(1), zbar_decay(10), fbeta(0.5), polynomial(1,0.5)
  densities    indicator radii for toeplitz_equiv
  domain       lattice radius (decomposition) or integration radius (toeplitz)
[weight]
  kind         same as top-level weight
  a            gaussian: phi = a |z|^2
  m, c         power: phi = c |z|^m
  profile      custom: CSV (r, laplacian_phi) or (x, y, laplacian_phi)
[numerics]
  quad_rad, quad_ang   rho solver disk rule
  rho_tol, converge_tol, log_band, band, compact_tol   positive tolerances
  resolution           seminorm Gauss nodes per rho panel
)";
}

}  // namespace dfock
