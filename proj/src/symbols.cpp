#include "dfock/symbols.hpp"

#include <sstream>

namespace dfock {

namespace {

cplx eval_modes(const std::vector<RadialMode>& modes, cplx z) {
  const double r = std::abs(z);
  const double theta = std::arg(z);
  cplx acc = 0.0;
  for (const RadialMode& m : modes) {
    if (r < m.lo || r > m.hi) continue;
    if (r == 0.0 && m.k != 0) continue;
    acc += m.g(r) * std::polar(1.0, m.k * theta);
  }
  return acc;
}

// Distance from z to the ray {s e^{i gamma} : s >= 0}.
double distance_to_ray(cplx z, double gamma) {
  const cplx w = z * std::polar(1.0, -gamma);
  if (w.real() <= 0.0) return std::abs(z);
  return std::abs(w.imag());
}

std::string fmt(double x) {
  std::ostringstream os;
  os << x;
  return os.str();
}

}  // namespace

Symbol Symbol::xia() {
  Symbol s;
  s.kind_ = SymbolKind::xia;
  s.name_ = "xia";
  s.eval_ = std::make_shared<const std::function<cplx(cplx)>>([](cplx z) -> cplx {
    return std::abs(z) >= 1.0 ? 1.0 / z : cplx(0.0);
  });
  s.modes_ = std::make_shared<const std::vector<RadialMode>>(
      std::vector<RadialMode>{{-1, [](double r) { return cplx(1.0 / r); }, 1.0, std::numeric_limits<double>::infinity(), {1.0}}});
  s.holo_ = [](cplx z, double R) { return std::abs(z) - R > 1.0; };
  return s;
}

Symbol Symbol::fbeta(double beta, double cut_angle) {
  if (!(beta > 0.0 && beta < 1.0)) throw ConfigError("fbeta: beta must lie in (0, 1)");
  Symbol s;
  s.kind_ = SymbolKind::fbeta;
  s.name_ = "fbeta(" + fmt(beta) + ")";
  s.beta_ = beta;
  s.cut_ = cut_angle;
  s.eval_ = std::make_shared<const std::function<cplx(cplx)>>([beta, cut_angle](cplx z) -> cplx {
    const double r = std::abs(z);
    if (r < 1.0) return 0.0;
    const double t = std::arg(z * std::polar(1.0, -(cut_angle - kPi)));
    const double theta = t + cut_angle - kPi;
    return std::polar(std::pow(r, beta - 1.0), (beta - 1.0) * theta);
  });
  s.modes_ = std::make_shared<const std::vector<RadialMode>>(std::vector<RadialMode>{
      {-1, [beta](double r) { return cplx(std::pow(r, beta - 1.0)); }, 1.0,
       std::numeric_limits<double>::infinity(), {1.0}}});
  s.holo_ = [cut_angle](cplx z, double R) {
    return std::abs(z) - R > 1.0 && distance_to_ray(z, cut_angle) > R * (1.0 + 1e-12);
  };
  return s;
}

Symbol Symbol::fbeta_surrogate(double beta) {
  if (!(beta >= 0.0 && beta < 1.0)) throw ConfigError("fbeta_surrogate: beta must lie in [0, 1)");
  Symbol s = mode_sum({{-1, [beta](double r) { return cplx(std::pow(r, beta - 1.0)); }, 1.0,
                        std::numeric_limits<double>::infinity(), {1.0}}},
                      "fbeta_surrogate(" + fmt(beta) + ")");
  s.beta_ = beta;
  if (beta == 0.0) s.holo_ = [](cplx z, double R) { return std::abs(z) - R > 1.0; };
  return s;
}

Symbol Symbol::zbar() {
  Symbol s;
  s.kind_ = SymbolKind::zbar;
  s.name_ = "zbar";
  s.eval_ = std::make_shared<const std::function<cplx(cplx)>>([](cplx z) { return std::conj(z); });
  s.modes_ = std::make_shared<const std::vector<RadialMode>>(
      std::vector<RadialMode>{{-1, [](double r) { return cplx(r); }, 0.0, std::numeric_limits<double>::infinity(), {}}});
  return s;
}

Symbol Symbol::mode_sum(std::vector<RadialMode> modes, std::string name) {
  for (const RadialMode& m : modes)
    if (!m.g || !(m.hi >= m.lo) || m.lo < 0.0) throw ConfigError("mode_sum: malformed mode");
  Symbol s;
  s.kind_ = SymbolKind::mode_sum;
  s.name_ = std::move(name);
  auto shared = std::make_shared<const std::vector<RadialMode>>(std::move(modes));
  s.modes_ = shared;
  s.eval_ = std::make_shared<const std::function<cplx(cplx)>>([shared](cplx z) { return eval_modes(*shared, z); });
  // Vanishes outside the union of supports.
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for (const RadialMode& m : *shared) lo = std::min(lo, m.lo), hi = std::max(hi, m.hi);
  s.holo_ = [lo, hi](cplx z, double R) {
    const double az = std::abs(z);
    return az - R > hi || az + R < lo;
  };
  return s;
}

Symbol Symbol::polynomial(std::vector<cplx> coeffs) {
  std::string name = "polynomial(";
  for (std::size_t k = 0; k < coeffs.size(); ++k) {
    if (k) name += ",";
    name += fmt(coeffs[k].real());
    if (coeffs[k].imag() != 0.0) name += (coeffs[k].imag() > 0 ? "+" : "") + fmt(coeffs[k].imag()) + "i";
  }
  name += ")";
  std::vector<RadialMode> modes;
  for (std::size_t k = 0; k < coeffs.size(); ++k) {
    if (coeffs[k] == cplx(0.0)) continue;
    const cplx c = coeffs[k];
    const int kk = static_cast<int>(k);
    modes.push_back({kk, [c, kk](double r) { return c * std::pow(r, kk); }, 0.0,
                     std::numeric_limits<double>::infinity(), {}});
  }
  Symbol s = mode_sum(std::move(modes), name);
  auto shared = std::make_shared<const std::vector<cplx>>(std::move(coeffs));
  s.eval_ = std::make_shared<const std::function<cplx(cplx)>>([shared](cplx z) {
    cplx acc = 0.0;
    for (auto it = shared->rbegin(); it != shared->rend(); ++it) acc = acc * z + *it;
    return acc;
  });
  s.holo_ = [](cplx, double) { return true; };
  return s;
}

Symbol Symbol::zbar_disk(double a, cplx c) {
  if (!(a > 0.0)) throw ConfigError("zbar_disk: radius must be positive");
  std::ostringstream name;
  name << "zbar_disk(" << a << "," << c.real();
  if (c.imag() != 0.0) name << (c.imag() > 0 ? "+" : "") << c.imag() << "i";
  name << ")";
  return mode_sum({{-1, [c](double r) { return c * r; }, 0.0, a, {a}}}, name.str());
}

Symbol Symbol::re_disk(double a) {
  if (!(a > 0.0)) throw ConfigError("re_disk: radius must be positive");
  return mode_sum({{1, [](double r) { return cplx(r); }, 0.0, a, {a}}, {-1, [](double r) { return cplx(r); }, 0.0, a, {a}}},
                  "re_disk(" + fmt(a) + ")");
}

Symbol Symbol::zbar_decay(double s) {
  if (!(s > 0.0)) throw ConfigError("zbar_decay: scale must be positive");
  return mode_sum({{-1, [s](double r) { return cplx(r * std::exp(-r * r / s)); }, 0.0,
                    std::numeric_limits<double>::infinity(), {}}},
                  "zbar_decay(" + fmt(s) + ")");
}

Symbol Symbol::sampled(SampledField field) {
  if (field.nx < 2 || field.ny < 2 || !(field.h > 0.0) ||
      field.values.size() != static_cast<std::size_t>(field.nx) * field.ny)
    throw ConfigError("sampled symbol: malformed grid");
  Symbol s;
  s.kind_ = SymbolKind::sampled;
  s.name_ = "sampled";
  auto g = std::make_shared<const SampledField>(std::move(field));
  s.eval_ = std::make_shared<const std::function<cplx(cplx)>>([g](cplx z) -> cplx {
    const double fx = (z.real() - g->x0) / g->h;
    const double fy = (z.imag() - g->y0) / g->h;
    if (fx < 0.0 || fy < 0.0 || fx > g->nx - 1 || fy > g->ny - 1) return 0.0;
    const int ix = std::min(static_cast<int>(fx), g->nx - 2);
    const int iy = std::min(static_cast<int>(fy), g->ny - 2);
    const double tx = fx - ix, ty = fy - iy;
    auto at = [&](int i, int j) { return g->values[static_cast<std::size_t>(j) * g->nx + i]; };
    return (1 - tx) * (1 - ty) * at(ix, iy) + tx * (1 - ty) * at(ix + 1, iy) + (1 - tx) * ty * at(ix, iy + 1) +
           tx * ty * at(ix + 1, iy + 1);
  });
  return s;
}

Symbol Symbol::custom(std::function<cplx(cplx)> fn, std::string name) {
  if (!fn) throw ConfigError("custom symbol: empty evaluator");
  Symbol s;
  s.kind_ = SymbolKind::custom;
  s.name_ = std::move(name);
  s.eval_ = std::make_shared<const std::function<cplx(cplx)>>(std::move(fn));
  return s;
}

cplx Symbol::operator()(cplx z) const { return (*eval_)(z); }

std::optional<std::vector<RadialMode>> Symbol::modes() const {
  if (!modes_) return std::nullopt;
  return *modes_;
}

bool Symbol::rotation_covariant() const {
  if (!modes_ || modes_->empty()) return modes_ != nullptr;
  if (kind_ == SymbolKind::fbeta) return false;  // the cut breaks the symmetry
  const int k = modes_->front().k;
  for (const RadialMode& m : *modes_)
    if (m.k != k) return false;
  return true;
}

std::optional<double> Symbol::cut_angle() const {
  if (kind_ != SymbolKind::fbeta) return std::nullopt;
  return cut_;
}

bool Symbol::holomorphic_on_disk(cplx z, double R) const { return holo_ && holo_(z, R); }

Symbol Symbol::conj() const {
  Symbol s = *this;
  s.conjugated_ = !conjugated_;
  s.name_ = name_.starts_with("conj(") && name_.ends_with(")") ? name_.substr(5, name_.size() - 6)
                                                               : "conj(" + name_ + ")";
  auto inner = eval_;
  s.eval_ = std::make_shared<const std::function<cplx(cplx)>>([inner](cplx z) { return std::conj((*inner)(z)); });
  if (modes_) {
    std::vector<RadialMode> flipped;
    for (const RadialMode& m : *modes_) {
      RadialMode c = m;
      c.k = -m.k;
      auto g = m.g;
      c.g = [g](double r) { return std::conj(g(r)); };
      flipped.push_back(std::move(c));
    }
    s.modes_ = std::make_shared<const std::vector<RadialMode>>(std::move(flipped));
  }
  // Conjugation keeps only the "identically zero" part of the holomorphy test.
  switch (kind_) {
    case SymbolKind::xia:
    case SymbolKind::fbeta:
      s.holo_ = [](cplx z, double R) { return std::abs(z) + R < 1.0; };
      break;
    case SymbolKind::mode_sum: {
      double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
      for (const RadialMode& m : *modes_) lo = std::min(lo, m.lo), hi = std::max(hi, m.hi);
      s.holo_ = [lo, hi](cplx z, double R) {
        const double az = std::abs(z);
        return az - R > hi || az + R < lo;
      };
      break;
    }
    default:
      s.holo_ = nullptr;
  }
  // A mode sum whose conjugate is again holomorphic is only the constant case.
  if (kind_ == SymbolKind::mode_sum && modes_) {
    bool constant = true;
    for (const RadialMode& m : *modes_) constant = constant && m.k == 0 && m.breaks.empty() && m.lo == 0.0;
    if (constant && name_.starts_with("polynomial")) s.holo_ = [](cplx, double) { return true; };
  }
  return s;
}

Symbol Symbol::scaled(cplx c) const {
  Symbol s = *this;
  auto inner = eval_;
  s.eval_ = std::make_shared<const std::function<cplx(cplx)>>([inner, c](cplx z) { return c * (*inner)(z); });
  if (modes_) {
    std::vector<RadialMode> scaled_modes;
    for (const RadialMode& m : *modes_) {
      RadialMode sm = m;
      auto g = m.g;
      sm.g = [g, c](double r) { return c * g(r); };
      scaled_modes.push_back(std::move(sm));
    }
    s.modes_ = std::make_shared<const std::vector<RadialMode>>(std::move(scaled_modes));
  }
  std::ostringstream os;
  os << c.real();
  if (c.imag() != 0.0) os << (c.imag() > 0 ? "+" : "") << c.imag() << "i";
  s.name_ = os.str() + "*" + name_;
  return s;
}

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t");
  if (a == std::string::npos) return "";
  return s.substr(a, s.find_last_not_of(" \t") - a + 1);
}

cplx parse_number(const std::string& text) {
  const std::string t = trim(text);
  if (t.empty()) throw ConfigError("symbol: empty number");
  std::size_t pos = 0;
  double re = 0.0, im = 0.0;
  try {
    if (t.back() == 'i') {
      // a+bi, a-bi or bi
      const std::string body = t.substr(0, t.size() - 1);
      std::size_t split = body.find_last_of("+-");
      while (split != std::string::npos && split > 0 && (body[split - 1] == 'e' || body[split - 1] == 'E'))
        split = body.find_last_of("+-", split - 1);
      if (split == std::string::npos || split == 0) {
        im = body.empty() || body == "+" ? 1.0 : body == "-" ? -1.0 : std::stod(body, &pos);
      } else {
        re = std::stod(body.substr(0, split));
        const std::string ip = body.substr(split);
        im = ip == "+" ? 1.0 : ip == "-" ? -1.0 : std::stod(ip);
      }
    } else {
      re = std::stod(t, &pos);
      if (pos != t.size()) throw ConfigError("symbol: bad number '" + t + "'");
    }
  } catch (const std::logic_error&) {
    throw ConfigError("symbol: bad number '" + t + "'");
  }
  return {re, im};
}

std::vector<std::string> split_args(const std::string& s) {
  std::vector<std::string> out;
  int depth = 0;
  std::string cur;
  for (char ch : s) {
    if (ch == '(') ++depth;
    if (ch == ')') --depth;
    if (ch == ',' && depth == 0) {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur += ch;
    }
  }
  if (!trim(cur).empty() || !out.empty()) out.push_back(trim(cur));
  return out;
}

}  // namespace

Symbol parse_symbol(const std::string& text) {
  const std::string t = trim(text);
  const auto open = t.find('(');
  const std::string head = trim(t.substr(0, open));
  std::vector<std::string> args;
  if (open != std::string::npos) {
    if (t.back() != ')') throw ConfigError("symbol: unbalanced parentheses in '" + t + "'");
    args = split_args(t.substr(open + 1, t.size() - open - 2));
  }
  auto real = [&](std::size_t i) {
    if (i >= args.size()) throw ConfigError("symbol: '" + head + "' is missing an argument");
    const cplx v = parse_number(args[i]);
    if (v.imag() != 0.0) throw ConfigError("symbol: '" + head + "' takes real arguments");
    return v.real();
  };
  if (head == "conj") {
    if (args.size() != 1) throw ConfigError("symbol: conj takes one symbol");
    return parse_symbol(args[0]).conj();
  }
  if (head == "xia" && args.empty()) return Symbol::xia();
  if (head == "zbar" && args.empty()) return Symbol::zbar();
  if (head == "fbeta") return args.size() > 1 ? Symbol::fbeta(real(0), real(1)) : Symbol::fbeta(real(0));
  if (head == "fbeta_surrogate") return Symbol::fbeta_surrogate(real(0));
  if (head == "zbar_disk") return Symbol::zbar_disk(real(0), args.size() > 1 ? parse_number(args[1]) : cplx(1.0));
  if (head == "re_disk") return Symbol::re_disk(real(0));
  if (head == "zbar_decay") return Symbol::zbar_decay(real(0));
  if (head == "polynomial" || head == "const") {
    std::vector<cplx> c;
    for (const auto& a : args) c.push_back(parse_number(a));
    if (c.empty()) throw ConfigError("symbol: polynomial needs coefficients");
    if (head == "const" && c.size() != 1) throw ConfigError("symbol: const takes one value");
    return Symbol::polynomial(std::move(c));
  }
  throw ConfigError("symbol: unknown symbol '" + t + "'");
}

}  // namespace dfock
