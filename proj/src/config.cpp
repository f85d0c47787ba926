#include "harnack/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <boost/math/special_functions/zeta.hpp>

#include "toml.hpp"

#include "harnack/errors.hpp"

namespace harnack {

std::string check_type_name(CheckType t) {
  switch (t) {
    case CheckType::ou_oracle:
      return "ou_oracle";
    case CheckType::harnack:
      return "harnack";
    case CheckType::log_harnack:
      return "log_harnack";
    case CheckType::gradient:
      return "gradient";
    case CheckType::yosida:
      return "yosida";
    case CheckType::galerkin:
      return "galerkin";
    case CheckType::strong_feller:
      return "strong_feller";
    case CheckType::hypercontractivity:
      return "hypercontractivity";
    case CheckType::generator:
      return "generator";
  }
  return "unknown";
}

std::vector<std::pair<std::string, std::string>> check_catalogue() {
  return {
      {"ou_oracle", "Monte Carlo P(t)phi(x) against the Gaussian closed form (zero drift, cosine observable)"},
      {"harnack", "power Harnack inequality over a (regime, p, t, |h|_C) grid"},
      {"log_harnack", "logarithmic Harnack inequality with the power-limit cross-check"},
      {"gradient", "|D_C P(t)phi|_C <= factor * P(t)|D_C phi|_C via finite differences in a Cameron-Martin frame"},
      {"yosida", "P_delta(t)phi(x) -> P(t)phi(x) as the Yosida parameter shrinks"},
      {"galerkin", "Cauchy gaps of P_n(t)phi(x) over increasing truncation dimensions"},
      {"strong_feller", "P(t)f(x+h) -> P(t)f(x) as |h|_C -> 0, with the quantitative envelope"},
      {"hypercontractivity", "|P(t)f|_L4 / |f|_L2 under the invariant law, with the exp-integrability bracket"},
      {"generator", "(P(dt)phi - phi)/dt against the generator as dt shrinks"},
  };
}

CheckType parse_check_type(const std::string& name) {
  for (auto t : {CheckType::ou_oracle, CheckType::harnack, CheckType::log_harnack, CheckType::gradient, CheckType::yosida,
                 CheckType::galerkin, CheckType::strong_feller, CheckType::hypercontractivity, CheckType::generator})
    if (check_type_name(t) == name) return t;
  throw ConfigError("unknown check type '" + name + "'");
}

Vec power_profile(std::size_t n, double s) {
  if (!(s > 0.5)) throw std::invalid_argument("power profile needs s > 1/2");
  const double norm = std::sqrt(boost::math::zeta(2.0 * s));
  Vec u(n);
  for (std::size_t k = 0; k < n; ++k) u[k] = std::pow(double(k + 1), -s) / norm;
  return u;
}

namespace {

class Section {
 public:
  Section(const toml::table& t, std::string where) : t_(t), where_(std::move(where)) {}

  const std::string& where() const { return where_; }
  bool has(const std::string& key) const { return t_.contains(key); }

  std::optional<double> number(const std::string& key) {
    const toml::node* n = take(key);
    if (!n) return std::nullopt;
    if (auto v = n->value<double>(); v && (n->is_integer() || n->is_floating_point())) return *v;
    fail(key, "must be a number");
  }
  double number(const std::string& key, double fallback) { return number(key).value_or(fallback); }

  std::optional<std::int64_t> integer(const std::string& key) {
    const toml::node* n = take(key);
    if (!n) return std::nullopt;
    if (!n->is_integer()) fail(key, "must be an integer");
    return *n->value<std::int64_t>();
  }
  std::size_t count(const std::string& key, std::size_t fallback) {
    const auto v = integer(key);
    if (!v) return fallback;
    if (*v < 0) fail(key, "must be non-negative");
    return std::size_t(*v);
  }

  std::optional<std::string> string(const std::string& key) {
    const toml::node* n = take(key);
    if (!n) return std::nullopt;
    if (!n->is_string()) fail(key, "must be a string");
    return *n->value<std::string>();
  }

  std::optional<bool> boolean(const std::string& key) {
    const toml::node* n = take(key);
    if (!n) return std::nullopt;
    if (!n->is_boolean()) fail(key, "must be a boolean");
    return *n->value<bool>();
  }

  // A number or an array of numbers.
  std::optional<Vec> numbers(const std::string& key) {
    const toml::node* n = take(key);
    if (!n) return std::nullopt;
    Vec out;
    if (const auto* arr = n->as_array()) {
      for (const auto& e : *arr) {
        if (!(e.is_integer() || e.is_floating_point())) fail(key, "must contain only numbers");
        out.push_back(*e.value<double>());
      }
    } else if (n->is_integer() || n->is_floating_point()) {
      out.push_back(*n->value<double>());
    } else {
      fail(key, "must be a number or an array of numbers");
    }
    return out;
  }

  std::optional<std::vector<std::string>> strings(const std::string& key) {
    const toml::node* n = take(key);
    if (!n) return std::nullopt;
    std::vector<std::string> out;
    if (const auto* arr = n->as_array()) {
      for (const auto& e : *arr) {
        if (!e.is_string()) fail(key, "must contain only strings");
        out.push_back(*e.value<std::string>());
      }
    } else if (n->is_string()) {
      out.push_back(*n->value<std::string>());
    } else {
      fail(key, "must be a string or an array of strings");
    }
    return out;
  }

  const toml::table* table(const std::string& key) {
    const toml::node* n = take(key);
    if (!n) return nullptr;
    if (!n->is_table()) fail(key, "must be a table");
    return n->as_table();
  }

  void finish() const {
    for (const auto& [k, v] : t_)
      if (!used_.count(std::string(k.str()))) throw ConfigError("unknown key '" + std::string(k.str()) + "' in " + where_);
  }

  [[noreturn]] void fail(const std::string& key, const std::string& what) const {
    throw ConfigError("key '" + key + "' in " + where_ + " " + what);
  }

 private:
  const toml::node* take(const std::string& key) {
    used_.insert(key);
    return t_.get(key);
  }

  const toml::table& t_;
  std::string where_;
  std::set<std::string> used_;
};

double positive(Section& s, const std::string& key, double v) {
  if (!(v > 0.0) || !std::isfinite(v)) s.fail(key, "must be positive");
  return v;
}

Vec mode_or_direction(Section& s, std::size_t n, const std::string& mode_key, const std::string& dir_key,
                      std::optional<std::size_t> fallback_mode) {
  const auto mode = s.integer(mode_key);
  const auto dir = s.numbers(dir_key);
  if (mode && dir) s.fail(mode_key, "conflicts with '" + dir_key + "'");
  try {
    if (dir) return resized(*dir, n);
  } catch (const std::invalid_argument&) {
    s.fail(dir_key, "reaches beyond the model dimension");
  }
  const std::int64_t m = mode ? *mode : (fallback_mode ? std::int64_t(*fallback_mode) : 0);
  if (m == 0 && !mode && !fallback_mode) return Vec(n, 0.0);
  if (m < 1 || std::size_t(m) > n) s.fail(mode_key, "must be a mode index in 1.." + std::to_string(n));
  return unit_vector(n, std::size_t(m - 1));
}

Vec broadcast(Section& s, const std::string& key, std::optional<Vec> v, std::size_t size, double fallback) {
  if (!v) return Vec(size, fallback);
  if (v->size() == 1) return Vec(size, v->front());
  if (v->size() != size) s.fail(key, "must have one entry per mode");
  return *v;
}

Observable parse_observable(const toml::table& t, const std::string& where, std::size_t n) {
  Section s(t, where);
  const auto kind = s.string("kind");
  if (!kind) throw ConfigError("missing key 'kind' in " + where);
  Observable out = Observable::constant(1.0);
  if (*kind == "constant") {
    out = Observable::constant(s.number("value", 1.0));
  } else {
    ObservableKind k;
    try {
      k = parse_observable_kind(*kind);
    } catch (const std::invalid_argument&) {
      s.fail("kind", "names an unknown observable '" + *kind + "'");
    }
    const double amplitude = s.number("amplitude", 1.0);
    const double offset = s.number("offset", 0.0);
    switch (k) {
      case ObservableKind::cosine:
        out = Observable::cosine(mode_or_direction(s, n, "mode", "direction", 1), s.number("omega", 1.0),
                                 s.number("phase", 0.0), amplitude, offset);
        break;
      case ObservableKind::tanh:
        out = Observable::tanh(mode_or_direction(s, n, "mode", "direction", 1), s.number("omega", 1.0),
                               s.number("center", 0.0), amplitude, offset);
        break;
      case ObservableKind::floor_shifted:
        out = Observable::floor_shifted(mode_or_direction(s, n, "mode", "direction", 1), s.number("omega", 1.0),
                                        s.number("phase", 0.0), amplitude, offset, s.number("floor", 1e-3));
        break;
      case ObservableKind::linear:
        out = Observable::linear(mode_or_direction(s, n, "mode", "direction", 1), s.number("scale", amplitude), offset);
        break;
      case ObservableKind::quadratic:
        out = Observable::quadratic(mode_or_direction(s, n, "mode", "direction", 1), s.number("scale", amplitude), offset);
        break;
      case ObservableKind::sign:
        out = Observable::sign(mode_or_direction(s, n, "mode", "direction", 1), s.number("center", 0.0), amplitude,
                               offset);
        break;
      case ObservableKind::product_sigmoid: {
        const auto modes = s.numbers("modes");
        if (!modes || modes->empty()) s.fail("modes", "is required for product_sigmoid");
        std::vector<Vec> dirs;
        for (double m : *modes) {
          if (m != std::floor(m) || m < 1 || m > double(n)) s.fail("modes", "must hold mode indices in 1.." + std::to_string(n));
          dirs.push_back(unit_vector(n, std::size_t(m) - 1));
        }
        const Vec omegas = broadcast(s, "omega", s.numbers("omega"), dirs.size(), 1.0);
        const Vec centers = broadcast(s, "center", s.numbers("center"), dirs.size(), 0.0);
        out = Observable::product_sigmoid(std::move(dirs), omegas, centers, amplitude, offset);
        break;
      }
    }
  }
  s.finish();
  return out;
}

OperatorPair parse_model(Section& s) {
  const std::string spectrum = s.string("spectrum").value_or("dirichlet");
  const double alpha = s.number("alpha", 0.5);
  const double beta = s.number("beta", 1.0);
  try {
    if (spectrum == "dirichlet") {
      const std::size_t n = s.count("n", 16);
      if (n == 0) s.fail("n", "must be positive");
      return build_pair(dirichlet_spectrum(n), alpha, beta);
    }
    if (spectrum == "explicit") {
      const auto ev = s.numbers("eigenvalues");
      if (!ev) s.fail("eigenvalues", "is required for an explicit spectrum");
      if (s.has("n")) {
        const std::size_t n = s.count("n", 0);
        if (n != ev->size()) s.fail("n", "disagrees with the number of eigenvalues");
      }
      return build_pair(Spectrum(*ev), alpha, beta);
    }
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("invalid model: ") + e.what());
  }
  s.fail("spectrum", "must be 'dirichlet' or 'explicit'");
}

Drift parse_drift(Section& s, const OperatorPair& pair) {
  const std::string kind = s.string("kind").value_or("zero");
  auto required = [&](const std::string& key) {
    const auto v = s.number(key);
    if (!v) s.fail(key, "is required for drift kind '" + kind + "'");
    return *v;
  };
  Drift d = Drift::zero();
  try {
    if (kind == "zero") {
      d = Drift::zero();
    } else if (kind == "linear") {
      d = Drift::linear(required("zeta_F"));
    } else if (kind == "composed") {
      d = Drift::composed(pair, required("L_G"));
    } else if (kind == "cubic") {
      const double kappa = required("kappa");
      const double zeta = s.number("zeta_F", 0.0);
      const auto u = s.numbers("u");
      const auto profile = s.number("u_profile");
      if (u && profile) s.fail("u", "conflicts with 'u_profile'");
      d = Drift::cubic_kernel(u ? resized(*u, pair.dim()) : power_profile(pair.dim(), profile.value_or(1.0)), kappa, zeta);
    } else if (kind == "reaction_diffusion") {
      const std::string phi = s.string("phi").value_or("cubic");
      d = Drift::reaction_diffusion(parse_phi(phi), required("zeta_F"), pair.dim(), s.count("grid", 0));
    } else {
      s.fail("kind", "names an unknown drift '" + kind + "'");
    }
    if (const auto delta = s.number("yosida_delta")) d = Drift::yosida_wrapped(d, *delta);
  } catch (const std::invalid_argument& e) {
    throw ConfigError("invalid drift: " + std::string(e.what()));
  }
  return d;
}

CheckConfig parse_check(const std::string& name, const toml::table& t, const RunConfig& run) {
  const std::string where = "[checks." + name + "]";
  Section s(t, where);
  const std::size_t n = run.pair.dim();
  CheckConfig c;
  c.name = name;
  const auto type = s.string("type");
  if (!type) throw ConfigError("missing key 'type' in " + where);
  c.type = parse_check_type(*type);

  c.M = s.count("M", c.M);
  if (c.M < 100) s.fail("M", "must be at least 100");
  if (const auto seed = s.integer("seed")) c.seed = std::uint64_t(*seed);
  c.z = positive(s, "z", s.number("z", c.z));

  // Initial condition: explicit vector or a scaled basis vector; zero by default.
  {
    const auto x = s.numbers("x");
    const auto mode = s.integer("x_mode");
    const double scale = s.number("x_scale", 1.0);
    if (x && mode) s.fail("x", "conflicts with 'x_mode'");
    try {
      c.x = x ? resized(*x, n) : Vec(n, 0.0);
    } catch (const std::invalid_argument&) {
      s.fail("x", "reaches beyond the model dimension");
    }
    if (mode) {
      if (*mode < 1 || std::size_t(*mode) > n) s.fail("x_mode", "must be a mode index in 1.." + std::to_string(n));
      c.x = scaled(unit_vector(n, std::size_t(*mode - 1)), scale);
    }
  }
  if (const toml::table* obs = s.table("observable")) {
    try {
      c.observable = parse_observable(*obs, "[checks." + name + ".observable]", n);
    } catch (const std::invalid_argument& e) {
      throw ConfigError("invalid observable in " + where + ": " + e.what());
    }
    if (c.observable.support() > n) s.fail("observable", "reaches beyond the model dimension");
  }

  auto regimes = [&] {
    if (const auto r = s.strings("regime")) {
      c.regimes.clear();
      for (const auto& name : *r) {
        try {
          c.regimes.push_back(parse_regime(name));
        } catch (const std::invalid_argument&) {
          s.fail("regime", "names an unknown regime '" + name + "'");
        }
      }
      if (c.regimes.empty()) s.fail("regime", "must not be empty");
    }
  };
  auto times = [&](const std::string& key, bool single) {
    if (auto v = s.numbers(key)) {
      if (v->empty()) s.fail(key, "must not be empty");
      if (single && v->size() != 1) s.fail(key, "must be a single number");
      for (double x : *v) positive(s, key, x);
      c.ts = *v;
    }
  };
  auto shift = [&](bool list) {
    if (auto v = s.numbers("h_norm")) {
      if (v->empty()) s.fail("h_norm", "must not be empty");
      if (!list && v->size() != 1) s.fail("h_norm", "must be a single number");
      for (double x : *v)
        if (!(x >= 0.0)) s.fail("h_norm", "must be non-negative");
      c.h_norms = *v;
    }
    Vec dir = mode_or_direction(s, n, "h_mode", "h", 1);
    const double dn = cm_norm(run.pair, dir);
    if (dn == 0.0) s.fail("h", "must be non-zero");
    c.h_direction = scaled(dir, 1.0 / dn);
  };
  auto signs = [&] {
    c.exponent_scale = positive(s, "exponent_scale", s.number("exponent_scale", 1.0));
    c.proof_sign = s.boolean("proof_sign");
  };

  switch (c.type) {
    case CheckType::ou_oracle:
      times("t", false);
      if (!run.drift.is_zero()) throw ConfigError(where + " needs the zero drift");
      if (c.observable.kind() != ObservableKind::cosine || c.observable.ridges().empty())
        throw ConfigError(where + " needs a cosine observable");
      break;
    case CheckType::harnack:
      regimes();
      times("t", false);
      shift(true);
      signs();
      if (auto p = s.numbers("p")) {
        for (double v : *p)
          if (!(v > 1.0)) s.fail("p", "must exceed 1");
        c.ps = *p;
      }
      break;
    case CheckType::log_harnack:
      regimes();
      times("t", false);
      shift(true);
      signs();
      c.limit_p = s.number("limit_p", c.limit_p);
      if (!(c.limit_p > 1.0)) s.fail("limit_p", "must exceed 1");
      break;
    case CheckType::gradient:
      regimes();
      times("t", false);
      signs();
      c.fd_step = positive(s, "fd_step", s.number("fd_step", c.fd_step));
      break;
    case CheckType::yosida: {
      times("t", true);
      const auto d = s.numbers("deltas");
      if (!d || d->empty()) s.fail("deltas", "is required");
      for (std::size_t i = 0; i < d->size(); ++i) {
        positive(s, "deltas", (*d)[i]);
        if (i > 0 && !((*d)[i] < (*d)[i - 1])) s.fail("deltas", "must be decreasing");
      }
      c.deltas = *d;
      break;
    }
    case CheckType::galerkin: {
      times("t", true);
      const auto d = s.numbers("dims");
      if (!d || d->empty()) s.fail("dims", "is required");
      for (std::size_t i = 0; i < d->size(); ++i) {
        const double v = (*d)[i];
        if (v != std::floor(v) || v < 1 || v > double(n)) s.fail("dims", "must hold dimensions in 1.." + std::to_string(n));
        if (i > 0 && v < (*d)[i - 1]) s.fail("dims", "must be non-decreasing");
        c.dims.push_back(std::size_t(v));
      }
      break;
    }
    case CheckType::strong_feller:
      regimes();
      if (c.regimes.size() != 1) s.fail("regime", "must name a single regime");
      times("t", true);
      shift(true);
      signs();
      for (std::size_t i = 1; i < c.h_norms.size(); ++i)
        if (!(c.h_norms[i] < c.h_norms[i - 1] || c.h_norms[i] == 0.0)) s.fail("h_norm", "must decrease");
      break;
    case CheckType::hypercontractivity: {
      const auto g = s.numbers("t_grid");
      if (!g || g->empty()) s.fail("t_grid", "is required");
      for (std::size_t i = 0; i < g->size(); ++i) {
        if (!((*g)[i] >= 0.0)) s.fail("t_grid", "must be non-negative");
        if (i > 0 && !((*g)[i] > (*g)[i - 1])) s.fail("t_grid", "must increase");
      }
      c.t_grid = *g;
      c.outer = s.count("outer", c.outer);
      c.inner = s.count("inner", c.inner);
      if (c.outer < 2 || c.inner < 1) s.fail("outer", "and 'inner' must be at least 2 and 1");
      c.burn_in = s.number("burn_in", c.burn_in);
      c.bracket_pairs = s.count("bracket_pairs", 0);
      if (c.bracket_pairs != 0 && c.bracket_pairs < 256) s.fail("bracket_pairs", "must be 0 or at least 256");
      if (const auto fam = s.string("family"); fam && *fam != "hermite") s.fail("family", "must be 'hermite'");
      break;
    }
    case CheckType::generator: {
      const auto d = s.numbers("dts");
      if (!d || d->empty()) s.fail("dts", "is required");
      for (std::size_t i = 0; i < d->size(); ++i) {
        positive(s, "dts", (*d)[i]);
        if (i > 0 && !((*d)[i] < (*d)[i - 1])) s.fail("dts", "must be decreasing");
      }
      c.dts = *d;
      c.m_scale = positive(s, "m_scale", s.number("m_scale", c.m_scale));
      break;
    }
  }
  s.finish();
  return c;
}

}  // namespace

RunConfig parse_config(const std::string& text, const std::string& source) {
  toml::table root;
  try {
    root = toml::parse(text, source);
  } catch (const toml::parse_error& e) {
    std::ostringstream os;
    os << source << ":" << e.source().begin.line << ": " << e.description();
    throw ConfigError(os.str());
  }
  Section top(root, "the top level");
  RunConfig cfg;
  if (const toml::table* run = top.table("run")) {
    Section s(*run, "[run]");
    cfg.name = s.string("name").value_or(cfg.name);
    if (const auto seed = s.integer("seed")) cfg.seed = std::uint64_t(*seed);
    if (const auto th = s.integer("threads")) {
      if (*th < 0) s.fail("threads", "must be non-negative");
      cfg.threads = int(*th);
    }
    cfg.dt = positive(s, "dt", s.number("dt", cfg.dt));
    if (const auto sc = s.string("scheme")) {
      try {
        cfg.scheme = parse_scheme(*sc);
      } catch (const std::invalid_argument&) {
        s.fail("scheme", "names an unknown scheme '" + *sc + "'");
      }
    }
    s.finish();
  }
  if (const toml::table* model = top.table("model")) {
    Section s(*model, "[model]");
    cfg.pair = parse_model(s);
    s.finish();
  }
  if (const toml::table* drift = top.table("drift")) {
    Section s(*drift, "[drift]");
    cfg.drift = parse_drift(s, cfg.pair);
    s.finish();
  }
  if (const toml::table* checks = top.table("checks")) {
    for (const auto& [k, v] : *checks) {
      const std::string name(k.str());
      if (!v.is_table()) throw ConfigError("[checks." + name + "] must be a table");
      cfg.checks.push_back(parse_check(name, *v.as_table(), cfg));
    }
  }
  top.finish();
  std::sort(cfg.checks.begin(), cfg.checks.end(), [](const auto& a, const auto& b) { return a.name < b.name; });
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path);
}

}  // namespace harnack
