#include "harnack/checks.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "harnack/errors.hpp"
#include "harnack/rng.hpp"

namespace harnack {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

nlohmann::json finite_or_null(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); }

// Treats 0 * inf as 0 so an infinite factor never turns a vanishing side into NaN.
double mul0(double a, double b) { return (a == 0.0 || b == 0.0) ? 0.0 : a * b; }

double std_error_of(std::span<const double> d) {
  if (d.size() < 2) return 0.0;
  return std::sqrt(sample_variance(d) / double(d.size()));
}

Vec sorted_unique(Vec ts) {
  std::sort(ts.begin(), ts.end());
  ts.erase(std::unique(ts.begin(), ts.end()), ts.end());
  return ts;
}

std::size_t index_in(const Vec& sorted, double t) {
  const auto it = std::lower_bound(sorted.begin(), sorted.end(), t);
  if (it == sorted.end() || *it != t) throw std::logic_error("time missing from the recorded set");
  return std::size_t(it - sorted.begin());
}

using Values = std::vector<std::vector<Vec>>;

void annotate_closed_form(HarnackReport& r, const CheckSpec& spec);

// values[start][slot][path] of f at the recorded endpoints.
Values sample_values(const SemigroupSetup& setup, std::span<const Vec> xs, const Vec& ts, std::size_t M,
                     std::uint64_t seed, const std::function<double(std::span<const double>)>& f) {
  Values v(xs.size(), std::vector<Vec>(ts.size(), Vec(M)));
  for_each_endpoint(setup, xs, ts, M, seed,
                    [&](std::size_t s, std::size_t slot, std::size_t p, std::span<const double> st) { v[s][slot][p] = f(st); });
  return v;
}

void validate_common(const CheckSpec& spec) {
  const std::size_t n = spec.setup.pair.dim();
  if (spec.x.size() != n) throw std::invalid_argument("x must have the model dimension");
  if (!spec.h.empty() && spec.h.size() != n) throw std::invalid_argument("h must have the model dimension");
  if (!(spec.t > 0.0)) throw std::invalid_argument("t must be positive");
  if (spec.M < 100) throw std::invalid_argument("M must be at least 100");
  if (!(spec.z > 0.0)) throw std::invalid_argument("z must be positive");
  if (auto d = spec.setup.drift.dim(); d && *d != n) throw std::invalid_argument("drift dimension does not match the model");
}

nlohmann::json constants_json(const ModelConstants& c) {
  return {{"gamma", finite_or_null(c.gamma)},  {"K", finite_or_null(c.K)},
          {"K1", finite_or_null(c.K1)},        {"zeta_A", c.zeta_A},
          {"zeta_F", c.zeta_F},                {"zeta_X", c.zeta_X},
          {"zeta_X_lipschitz", c.zeta_X_lipschitz}, {"L_F", finite_or_null(c.L_F)},
          {"L_G", c.L_G},                      {"M", c.M},
          {"m", c.m},                          {"delta", c.delta}};
}

nlohmann::json base_details(const CheckSpec& spec) {
  return {{"model", spec.setup.pair.id()},
          {"model_hash", spec.setup.pair.hash()},
          {"drift", spec.setup.drift.id()},
          {"scheme", scheme_name(spec.setup.scheme)},
          {"dt", spec.setup.dt},
          {"observable", spec.observable.id()},
          {"M", spec.M},
          {"seed", spec.seed},
          {"z", spec.z},
          {"t", spec.t}};
}

HarnackReport power_report(const CheckSpec& spec, const ModelConstants& consts, std::span<const double> at_shift,
                           std::span<const double> at_x) {
  const std::size_t M = at_x.size();
  const double p = spec.p;
  const double t = spec.t;
  const double hn = spec.h.empty() ? 0.0 : cm_norm(spec.setup.pair, spec.h);
  const double coef = harnack_coefficient(spec, consts, t);
  const double exponent = spec.exponent_scale * p * coef * hn * hn / (t * (p - 1.0));

  HarnackReport r;
  r.id = spec.check_id + "[" + regime_name(spec.regime) + ",p=" + fmt(p) + ",t=" + fmt(t) + ",h=" + fmt(hn) + "]";
  r.form = BoundForm::multiplicative;
  r.factor = std::exp(exponent);

  const Estimate L = estimate_from_samples(at_shift, spec.seed);
  Vec R(M);
  for (std::size_t i = 0; i < M; ++i) R[i] = std::pow(std::abs(at_x[i]), p);
  r.rhs = estimate_from_samples(R, spec.seed);
  const double absL = std::abs(L.mean);
  r.lhs.mean = std::pow(absL, p);
  r.lhs.std_error = p * std::pow(absL, p - 1.0) * L.std_error;
  r.lhs.M = M;
  r.lhs.seed = spec.seed;
  r.margin = mul0(r.rhs.mean, r.factor) - r.lhs.mean;

  const double slope = p * std::pow(absL, p - 1.0) * (L.mean < 0.0 ? -1.0 : 1.0);
  Vec d(M);
  for (std::size_t i = 0; i < M; ++i) d[i] = mul0(r.factor, R[i]) - slope * at_shift[i];
  r.ci_margin = std_error_of(d);
  r.verdict = classify(r.margin, r.ci_margin, spec.z);

  r.details = base_details(spec);
  r.details["regime"] = regime_name(spec.regime);
  r.details["p"] = p;
  r.details["h_norm"] = hn;
  r.details["coefficient"] = coef;
  r.details["exponent"] = exponent;
  r.details["exponent_scale"] = spec.exponent_scale;
  r.details["P_phi_at_x_plus_h"] = {{"mean", L.mean}, {"stderr", L.std_error}};
  r.details["constants"] = constants_json(consts);
  if (spec.regime == Regime::dissipative) r.details["sign"] = spec.proof_sign ? "proof" : "statement";
  annotate_closed_form(r, spec);
  return r;
}

bool within(double est, double exact, double se, double z) {
  return std::abs(est - exact) <= z * se + 1e-12 * (1.0 + std::abs(exact));
}

// Zero drift with a pure cosine observable: both sides have Gaussian closed forms for p in {2, 4}.
void annotate_closed_form(HarnackReport& r, const CheckSpec& spec) {
  const Observable& obs = spec.observable;
  if (!spec.setup.drift.is_zero() || obs.kind() != ObservableKind::cosine || obs.ridges().size() != 1 ||
      obs.offset() != 0.0)
    return;
  const int p = int(spec.p);
  if (double(p) != spec.p || (p != 2 && p != 4)) return;
  const auto& pair = spec.setup.pair;
  const Ridge& rd = obs.ridges().front();
  const Vec d = resized(rd.direction, pair.dim());
  const Vec xh = spec.h.empty() ? spec.x : add(spec.x, spec.h);
  const double amp = std::abs(obs.amplitude());
  const double lhs = std::pow(amp * std::abs(ou_cosine_moment(pair, xh, d, rd.omega, rd.theta, spec.t, 1)), p);
  const double rhs = std::pow(amp, p) * ou_cosine_moment(pair, spec.x, d, rd.omega, rd.theta, spec.t, p);
  r.details["closed_form"] = {{"lhs", lhs},
                              {"rhs", rhs},
                              {"margin", mul0(rhs, r.factor) - lhs},
                              {"lhs_within", within(r.lhs.mean, lhs, r.lhs.std_error, spec.z)},
                              {"rhs_within", within(r.rhs.mean, rhs, r.rhs.std_error, spec.z)}};
}

Vec ridge_shift(std::span<const double> x, std::span<const double> dir, double s) {
  Vec y(x.begin(), x.end());
  for (std::size_t k = 0; k < y.size(); ++k) y[k] += s * dir[k];
  return y;
}

}  // namespace

std::string verdict_name(Verdict v) {
  switch (v) {
    case Verdict::pass:
      return "PASS";
    case Verdict::fail:
      return "FAIL";
    case Verdict::inconclusive:
      return "INCONCLUSIVE";
  }
  return "INCONCLUSIVE";
}

std::string regime_name(Regime r) { return r == Regime::lipschitz ? "lipschitz" : "dissipative"; }

Regime parse_regime(const std::string& name) {
  if (name == "lipschitz") return Regime::lipschitz;
  if (name == "dissipative") return Regime::dissipative;
  throw std::invalid_argument("unknown regime '" + name + "'");
}

std::string form_name(BoundForm f) {
  switch (f) {
    case BoundForm::multiplicative:
      return "multiplicative";
    case BoundForm::additive:
      return "additive";
    case BoundForm::convergence:
      return "convergence";
  }
  return "multiplicative";
}

Verdict classify(double margin, double ci, double z) {
  if (std::isnan(margin) || std::isnan(ci)) return Verdict::inconclusive;
  if (ci == 0.0) return margin >= 0.0 ? Verdict::pass : Verdict::fail;
  if (margin > z * ci) return Verdict::pass;
  if (margin < -z * ci) return Verdict::fail;
  return Verdict::inconclusive;
}

nlohmann::json report_to_json(const HarnackReport& r) {
  auto est = [](const Estimate& e) {
    return nlohmann::json{{"mean", finite_or_null(e.mean)}, {"stderr", finite_or_null(e.std_error)}, {"M", e.M},
                          {"seed", e.seed}};
  };
  nlohmann::json j{{"id", r.id},
                   {"lhs", est(r.lhs)},
                   {"rhs", est(r.rhs)},
                   {"factor", finite_or_null(r.factor)},
                   {"margin", finite_or_null(r.margin)},
                   {"ci_margin", finite_or_null(r.ci_margin)},
                   {"verdict", verdict_name(r.verdict)},
                   {"form", form_name(r.form)},
                   {"details", r.details}};
  if (!r.plots.empty()) {
    nlohmann::json plots = nlohmann::json::array();
    for (const auto& p : r.plots) plots.push_back({{"name", p.name}, {"columns", p.columns}, {"rows", p.rows.size()}});
    j["plots"] = plots;
  }
  return j;
}

ModelConstants derive_constants(const OperatorPair& pair, const Drift& drift) {
  ModelConstants c;
  c.zeta_A = pair.zeta_A();
  c.zeta_F = drift.zeta_F();
  c.zeta_X = c.zeta_A + c.zeta_F;
  c.zeta_X_lipschitz = pair.a1() - c.zeta_F;
  c.L_F = drift.lipschitz_constant().value_or(kNaN);
  c.L_G = drift.L_G();
  const GrowthBound g = drift.growth();
  c.M = g.M;
  c.m = g.m;
  c.delta = drift.kind() == DriftKind::yosida ? drift.delta() : 0.0;
  c.eta = c.zeta_X_lipschitz;
  try {
    const SmoothingConstants s = smoothing_constants(pair);
    c.gamma = s.gamma;
    c.K = s.K;
  } catch (const std::exception&) {
    c.gamma = kNaN;
    c.K = kNaN;
  }
  c.K1 = kNaN;
  if (c.zeta_X_lipschitz > 0.0) {
    if (drift.kind() == DriftKind::composed) {
      c.K1 = harnack_K1(K1Case::composed, c, pair);
    } else if (c.L_F == 0.0) {
      c.K1 = 1.0;
    } else if (std::isfinite(c.L_F) && c.gamma < 1.0) {
      c.K1 = harnack_K1(K1Case::smoothing, c, pair);
    }
  }
  return c;
}

void require_regime(const CheckSpec& spec) {
  const auto& pair = spec.setup.pair;
  const auto& drift = spec.setup.drift;
  if (spec.regime == Regime::lipschitz) {
    const ModelConstants c = derive_constants(pair, drift);
    if (!(c.zeta_X_lipschitz > 0.0))
      throw UnsupportedRegime("regime lipschitz needs a positive decay rate a_1 - zeta_F, got " +
                              std::to_string(c.zeta_X_lipschitz));
    if (!std::isfinite(c.K1))
      throw UnsupportedRegime("regime lipschitz has no K1 formula for drift " + drift.id());
    return;
  }
  const auto rep = check_dissipativity(drift, drift.zeta_F(),
                                       uniform_box_pairs(pair.dim(), 4.0, derive_seed(spec.seed, "dissipativity")), 2000);
  if (!rep.passed)
    throw std::runtime_error("dissipativity pre-check failed for " + drift.id() + ": " +
                             std::to_string(rep.failures) + " of " + std::to_string(rep.trials) +
                             " pairs violate zeta_F, worst excess " + std::to_string(rep.max_violation));
}

double harnack_coefficient(const CheckSpec& spec, const ModelConstants& consts, double t) {
  if (spec.regime == Regime::lipschitz) {
    if (!std::isfinite(consts.K1)) throw UnsupportedRegime("K1 is not available for this drift");
    return consts.K1 * consts.K1;
  }
  return std::exp((spec.proof_sign ? -2.0 : 2.0) * t * consts.zeta_X);
}

std::vector<HarnackReport> harnack_sweep(const CheckSpec& base, const HarnackGrid& grid) {
  validate_common(base);
  if (!base.observable.bounded()) throw std::invalid_argument("Harnack checks need a bounded observable");
  if (grid.ps.empty() || grid.ts.empty() || grid.hs.empty() || grid.regimes.empty())
    throw std::invalid_argument("Harnack grid has an empty axis");
  for (double p : grid.ps)
    if (!(p > 1.0)) throw std::invalid_argument("Harnack exponent p must exceed 1");
  for (double t : grid.ts)
    if (!(t > 0.0)) throw std::invalid_argument("Harnack times must be positive");
  for (const Vec& h : grid.hs)
    if (h.size() != base.x.size()) throw std::invalid_argument("h must have the model dimension");
  for (Regime r : grid.regimes) {
    CheckSpec s = base;
    s.regime = r;
    require_regime(s);
  }
  const ModelConstants consts = derive_constants(base.setup.pair, base.setup.drift);
  const Vec ts = sorted_unique(grid.ts);
  std::vector<Vec> xs{base.x};
  for (const Vec& h : grid.hs) xs.push_back(add(base.x, h));
  const Values v = sample_values(base.setup, xs, ts, base.M, base.seed, [&](std::span<const double> s) { return base.observable(s); });

  std::vector<HarnackReport> out;
  for (Regime r : grid.regimes)
    for (double p : grid.ps)
      for (double t : grid.ts)
        for (std::size_t hi = 0; hi < grid.hs.size(); ++hi) {
          CheckSpec s = base;
          s.regime = r;
          s.p = p;
          s.t = t;
          s.h = grid.hs[hi];
          const std::size_t slot = index_in(ts, t);
          out.push_back(power_report(s, consts, v[hi + 1][slot], v[0][slot]));
        }
  return out;
}

HarnackReport check_harnack(const CheckSpec& spec) {
  HarnackGrid g{{spec.p}, {spec.t}, {spec.h.empty() ? Vec(spec.x.size(), 0.0) : spec.h}, {spec.regime}};
  HarnackReport r = harnack_sweep(spec, g).front();
  r.id = spec.check_id;
  return r;
}

HarnackReport check_harnack_lipschitz(const CheckSpec& spec) {
  CheckSpec s = spec;
  s.regime = Regime::lipschitz;
  return check_harnack(s);
}

HarnackReport check_harnack_dissipative(const CheckSpec& spec) {
  CheckSpec s = spec;
  s.regime = Regime::dissipative;
  return check_harnack(s);
}

HarnackReport check_log_harnack(const CheckSpec& spec, double limit_p) {
  validate_common(spec);
  const Observable& f = spec.observable;
  if (!f.bounded() || !f.positive()) throw std::invalid_argument("log-Harnack needs a bounded observable with positive infimum");
  if (!(limit_p > 1.0)) throw std::invalid_argument("power-limit exponent must exceed 1");
  require_regime(spec);
  const ModelConstants consts = derive_constants(spec.setup.pair, spec.setup.drift);
  const Vec h = spec.h.empty() ? Vec(spec.x.size(), 0.0) : spec.h;
  const double hn = cm_norm(spec.setup.pair, h);
  const std::vector<Vec> xs{spec.x, add(spec.x, h)};
  const Vec ts{spec.t};
  const Values v = sample_values(spec.setup, xs, ts, spec.M, spec.seed, [&](std::span<const double> s) { return f(s); });
  const Vec& F = v[0][0];
  const std::size_t M = F.size();
  Vec Y(M);
  for (std::size_t i = 0; i < M; ++i) Y[i] = std::log(v[1][0][i]);

  HarnackReport r;
  r.id = spec.check_id;
  r.form = BoundForm::additive;
  const double coef = harnack_coefficient(spec, consts, spec.t);
  r.factor = spec.exponent_scale * coef * hn * hn / spec.t;
  r.lhs = estimate_from_samples(Y, spec.seed);
  const Estimate Fe = estimate_from_samples(F, spec.seed);
  r.rhs.mean = std::log(Fe.mean);
  r.rhs.std_error = Fe.std_error / Fe.mean;
  r.rhs.M = M;
  r.rhs.seed = spec.seed;
  r.margin = r.rhs.mean + r.factor - r.lhs.mean;
  Vec d(M);
  for (std::size_t i = 0; i < M; ++i) d[i] = F[i] / Fe.mean - Y[i];
  r.ci_margin = std_error_of(d);
  r.verdict = classify(r.margin, r.ci_margin, spec.z);

  // Power bound applied to f^{1/p}, in logarithmic form: p ln P f^{1/p}(x+h) <= ln P f(x) + p/(p-1) c |h|^2 / t.
  Vec root(M);
  for (std::size_t i = 0; i < M; ++i) root[i] = std::exp(Y[i] / limit_p);
  const double power_lhs = limit_p * std::log(sample_mean(root));
  const double power_rhs = r.rhs.mean + limit_p / (limit_p - 1.0) * r.factor;
  const double gap = power_lhs - r.lhs.mean;
  const double var_y = sample_variance(Y);
  const double slack = 1e-12 * (1.0 + std::abs(r.lhs.mean));
  const bool consistent = gap >= -slack && gap <= var_y / limit_p + slack;

  r.details = base_details(spec);
  r.details["regime"] = regime_name(spec.regime);
  r.details["h_norm"] = hn;
  r.details["coefficient"] = coef;
  r.details["exponent_scale"] = spec.exponent_scale;
  r.details["constants"] = constants_json(consts);
  if (spec.regime == Regime::dissipative) r.details["sign"] = spec.proof_sign ? "proof" : "statement";
  r.details["power_limit"] = {{"p", limit_p},
                              {"lhs", power_lhs},
                              {"rhs", power_rhs},
                              {"margin", power_rhs - power_lhs},
                              {"gap_to_log_lhs", gap},
                              {"variance_ln_f", var_y},
                              {"consistent", consistent}};
  return r;
}

HarnackReport check_gradient_estimate(const CheckSpec& spec, double fd_step) {
  validate_common(spec);
  if (!(fd_step > 0.0)) throw std::invalid_argument("finite-difference step must be positive");
  if (!spec.observable.bounded()) throw std::invalid_argument("gradient check needs a bounded observable");
  require_regime(spec);
  const auto& pair = spec.setup.pair;
  const std::size_t n = pair.dim();
  const ModelConstants consts = derive_constants(pair, spec.setup.drift);

  std::vector<Vec> xs{spec.x};
  for (std::size_t k = 0; k < n; ++k) {
    const Vec fk = cm_unit_vector(pair, k);
    xs.push_back(ridge_shift(spec.x, fk, fd_step));
    xs.push_back(ridge_shift(spec.x, fk, -fd_step));
    xs.push_back(ridge_shift(spec.x, fk, 0.5 * fd_step));
    xs.push_back(ridge_shift(spec.x, fk, -0.5 * fd_step));
  }
  const Vec ts{spec.t};
  const std::size_t M = spec.M;
  Values v(xs.size(), std::vector<Vec>(1, Vec(M)));
  Vec g(M);
  for_each_endpoint(spec.setup, xs, ts, M, spec.seed,
                    [&](std::size_t s, std::size_t, std::size_t p, std::span<const double> st) {
                      v[s][0][p] = spec.observable(st);
                      if (s == 0) g[p] = spec.observable.cm_gradient_norm(pair, st);
                    });

  auto assemble = [&](double step, std::size_t off, Vec& per_path) {
    std::vector<Vec> D(n, Vec(M));
    Vec mean(n);
    for (std::size_t k = 0; k < n; ++k) {
      const Vec& plus = v[1 + 4 * k + off][0];
      const Vec& minus = v[2 + 4 * k + off][0];
      for (std::size_t i = 0; i < M; ++i) D[k][i] = (plus[i] - minus[i]) / (2.0 * step);
      mean[k] = sample_mean(D[k]);
    }
    const double len = norm(mean);
    per_path.assign(M, 0.0);
    if (len > 0.0)
      for (std::size_t i = 0; i < M; ++i) {
        double s = 0.0;
        for (std::size_t k = 0; k < n; ++k) s += mean[k] / len * D[k][i];
        per_path[i] = s;
      }
    return std::pair{len, mean};
  };
  Vec ell, ell_half;
  const auto [lhs, grad] = assemble(fd_step, 0, ell);
  const auto [lhs_half, grad_half] = assemble(0.5 * fd_step, 2, ell_half);

  HarnackReport r;
  r.id = spec.check_id;
  r.form = BoundForm::multiplicative;
  r.lhs.mean = lhs;
  r.lhs.std_error = std_error_of(ell);
  r.lhs.M = M;
  r.lhs.seed = spec.seed;
  r.rhs = estimate_from_samples(g, spec.seed);

  auto factor_for = [&](bool proof) {
    if (spec.regime == Regime::lipschitz) return consts.K1;
    return std::exp(spec.exponent_scale * (proof ? -1.0 : 1.0) * spec.t * consts.zeta_X);
  };
  auto judge = [&](double factor, double& margin, double& ci) {
    margin = mul0(r.rhs.mean, factor) - lhs;
    Vec d(M);
    for (std::size_t i = 0; i < M; ++i) d[i] = mul0(factor, g[i]) - ell[i];
    ci = std_error_of(d);
    return classify(margin, ci, spec.z);
  };
  r.factor = factor_for(spec.proof_sign);
  r.verdict = judge(r.factor, r.margin, r.ci_margin);

  r.details = base_details(spec);
  r.details["regime"] = regime_name(spec.regime);
  r.details["fd_step"] = fd_step;
  r.details["lhs_half_step"] = lhs_half;
  r.details["richardson_difference"] = lhs_half - lhs;
  r.details["gradient_cm_frame"] = grad;
  r.details["constants"] = constants_json(consts);
  if (spec.regime == Regime::dissipative) {
    double m_alt = 0.0, ci_alt = 0.0;
    const double f_alt = factor_for(!spec.proof_sign);
    const Verdict v_alt = judge(f_alt, m_alt, ci_alt);
    const Verdict v_statement = spec.proof_sign ? v_alt : r.verdict;
    const Verdict v_proof = spec.proof_sign ? r.verdict : v_alt;
    r.details["sign"] = spec.proof_sign ? "proof" : "statement";
    r.details["alternative"] = {{"factor", f_alt}, {"margin", m_alt}, {"ci_margin", ci_alt}, {"verdict", verdict_name(v_alt)}};
    r.details["only_proof_form_holds"] = v_statement == Verdict::fail && v_proof != Verdict::fail;
  }
  return r;
}

HarnackReport check_yosida_semigroup(const CheckSpec& spec, const Vec& deltas) {
  validate_common(spec);
  if (deltas.empty()) throw std::invalid_argument("need at least one delta");
  for (std::size_t i = 1; i < deltas.size(); ++i)
    if (!(deltas[i] < deltas[i - 1])) throw std::invalid_argument("deltas must be decreasing");
  for (double d : deltas) check_delta_window(spec.setup.drift, d);

  SemigroupSetup ref = spec.setup;
  ref.coarse_zero_steps = false;
  ref.scheme = Scheme::exponential;
  const std::vector<Vec> xs{spec.x};
  const Vec ts{spec.t};
  auto phi = [&](std::span<const double> s) { return spec.observable(s); };
  const Vec base = sample_values(ref, xs, ts, spec.M, spec.seed, phi)[0][0];
  const Estimate ref_est = estimate_from_samples(base, spec.seed);
  const std::size_t M = base.size();

  auto gap_to_ref = [&](const Vec& other) {
    Vec d(M);
    for (std::size_t i = 0; i < M; ++i) d[i] = other[i] - base[i];
    const Estimate e = estimate_from_samples(d, spec.seed);
    return std::pair{std::abs(e.mean), e.std_error};
  };

  HarnackReport r;
  r.id = spec.check_id;
  r.form = BoundForm::convergence;
  PlotTable table{"yosida_gaps", {"delta", "gap", "gap_stderr", "P_delta", "P_delta_stderr"}, {}};
  Vec gaps, ses;
  for (double d : deltas) {
    SemigroupSetup sd = ref;
    sd.drift = Drift::yosida_wrapped(spec.setup.drift, d);
    const Vec vd = sample_values(sd, xs, ts, spec.M, spec.seed, phi)[0][0];
    const auto [gap, se] = gap_to_ref(vd);
    const Estimate e = estimate_from_samples(vd, spec.seed);
    gaps.push_back(gap);
    ses.push_back(se);
    table.rows.push_back({d, gap, se, e.mean, e.std_error});
  }
  bool monotone = true, strict = true;
  for (std::size_t i = 1; i < gaps.size(); ++i) {
    if (gaps[i] > gaps[i - 1] + spec.z * std::hypot(ses[i], ses[i - 1])) monotone = false;
    if (!(gaps[i] < gaps[i - 1])) strict = false;
  }
  const double ci = ref_est.std_error;
  const bool below = gaps.back() < spec.z * ci || gaps.back() == 0.0;

  r.lhs = {gaps.back(), ses.back(), M, spec.seed};
  r.rhs = {spec.z * ci, 0.0, M, spec.seed};
  r.factor = 1.0;
  r.margin = r.rhs.mean - r.lhs.mean;
  r.ci_margin = ses.back();
  r.verdict = monotone && below ? Verdict::pass : (!monotone && !below ? Verdict::fail : Verdict::inconclusive);
  r.plots.push_back(std::move(table));

  r.details = base_details(spec);
  r.details["deltas"] = deltas;
  r.details["gaps"] = gaps;
  r.details["gap_stderr"] = ses;
  r.details["reference"] = {{"mean", ref_est.mean}, {"stderr", ref_est.std_error}};
  r.details["monotone_trend"] = monotone;
  r.details["strictly_decreasing"] = strict;
  r.details["final_below_ci"] = below;

  // The implicit scheme uses F_delta with delta = dt; compare with the discretization error of the reference.
  try {
    SemigroupSetup si = ref;
    si.scheme = Scheme::drift_implicit;
    const auto [gap_imp, se_imp] = gap_to_ref(sample_values(si, xs, ts, spec.M, spec.seed, phi)[0][0]);
    SemigroupSetup coarse = ref;
    coarse.dt = 2.0 * ref.dt;
    const auto [gap_dt, se_dt] = gap_to_ref(sample_values(coarse, xs, ts, spec.M, spec.seed, phi)[0][0]);
    r.details["implicit_scheme"] = {{"gap", gap_imp}, {"stderr", se_imp}, {"coarse_step_gap", gap_dt}, {"coarse_step_stderr", se_dt}};
  } catch (const std::invalid_argument& e) {
    r.details["implicit_scheme"] = {{"skipped", e.what()}};
  }
  return r;
}

HarnackReport check_galerkin(const CheckSpec& spec, const std::vector<std::size_t>& dims) {
  if (dims.empty()) throw std::invalid_argument("need at least one dimension");
  for (std::size_t i = 1; i < dims.size(); ++i)
    if (dims[i] < dims[i - 1]) throw std::invalid_argument("dimensions must be non-decreasing");
  if (dims.front() == 0) throw std::invalid_argument("dimensions must be positive");
  if (dims.back() > spec.setup.pair.dim()) throw std::invalid_argument("largest dimension exceeds the model");
  if (!(spec.t > 0.0)) throw std::invalid_argument("t must be positive");
  if (spec.M < 100) throw std::invalid_argument("M must be at least 100");
  if (spec.observable.support() > dims.front())
    throw std::invalid_argument("observable depends on modes beyond the smallest dimension");
  for (std::size_t k = dims.front(); k < spec.x.size(); ++k)
    if (spec.x[k] != 0.0) throw std::invalid_argument("x has components beyond the smallest dimension");
  const Vec x0 = resized(spec.x, dims.front());

  const Vec ts{spec.t};
  std::vector<Vec> values;
  std::vector<Estimate> ests;
  for (std::size_t n : dims) {
    SemigroupSetup s = spec.setup;
    s.pair = spec.setup.pair.truncated(n);
    s.drift = spec.setup.drift.truncated(n);
    const std::vector<Vec> xs{resized(x0, n)};
    values.push_back(sample_values(s, xs, ts, spec.M, spec.seed, [&](std::span<const double> st) { return spec.observable(st); })[0][0]);
    ests.push_back(estimate_from_samples(values.back(), spec.seed));
  }
  const std::size_t M = spec.M;
  PlotTable table{"galerkin", {"dim", "P_n", "P_n_stderr", "cauchy_gap", "cauchy_gap_stderr"}, {}};
  Vec gaps, ses;
  for (std::size_t i = 0; i < dims.size(); ++i) {
    double gap = kNaN, se = kNaN;
    if (i > 0) {
      Vec d(M);
      for (std::size_t p = 0; p < M; ++p) d[p] = values[i][p] - values[i - 1][p];
      const Estimate e = estimate_from_samples(d, spec.seed);
      gap = std::abs(e.mean);
      se = e.std_error;
      gaps.push_back(gap);
      ses.push_back(se);
    }
    table.rows.push_back({double(dims[i]), ests[i].mean, ests[i].std_error, gap, se});
  }
  // Exact agreement (decoupled modes, repeated dimensions) counts as decreasing.
  bool strict = true;
  for (std::size_t i = 1; i < gaps.size(); ++i)
    if (!(gaps[i] < gaps[i - 1] || gaps[i] == 0.0)) strict = false;
  const double ci = ests.back().std_error;
  const double last = gaps.empty() ? 0.0 : gaps.back();
  const bool below = last < spec.z * ci || last == 0.0;

  HarnackReport r;
  r.id = spec.check_id;
  r.form = BoundForm::convergence;
  r.lhs = {last, ses.empty() ? 0.0 : ses.back(), M, spec.seed};
  r.rhs = {spec.z * ci, 0.0, M, spec.seed};
  r.margin = r.rhs.mean - r.lhs.mean;
  r.ci_margin = r.lhs.std_error;
  r.verdict = strict && below ? Verdict::pass : (!strict && !below ? Verdict::fail : Verdict::inconclusive);
  r.plots.push_back(std::move(table));
  r.details = {{"model", spec.setup.pair.id()},
               {"drift", spec.setup.drift.id()},
               {"observable", spec.observable.id()},
               {"dims", dims},
               {"gaps", gaps},
               {"gap_stderr", ses},
               {"strictly_decreasing", strict},
               {"final_below_ci", below},
               {"final_estimate", {{"mean", ests.back().mean}, {"stderr", ci}}},
               {"M", M},
               {"seed", spec.seed},
               {"t", spec.t},
               {"z", spec.z}};
  return r;
}

HarnackReport check_strong_feller(const CheckSpec& spec, const Vec& h_norms) {
  validate_common(spec);
  if (h_norms.empty()) throw std::invalid_argument("need at least one shift");
  for (std::size_t i = 0; i < h_norms.size(); ++i) {
    if (!(h_norms[i] >= 0.0)) throw std::invalid_argument("shift norms must be non-negative");
    if (i > 0 && !(h_norms[i] < h_norms[i - 1] || h_norms[i] == 0.0))
      throw std::invalid_argument("shift norms must decrease");
  }
  if (!spec.observable.bounded()) throw std::invalid_argument("strong Feller check needs a bounded observable");
  require_regime(spec);
  const auto& pair = spec.setup.pair;
  const ModelConstants consts = derive_constants(pair, spec.setup.drift);
  Vec dir = spec.h.empty() ? Vec(spec.x.size(), 0.0) : spec.h;
  const double dn = cm_norm(pair, dir);
  if (dn == 0.0 && *std::max_element(h_norms.begin(), h_norms.end()) > 0.0)
    throw std::invalid_argument("strong Feller check needs a non-zero direction h");
  if (dn > 0.0) dir = scaled(dir, 1.0 / dn);

  std::vector<Vec> xs{spec.x};
  for (double r : h_norms) xs.push_back(ridge_shift(spec.x, dir, r));
  const Vec ts{spec.t};
  const Values v = sample_values(spec.setup, xs, ts, spec.M, spec.seed, [&](std::span<const double> s) { return spec.observable(s); });
  const Vec& base = v[0][0];
  const Estimate base_est = estimate_from_samples(base, spec.seed);
  const std::size_t M = base.size();

  // Shifting f to be non-negative costs at most its range; the optimal epsilon in the proof device gives 2 R |h| sqrt(c/t).
  const double range = spec.observable.inf_value() >= 0.0 ? spec.observable.sup_abs()
                                                            : spec.observable.sup_abs() - spec.observable.inf_value();
  const double coef = harnack_coefficient(spec, consts, spec.t);
  PlotTable table{"strong_feller", {"h_norm", "difference", "difference_stderr", "envelope"}, {}};
  Vec diffs, ses, env;
  bool envelope_ok = true;
  for (std::size_t m = 0; m < h_norms.size(); ++m) {
    Vec d(M);
    for (std::size_t i = 0; i < M; ++i) d[i] = v[m + 1][0][i] - base[i];
    const Estimate e = estimate_from_samples(d, spec.seed);
    const double envelope = 2.0 * range * h_norms[m] * std::sqrt(coef / spec.t);
    diffs.push_back(std::abs(e.mean));
    ses.push_back(e.std_error);
    env.push_back(envelope);
    if (diffs.back() > envelope + spec.z * e.std_error) envelope_ok = false;
    table.rows.push_back({h_norms[m], diffs.back(), e.std_error, envelope});
  }
  bool monotone = true;
  for (std::size_t i = 1; i < diffs.size(); ++i)
    if (diffs[i] > diffs[i - 1] + spec.z * std::hypot(ses[i], ses[i - 1])) monotone = false;
  const double ci = base_est.std_error;
  const bool below = diffs.back() < spec.z * ci || diffs.back() == 0.0;

  HarnackReport r;
  r.id = spec.check_id;
  r.form = BoundForm::convergence;
  r.lhs = {diffs.back(), ses.back(), M, spec.seed};
  r.rhs = {spec.z * ci, 0.0, M, spec.seed};
  r.margin = r.rhs.mean - r.lhs.mean;
  r.ci_margin = ses.back();
  r.verdict = !envelope_ok ? Verdict::fail : (monotone && below ? Verdict::pass : Verdict::inconclusive);
  r.plots.push_back(std::move(table));
  r.details = base_details(spec);
  r.details["regime"] = regime_name(spec.regime);
  r.details["h_norms"] = h_norms;
  r.details["differences"] = diffs;
  r.details["difference_stderr"] = ses;
  r.details["envelope"] = env;
  r.details["envelope_ok"] = envelope_ok;
  r.details["monotone_trend"] = monotone;
  r.details["final_below_ci"] = below;
  r.details["range"] = range;
  r.details["coefficient"] = coef;
  return r;
}

std::vector<HyperFamilyMember> hermite_family(const OperatorPair& pair) {
  const double sigma = std::sqrt(pair.c()[0] / (2.0 * pair.a1()));
  const Vec e1 = unit_vector(pair.dim(), 0);
  return {{"constant", Observable::constant(1.0)},
          {"hermite1", Observable::linear(e1, 1.0 / sigma)},
          {"hermite2", Observable::quadratic(e1, 1.0 / (sigma * sigma), -1.0)},
          {"steep", Observable::product_sigmoid({e1}, {20.0 / sigma}, {2.0 * sigma})}};
}

HarnackReport check_hypercontractivity(const HypercontractivitySpec& spec) {
  const auto& pair = spec.setup.pair;
  const double eps_star = exp_integrability_threshold(pair);
  if (!(eps_star > 0.0)) throw UnsupportedRegime("exponential integrability threshold must be positive");
  if (spec.family.empty() || spec.t_grid.empty()) throw std::invalid_argument("need a non-empty family and time grid");
  for (std::size_t i = 0; i < spec.t_grid.size(); ++i) {
    if (!(spec.t_grid[i] >= 0.0)) throw std::invalid_argument("times must be non-negative");
    if (i > 0 && !(spec.t_grid[i] > spec.t_grid[i - 1])) throw std::invalid_argument("times must increase");
  }
  if (spec.outer < 2 || spec.inner < 1) throw std::invalid_argument("need at least two outer and one inner sample");

  const std::vector<Vec> mu = sample_invariant(spec.setup, spec.burn_in, spec.outer, derive_seed(spec.seed, "hyper-mu"));
  Vec pos;
  for (double t : spec.t_grid)
    if (t > 0.0) pos.push_back(t);
  const std::size_t nf = spec.family.size();
  std::vector<std::vector<Vec>> sums(nf, std::vector<Vec>(pos.size(), Vec(mu.size(), 0.0)));
  if (!pos.empty())
    for_each_endpoint(spec.setup, mu, pos, spec.inner, derive_seed(spec.seed, "hyper-inner"),
                      [&](std::size_t s, std::size_t slot, std::size_t, std::span<const double> st) {
                        for (std::size_t f = 0; f < nf; ++f) sums[f][slot][s] += spec.family[f].f(st);
                      });

  const bool gaussian = spec.setup.drift.is_zero();
  const double a1 = pair.a1();
  auto oracle = [&](const std::string& name, double t) {
    if (!gaussian) return kNaN;
    if (name == "constant") return 1.0;
    if (name == "hermite1") return std::pow(3.0, 0.25) * std::exp(-a1 * t);
    if (name == "hermite2") return std::pow(60.0, 0.25) / std::sqrt(2.0) * std::exp(-2.0 * a1 * t);
    return kNaN;
  };

  const std::size_t J = mu.size();
  PlotTable table{"hypercontractivity", {"member", "t", "ratio", "ratio_stderr", "oracle"}, {}};
  nlohmann::json members = nlohmann::json::array();
  bool nelson_ok = true;
  double worst_nelson = -std::numeric_limits<double>::infinity(), worst_nelson_se = 0.0;
  double t0 = 0.0, C = 0.0, C_se = 0.0;
  bool tail_ok = true;
  double steep_t0_ratio = kNaN;
  for (std::size_t f = 0; f < nf; ++f) {
    const auto& member = spec.family[f];
    Vec b(J);
    for (std::size_t j = 0; j < J; ++j) b[j] = std::pow(member.f(mu[j]), 2);
    const double B = sample_mean(b);
    if (!(B > 0.0)) throw std::invalid_argument("family member '" + member.name + "' vanishes on the sample");
    Vec ratios, ses;
    for (double t : spec.t_grid) {
      Vec a(J);
      for (std::size_t j = 0; j < J; ++j) {
        const double pf = t == 0.0 ? member.f(mu[j]) : sums[f][index_in(pos, t)][j] / double(spec.inner);
        a[j] = std::pow(pf, 4);
      }
      const double A = sample_mean(a);
      const double ratio = std::pow(A, 0.25) / std::sqrt(B);
      Vec lin(J);
      for (std::size_t j = 0; j < J; ++j) lin[j] = ratio * ((a[j] - A) / (4.0 * A) - (b[j] - B) / (2.0 * B));
      const double se = A > 0.0 ? std_error_of(lin) : 0.0;
      ratios.push_back(ratio);
      ses.push_back(se);
      const double orc = oracle(member.name, t);
      table.rows.push_back({double(f), t, ratio, se, orc});
      if (gaussian && std::exp(-2.0 * a1 * t) <= 1.0 / 3.0) {
        if (ratio > 1.0 + std::max(spec.z * se, 1e-12)) nelson_ok = false;
        if (ratio - 1.0 > worst_nelson) {
          worst_nelson = ratio - 1.0;
          worst_nelson_se = se;
        }
      }
      if (t == 0.0 && member.name == "steep") steep_t0_ratio = ratio;
    }
    // Earliest index after which the ratios are non-increasing up to noise.
    std::size_t i0 = ratios.size() - 1;
    while (i0 > 0 && ratios[i0] <= ratios[i0 - 1] + spec.z * std::hypot(ses[i0], ses[i0 - 1]) + 1e-12) --i0;
    std::size_t first_positive = 0;
    while (first_positive < spec.t_grid.size() && spec.t_grid[first_positive] == 0.0) ++first_positive;
    i0 = std::max(i0, std::min(first_positive, ratios.size() - 1));
    if (ratios.size() - i0 < 2) tail_ok = false;
    t0 = std::max(t0, spec.t_grid[i0]);
    for (std::size_t i = i0; i < ratios.size(); ++i)
      if (ratios[i] > C) {
        C = ratios[i];
        C_se = ses[i];
      }
    members.push_back({{"name", member.name}, {"f", member.f.id()}, {"ratios", ratios}, {"stderr", ses}, {"t0", spec.t_grid[i0]}});
  }

  HarnackReport r;
  r.id = spec.check_id;
  r.form = BoundForm::convergence;
  r.lhs = {C, C_se, J, spec.seed};
  r.rhs = {gaussian ? 1.0 : kNaN, 0.0, J, spec.seed};
  r.factor = 1.0;
  r.margin = gaussian ? 0.0 - worst_nelson : kNaN;
  r.ci_margin = gaussian ? worst_nelson_se : kNaN;
  r.verdict = !nelson_ok ? Verdict::fail : (tail_ok ? Verdict::pass : Verdict::inconclusive);
  r.details = {{"model", pair.id()},
               {"drift", spec.setup.drift.id()},
               {"t_grid", spec.t_grid},
               {"outer", spec.outer},
               {"inner", spec.inner},
               {"burn_in", spec.burn_in},
               {"seed", spec.seed},
               {"members", members},
               {"t0", t0},
               {"C", C},
               {"nelson_region_ok", nelson_ok},
               {"eps_star", eps_star},
               {"steep_ratio_at_t0", finite_or_null(steep_t0_ratio)}};
  if (!std::isfinite(worst_nelson)) r.margin = r.ci_margin = kNaN;
  if (spec.bracket_pairs > 0) {
    const auto br = exp_integrability_bracket(spec.setup, spec.bracket_pairs, spec.burn_in, derive_seed(spec.seed, "hyper-bracket"));
    r.details["bracket"] = {{"eps_star", br.eps_star},
                            {"below_eps", br.below_eps},
                            {"below_mean", br.below_mean},
                            {"below_exact", finite_or_null(br.below_exact)},
                            {"below_change", br.below_change},
                            {"above_eps", br.above_eps},
                            {"sizes", br.sizes},
                            {"above_means", br.above_means},
                            {"above_growth", br.above_growth},
                            {"converges_below", br.converges_below},
                            {"diverges_above", br.diverges_above}};
    if (r.verdict == Verdict::pass && !(br.converges_below && br.diverges_above)) r.verdict = Verdict::inconclusive;
  }
  r.plots.push_back(std::move(table));
  return r;
}

ExpIntegrabilityBracket exp_integrability_bracket(const SemigroupSetup& setup, std::size_t pairs, double burn_in,
                                                  std::uint64_t seed) {
  if (pairs < 256) throw std::invalid_argument("bracket needs at least 256 pairs");
  const auto& pair = setup.pair;
  ExpIntegrabilityBracket b;
  b.eps_star = exp_integrability_threshold(pair);
  if (!(b.eps_star > 0.0)) throw UnsupportedRegime("exponential integrability threshold must be positive");
  const std::vector<Vec> mu = sample_invariant(setup, burn_in, 2 * pairs, seed);
  Vec q(pairs);
  for (std::size_t j = 0; j < pairs; ++j) {
    double s = 0.0;
    for (std::size_t k = 0; k < pair.dim(); ++k) {
      const double d = mu[j][k] - mu[j + pairs][k];
      s += d * d / pair.c()[k];
    }
    q[j] = s;
  }
  auto mean_exp = [&](double eps, std::size_t count) {
    Vec e(count);
    for (std::size_t j = 0; j < count; ++j) e[j] = std::exp(eps * q[j]);
    return sample_mean(e);
  };
  const std::size_t small = pairs / 256;
  b.below_eps = 0.5 * b.eps_star;
  b.below_mean = mean_exp(b.below_eps, pairs);
  b.below_exact = setup.drift.is_zero() ? exp_integrability_value(pair, b.below_eps) : kNaN;
  b.below_change = std::abs(b.below_mean / mean_exp(b.below_eps, small) - 1.0);
  b.converges_below = std::isfinite(b.below_exact) ? std::abs(b.below_mean / b.below_exact - 1.0) <= 0.1
                                                   : b.below_change <= 0.1;
  b.above_eps = 2.0 * b.eps_star;
  for (std::size_t size : {small, pairs / 16, pairs}) {
    b.sizes.push_back(double(size));
    b.above_means.push_back(mean_exp(b.above_eps, size));
  }
  b.above_growth = b.above_means.back() / b.above_means.front();
  b.diverges_above = b.above_growth > 10.0;
  return b;
}

}  // namespace harnack
