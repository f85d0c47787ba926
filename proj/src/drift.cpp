#include "harnack/drift.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "harnack/basis.hpp"
#include "harnack/errors.hpp"
#include "harnack/rng.hpp"

namespace harnack {

PhiKind parse_phi(const std::string& name) {
  if (name == "cubic") return PhiKind::cubic;
  if (name == "cubic_damped") return PhiKind::cubic_damped;
  throw std::invalid_argument("unknown reaction-diffusion phi '" + name + "'");
}

std::string phi_name(PhiKind phi) { return phi == PhiKind::cubic ? "cubic" : "cubic_damped"; }

namespace {

double phi_value(PhiKind phi, double s) {
  const double c = -s * s * s;
  return phi == PhiKind::cubic ? c : c - s;
}

double phi_derivative(PhiKind phi, double s) {
  const double d = -3.0 * s * s;
  return phi == PhiKind::cubic ? d : d - 1.0;
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

struct Drift::Impl {
  DriftKind kind = DriftKind::zero;
  double zeta = 0.0;
  double L_G = 0.0;
  Vec sqrt_c;
  Vec u;
  double kappa = 0.0;
  PhiKind phi = PhiKind::cubic;
  std::optional<BasisTransform> basis;
  std::optional<Drift> base;
  double delta = 0.0;
};

Drift Drift::zero() { return Drift(std::make_shared<const Impl>()); }

Drift Drift::linear(double zeta) {
  if (!std::isfinite(zeta)) throw std::invalid_argument("linear drift needs a finite zeta");
  auto impl = std::make_shared<Impl>();
  impl->kind = DriftKind::linear;
  impl->zeta = zeta;
  return Drift(impl);
}

Drift Drift::composed(const OperatorPair& pair, double L_G) {
  if (!(L_G >= 0.0) || !std::isfinite(L_G)) throw std::invalid_argument("composed drift needs L_G >= 0");
  auto impl = std::make_shared<Impl>();
  impl->kind = DriftKind::composed;
  impl->L_G = L_G;
  impl->sqrt_c.resize(pair.dim());
  for (std::size_t k = 0; k < pair.dim(); ++k) impl->sqrt_c[k] = std::sqrt(pair.c()[k]);
  impl->zeta = L_G * impl->sqrt_c[0];
  return Drift(impl);
}

Drift Drift::cubic_kernel(Vec u, double kappa, double zeta_F) {
  if (u.empty()) throw std::invalid_argument("cubic drift needs a direction");
  const double un = norm(u);
  if (!(un > 0.0) || un > 1.0 + 1e-12) throw std::invalid_argument("cubic drift direction must have norm in (0,1]");
  if (!(kappa > 0.0)) throw std::invalid_argument("cubic drift needs kappa > 0");
  if (!std::isfinite(zeta_F)) throw std::invalid_argument("cubic drift needs a finite zeta_F");
  auto impl = std::make_shared<Impl>();
  impl->kind = DriftKind::cubic;
  impl->u = std::move(u);
  impl->kappa = kappa;
  impl->zeta = zeta_F;
  return Drift(impl);
}

Drift Drift::reaction_diffusion(PhiKind phi, double zeta_F, std::size_t modes, std::size_t grid_size) {
  if (!(zeta_F > 0.0) || zeta_F > 12.0)
    throw std::invalid_argument("reaction-diffusion drift needs 0 < zeta_F <= 12 to stay dissipative");
  if (grid_size == 0) grid_size = 4 * modes + 1;
  if (grid_size < 2 * modes) throw std::invalid_argument("reaction-diffusion grid must hold at least 2 points per mode");
  auto impl = std::make_shared<Impl>();
  impl->kind = DriftKind::reaction_diffusion;
  impl->phi = phi;
  impl->zeta = zeta_F;
  impl->basis.emplace(modes, grid_size);
  return Drift(impl);
}

Drift Drift::yosida_wrapped(const Drift& base, double delta) {
  check_delta_window(base, delta);
  auto impl = std::make_shared<Impl>();
  impl->kind = DriftKind::yosida;
  impl->base = base;
  impl->delta = delta;
  impl->zeta = base.zeta_F();
  return Drift(impl);
}

DriftKind Drift::kind() const noexcept { return impl_->kind; }

double Drift::zeta_F() const noexcept { return impl_->zeta; }

double Drift::L_G() const noexcept { return impl_->L_G; }

const Drift& Drift::base() const {
  if (!impl_->base) throw std::logic_error("drift has no base");
  return *impl_->base;
}

double Drift::delta() const {
  if (impl_->kind != DriftKind::yosida) throw std::logic_error("drift has no Yosida parameter");
  return impl_->delta;
}

std::optional<double> Drift::lipschitz_constant() const noexcept {
  switch (impl_->kind) {
    case DriftKind::zero:
      return 0.0;
    case DriftKind::linear:
      return std::abs(impl_->zeta);
    case DriftKind::composed:
      return impl_->zeta;
    case DriftKind::yosida:
      return 2.0 / impl_->delta + std::abs(impl_->zeta);
    default:
      return std::nullopt;
  }
}

GrowthBound Drift::growth() const noexcept {
  switch (impl_->kind) {
    case DriftKind::zero:
      return {0.0, 1};
    case DriftKind::linear:
      return {std::abs(impl_->zeta), 1};
    case DriftKind::composed: {
      double s = 0.0;
      for (double v : impl_->sqrt_c) s += v * v;
      return {impl_->L_G * std::sqrt(s), 1};
    }
    case DriftKind::cubic:
      return {impl_->kappa, 3};
    case DriftKind::reaction_diffusion:
      return {(impl_->phi == PhiKind::cubic ? 1.0 : 2.0) + 0.5 * impl_->zeta, 3};
    case DriftKind::yosida:
      return impl_->base->growth();
  }
  return {};
}

double Drift::e_norm(std::span<const double> y) const {
  if (impl_->kind == DriftKind::reaction_diffusion) return impl_->basis->grid_sup_norm(y);
  if (impl_->kind == DriftKind::yosida) return impl_->base->e_norm(y);
  return norm(y);
}

std::optional<std::size_t> Drift::dim() const noexcept {
  switch (impl_->kind) {
    case DriftKind::composed:
      return impl_->sqrt_c.size();
    case DriftKind::cubic:
      return impl_->u.size();
    case DriftKind::reaction_diffusion:
      return impl_->basis->modes();
    case DriftKind::yosida:
      return impl_->base->dim();
    default:
      return std::nullopt;
  }
}

std::string Drift::id() const {
  switch (impl_->kind) {
    case DriftKind::zero:
      return "zero";
    case DriftKind::linear:
      return "linear(zeta=" + fmt(impl_->zeta) + ")";
    case DriftKind::composed:
      return "composed(L_G=" + fmt(impl_->L_G) + ",n=" + std::to_string(impl_->sqrt_c.size()) + ")";
    case DriftKind::cubic: {
      std::string u;
      for (std::size_t k = 0; k < impl_->u.size(); ++k) u += (k ? "," : "") + fmt(impl_->u[k]);
      return "cubic(kappa=" + fmt(impl_->kappa) + ",zeta_F=" + fmt(impl_->zeta) + ",u=[" + u + "])";
    }
    case DriftKind::reaction_diffusion:
      return "reaction_diffusion(phi=" + phi_name(impl_->phi) + ",zeta_F=" + fmt(impl_->zeta) +
             ",modes=" + std::to_string(impl_->basis->modes()) + ",grid=" + std::to_string(impl_->basis->grid_size()) +
             ")";
    case DriftKind::yosida:
      return "yosida(delta=" + fmt(impl_->delta) + "," + impl_->base->id() + ")";
  }
  return "unknown";
}

Drift Drift::truncated(std::size_t n) const {
  if (n == 0) throw std::invalid_argument("truncation dimension must be positive");
  switch (impl_->kind) {
    case DriftKind::zero:
    case DriftKind::linear:
      return *this;
    case DriftKind::composed: {
      if (n > impl_->sqrt_c.size()) throw std::invalid_argument("cannot truncate composed drift upwards");
      auto impl = std::make_shared<Impl>(*impl_);
      impl->sqrt_c.resize(n);
      return Drift(impl);
    }
    case DriftKind::cubic: {
      if (n > impl_->u.size()) throw std::invalid_argument("cannot truncate cubic drift upwards");
      Vec u(impl_->u.begin(), impl_->u.begin() + std::ptrdiff_t(n));
      if (norm(u) == 0.0) throw std::invalid_argument("cubic drift direction vanishes on the truncation");
      return cubic_kernel(std::move(u), impl_->kappa, impl_->zeta);
    }
    case DriftKind::reaction_diffusion:
      return reaction_diffusion(impl_->phi, impl_->zeta, n, impl_->basis->grid_size());
    case DriftKind::yosida:
      return yosida_wrapped(impl_->base->truncated(n), impl_->delta);
  }
  return *this;
}

namespace {

void check_dim(const std::optional<std::size_t>& d, std::size_t got) {
  if (d && *d != got) throw std::invalid_argument("vector dimension does not match the drift");
}

// Scratch buffers for grid evaluation; one set per thread keeps eval re-entrant.
struct GridScratch {
  Vec f;
  Vec g;
};

GridScratch& grid_scratch(std::size_t n) {
  thread_local GridScratch s;
  if (s.f.size() != n) {
    s.f.assign(n, 0.0);
    s.g.assign(n, 0.0);
  }
  return s;
}

}  // namespace

void Drift::eval_into(std::span<const double> x, std::span<double> out) const {
  if (out.size() != x.size()) throw std::invalid_argument("output size mismatch");
  check_dim(dim(), x.size());
  const Impl& d = *impl_;
  switch (d.kind) {
    case DriftKind::zero:
      std::fill(out.begin(), out.end(), 0.0);
      return;
    case DriftKind::linear:
      for (std::size_t k = 0; k < x.size(); ++k) out[k] = d.zeta * x[k];
      return;
    case DriftKind::composed:
      for (std::size_t k = 0; k < x.size(); ++k) out[k] = d.sqrt_c[k] * d.L_G * std::sin(x[k]);
      return;
    case DriftKind::cubic: {
      double s = 0.0;
      for (std::size_t k = 0; k < x.size(); ++k) s += d.u[k] * x[k];
      const double w = -d.kappa * s * s * s;
      for (std::size_t k = 0; k < x.size(); ++k) out[k] = w * d.u[k] + d.zeta * x[k];
      return;
    }
    case DriftKind::reaction_diffusion: {
      auto& s = grid_scratch(d.basis->grid_size());
      d.basis->to_grid(x, s.f);
      for (std::size_t j = 0; j < s.f.size(); ++j) s.g[j] = phi_value(d.phi, s.f[j]) - 0.5 * d.zeta * s.f[j] * s.f[j];
      d.basis->to_spectral(s.g, out);
      return;
    }
    case DriftKind::yosida: {
      const Vec J = yosida_resolvent(*d.base, d.delta, x).y;
      d.base->eval_into(J, out);
      return;
    }
  }
}

Vec Drift::eval(std::span<const double> x) const {
  Vec out(x.size());
  eval_into(x, out);
  return out;
}

namespace {

Eigen::MatrixXd resolvent_matrix(const Drift& drift, double delta, std::span<const double> y) {
  const std::size_t n = y.size();
  const double z = drift.zeta_F();
  Eigen::MatrixXd m(n, n);
  Vec e(n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    e[j] = 1.0;
    const Vec col = drift.jacobian_action(y, e);
    e[j] = 0.0;
    for (std::size_t i = 0; i < n; ++i) m(Eigen::Index(i), Eigen::Index(j)) = -delta * col[i];
    m(Eigen::Index(j), Eigen::Index(j)) += 1.0 + delta * z;
  }
  return m;
}

}  // namespace

Vec Drift::jacobian_action(std::span<const double> x, std::span<const double> h) const {
  if (x.size() != h.size()) throw std::invalid_argument("direction size mismatch");
  check_dim(dim(), x.size());
  const Impl& d = *impl_;
  Vec out(x.size(), 0.0);
  switch (d.kind) {
    case DriftKind::zero:
      return out;
    case DriftKind::linear:
      for (std::size_t k = 0; k < x.size(); ++k) out[k] = d.zeta * h[k];
      return out;
    case DriftKind::composed:
      for (std::size_t k = 0; k < x.size(); ++k) out[k] = d.sqrt_c[k] * d.L_G * std::cos(x[k]) * h[k];
      return out;
    case DriftKind::cubic: {
      double s = 0.0;
      double sh = 0.0;
      for (std::size_t k = 0; k < x.size(); ++k) {
        s += d.u[k] * x[k];
        sh += d.u[k] * h[k];
      }
      const double w = -3.0 * d.kappa * s * s * sh;
      for (std::size_t k = 0; k < x.size(); ++k) out[k] = w * d.u[k] + d.zeta * h[k];
      return out;
    }
    case DriftKind::reaction_diffusion: {
      const Vec f = d.basis->to_grid(x);
      Vec g = d.basis->to_grid(h);
      for (std::size_t j = 0; j < g.size(); ++j) g[j] *= phi_derivative(d.phi, f[j]) - d.zeta * f[j];
      d.basis->to_spectral(g, out);
      return out;
    }
    case DriftKind::yosida: {
      const Vec J = yosida_resolvent(*d.base, d.delta, x).y;
      const Eigen::MatrixXd m = resolvent_matrix(*d.base, d.delta, J);
      const Eigen::VectorXd hv = Eigen::Map<const Eigen::VectorXd>(h.data(), Eigen::Index(h.size()));
      const Eigen::VectorXd z = m.partialPivLu().solve(hv);
      return d.base->jacobian_action(J, std::span<const double>(z.data(), std::size_t(z.size())));
    }
  }
  return out;
}

void check_delta_window(const Drift& drift, double delta) {
  if (!(delta > 0.0) || !std::isfinite(delta)) throw std::invalid_argument("Yosida delta must be positive");
  const double z = drift.zeta_F();
  if (z != 0.0 && !(delta < 1.0 / std::abs(z)))
    throw std::invalid_argument("Yosida delta must lie below 1/|zeta_F|");
}

ResolventResult yosida_resolvent(const Drift& drift, double delta, std::span<const double> x,
                                 const ResolventOptions& options) {
  check_delta_window(drift, delta);
  const std::size_t n = x.size();
  const double z = drift.zeta_F();
  Vec f(n);
  auto residual = [&](std::span<const double> y, std::span<double> r) {
    drift.eval_into(y, f);
    for (std::size_t k = 0; k < n; ++k) r[k] = y[k] - delta * (f[k] - z * y[k]) - x[k];
    const double v = norm(r);
    return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
  };

  ResolventResult out;
  out.y.assign(x.begin(), x.end());
  Vec r(n), trial(n), rt(n);
  double res = residual(out.y, r);
  const double target = std::min(options.tolerance, 1e-13 * std::max(1.0, norm(x)));

  while (res > target && out.iterations < options.max_iterations) {
    ++out.iterations;
    const Eigen::MatrixXd m = resolvent_matrix(drift, delta, out.y);
    const Eigen::VectorXd rhs = -Eigen::Map<const Eigen::VectorXd>(r.data(), Eigen::Index(n));
    const Eigen::VectorXd step = m.partialPivLu().solve(rhs);

    bool accepted = false;
    for (double lam = 1.0; lam > 1e-9; lam *= 0.5) {
      for (std::size_t k = 0; k < n; ++k) trial[k] = out.y[k] + lam * step[Eigen::Index(k)];
      const double rt_norm = residual(trial, rt);
      if (rt_norm < (1.0 - 1e-4 * lam) * res) {
        out.y.swap(trial);
        r.swap(rt);
        res = rt_norm;
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      // Residual map is strongly monotone, so a short step along -r decreases it.
      for (double omega = 1.0; omega > 1e-12; omega *= 0.5) {
        for (std::size_t k = 0; k < n; ++k) trial[k] = out.y[k] - omega * r[k];
        const double rt_norm = residual(trial, rt);
        if (rt_norm < res) {
          out.y.swap(trial);
          r.swap(rt);
          res = rt_norm;
          accepted = true;
          out.fallback_used = true;
          break;
        }
      }
    }
    if (!accepted) break;
  }
  out.residual = res;
  if (!(res <= options.tolerance)) throw NonConvergence("Yosida resolvent did not converge", res, out.iterations);
  return out;
}

Vec yosida_drift(const Drift& drift, double delta, std::span<const double> x) {
  const Vec J = yosida_resolvent(drift, delta, x).y;
  return drift.eval(J);
}

PairSampler uniform_box_pairs(std::size_t dim, double half_width, std::uint64_t seed) {
  const NoisePlan plan(seed, 0);
  return [=](std::size_t trial) {
    std::pair<Vec, Vec> p{Vec(dim), Vec(dim)};
    plan.fill_uniforms(trial, 0, p.first);
    plan.fill_uniforms(trial, 1, p.second);
    for (std::size_t k = 0; k < dim; ++k) {
      p.first[k] = half_width * (2.0 * p.first[k] - 1.0);
      p.second[k] = half_width * (2.0 * p.second[k] - 1.0);
    }
    return p;
  };
}

DissipativityReport check_dissipativity(const Drift& drift, double zeta, const PairSampler& sampler,
                                        std::size_t trials) {
  if (trials == 0) throw std::invalid_argument("dissipativity check needs at least one trial");
  DissipativityReport rep;
  rep.trials = trials;
  for (std::size_t t = 0; t < trials; ++t) {
    const auto [x, y] = sampler(t);
    const Vec fx = drift.eval(x);
    const Vec fy = drift.eval(y);
    const Vec d = sub(x, y);
    const double d2 = dot(d, d);
    const double v = dot(sub(fx, fy), d) - zeta * d2;
    rep.max_violation = std::max(rep.max_violation, v);
    if (v > 1e-9 * (1.0 + d2)) ++rep.failures;
  }
  rep.passed = rep.failures == 0;
  return rep;
}

namespace {

constexpr double kSlack = 1e-9;

double cji_bound(const Drift& drift, double delta, std::span<const double> y, double zeta) {
  const GrowthBound g = drift.growth();
  const double ye = drift.e_norm(y);
  return delta * (g.M + g.M * std::pow(ye, g.m) + zeta * ye);
}

}  // namespace

YosidaRateReport check_yosida_rates(const Drift& drift, std::span<const double> y, std::span<const double> deltas,
                                    const PairSampler& sampler, std::size_t lipschitz_pairs) {
  for (std::size_t i = 1; i < deltas.size(); ++i)
    if (!(deltas[i] < deltas[i - 1])) throw std::invalid_argument("deltas must be decreasing");
  const double z = drift.zeta_F();
  const double az = std::abs(z);
  const Vec Fy = drift.eval(y);
  const double yn = norm(y);
  YosidaRateReport rep;
  for (double delta : deltas) {
    YosidaRateRow row;
    row.delta = delta;
    const Vec J = yosida_resolvent(drift, delta, y).y;
    row.resolvent_gap = norm(sub(J, y));
    row.cji_bound = cji_bound(drift, delta, y, az);
    row.cji_literal_bound = cji_bound(drift, delta, y, z);
    row.cji_ok = row.resolvent_gap <= row.cji_bound * (1.0 + kSlack) + kSlack;
    row.cji_literal_ok = row.resolvent_gap <= row.cji_literal_bound * (1.0 + kSlack) + kSlack;

    const Vec Fd = drift.eval(J);
    row.drift_gap = norm(sub(Fd, Fy));
    row.vy1_lhs = norm(Fd);
    row.vy1_bound = (3.0 + delta * az) * norm(Fy) + (2.0 * az + delta * z * z) * yn;
    row.vy1_literal_bound = (3.0 + delta * z) * norm(Fy) + (2.0 * z + delta * z * z) * yn;
    row.vy1_ok = row.vy1_lhs <= row.vy1_bound * (1.0 + kSlack) + kSlack;
    row.vy1_literal_ok = row.vy1_lhs <= row.vy1_literal_bound * (1.0 + kSlack) + kSlack;

    row.lip_bound = 2.0 / delta + az;
    for (std::size_t t = 0; t < lipschitz_pairs; ++t) {
      const auto [a, b] = sampler(t);
      const double d = norm(sub(a, b));
      if (d == 0.0) continue;
      const double q = norm(sub(yosida_drift(drift, delta, a), yosida_drift(drift, delta, b))) / d;
      row.max_lip_quotient = std::max(row.max_lip_quotient, q);
    }
    row.lip_ok = row.max_lip_quotient <= row.lip_bound * (1.0 + kSlack);
    rep.all_ok = rep.all_ok && row.cji_ok && row.vy1_ok && row.lip_ok;
    if (!rep.rows.empty() && row.drift_gap > rep.rows.back().drift_gap * (1.0 + kSlack) + 1e-12)
      rep.drift_gap_monotone = false;
    rep.rows.push_back(row);
  }
  rep.all_ok = rep.all_ok && rep.drift_gap_monotone;
  return rep;
}

YosidaProbeReport probe_yosida_bounds(const Drift& drift, std::span<const double> deltas,
                                      const PairSampler& sampler, std::size_t probes) {
  if (deltas.empty()) throw std::invalid_argument("probe sweep needs at least one delta");
  const double az = std::abs(drift.zeta_F());
  YosidaProbeReport rep;
  rep.probes = probes;
  for (std::size_t i = 0; i < probes; ++i) {
    const auto [a, b] = sampler(i);
    const double delta = deltas[i % deltas.size()];
    const Vec Ja = yosida_resolvent(drift, delta, a).y;
    const double gap = norm(sub(Ja, a));
    const double bound = cji_bound(drift, delta, a, az);
    const double cr = gap == 0.0 ? 0.0 : gap / bound;
    rep.worst_cji_ratio = std::max(rep.worst_cji_ratio, cr);
    if (gap > bound * (1.0 + kSlack) + kSlack) ++rep.cji_violations;

    const double d = norm(sub(a, b));
    if (d == 0.0) continue;
    const double q = norm(sub(drift.eval(Ja), yosida_drift(drift, delta, b))) / d;
    const double lr = q / (2.0 / delta + az);
    rep.worst_lip_ratio = std::max(rep.worst_lip_ratio, lr);
    if (lr > 1.0 + kSlack) ++rep.lip_violations;
  }
  return rep;
}

}  // namespace harnack
