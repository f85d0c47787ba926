#include "harnack/semigroup.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace harnack {

TimeGrid SemigroupSetup::grid_for(std::span<const double> times) const {
  if (times.empty()) throw std::invalid_argument("need at least one time");
  double t_end = 0.0;
  for (double t : times) {
    if (!(t > 0.0)) throw std::invalid_argument("semigroup times must be positive");
    t_end = std::max(t_end, t);
  }
  const std::size_t first = drift.is_zero() && coarse_zero_steps ? 1 : TimeGrid::with_max_step(t_end, dt).steps();
  for (std::size_t steps = first; steps < first * 4096; ++steps) {
    const TimeGrid g(t_end, steps);
    bool ok = true;
    for (double t : times) {
      try {
        g.index_of(t);
      } catch (const std::invalid_argument&) {
        ok = false;
        break;
      }
    }
    if (ok) return g;
  }
  throw std::invalid_argument("requested times do not fit a common uniform grid");
}

void for_each_endpoint(const SemigroupSetup& setup, std::span<const Vec> xs, std::span<const double> times,
                       std::size_t M, std::uint64_t seed, const EndpointVisitor& visit, std::size_t chunk) {
  const TimeGrid grid = setup.grid_for(times);
  std::vector<std::size_t> record = record_indices(grid, times);
  const NoisePlan plan(seed, M);
  const std::size_t per_path = std::max<std::size_t>(1, xs.size() * record.size() * setup.pair.dim());
  chunk = std::clamp<std::size_t>((std::size_t{1} << 23) / per_path, 1, std::max<std::size_t>(chunk, 1));
  for (std::size_t first = 0; first < M; first += chunk) {
    const std::size_t count = std::min(chunk, M - first);
    const auto ens = simulate_batch(setup.pair, setup.drift, xs, grid, plan.window(first, count), setup.scheme, record);
    for (std::size_t s = 0; s < ens.size(); ++s)
      for (std::size_t slot = 0; slot < ens[s].slots(); ++slot)
        for (std::size_t p = 0; p < count; ++p) visit(s, slot, first + p, ens[s].state(p, slot));
  }
}

std::vector<PathEnsemble> simulate_endpoints(const SemigroupSetup& setup, std::span<const Vec> xs,
                                             std::span<const double> times, std::size_t M, std::uint64_t seed) {
  const TimeGrid grid = setup.grid_for(times);
  return simulate_batch(setup.pair, setup.drift, xs, grid, NoisePlan(seed, M), setup.scheme,
                        record_indices(grid, times));
}

Vec observable_samples(const PathEnsemble& ens, std::size_t slot, const Observable& phi) {
  Vec v(ens.paths());
  for (std::size_t p = 0; p < ens.paths(); ++p) v[p] = phi(ens.state(p, slot));
  return v;
}

Estimate estimate_Pt(const SemigroupSetup& setup, const Observable& phi, std::span<const double> x, double t,
                     std::size_t M, std::uint64_t seed) {
  if (!(t > 0.0)) throw std::invalid_argument("estimate_Pt needs t > 0");
  if (M < 100) throw std::invalid_argument("estimate_Pt needs M >= 100");
  const std::vector<Vec> xs{Vec(x.begin(), x.end())};
  const double ts[] = {t};
  Vec values(M);
  for_each_endpoint(setup, xs, ts, M, seed,
                    [&](std::size_t, std::size_t, std::size_t p, std::span<const double> s) { values[p] = phi(s); });
  return estimate_from_samples(values, seed);
}

double apply_generator(const SemigroupSetup& setup, const Observable& phi, std::span<const double> x) {
  const auto& pair = setup.pair;
  if (x.size() != pair.dim()) throw std::invalid_argument("vector dimension does not match the model");
  const Vec f = setup.drift.eval(x);
  const Vec g = phi.gradient(x);
  double first = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) first += (-pair.a()[k] * x[k] + f[k]) * g[k];
  return 0.5 * phi.trace_c_hessian(pair, x) + first;
}

GeneratorReport generator_consistency(const SemigroupSetup& setup, const Observable& phi, std::span<const double> x,
                                      std::span<const double> dts, double m_scale, std::uint64_t seed,
                                      std::size_t max_M) {
  for (std::size_t i = 1; i < dts.size(); ++i)
    if (!(dts[i] < dts[i - 1])) throw std::invalid_argument("generator time steps must be decreasing");
  GeneratorReport rep;
  const double target = apply_generator(setup, phi, x);
  const double phi_x = phi(x);
  const std::vector<Vec> xs{Vec(x.begin(), x.end())};
  for (double h : dts) {
    GeneratorRow row;
    row.dt = h;
    row.M = std::min<std::size_t>(max_M, std::max<std::size_t>(100, std::size_t(std::llround(m_scale / (h * h)))));
    Vec q(row.M);
    const double ts[] = {h};
    for_each_endpoint(setup, xs, ts, row.M, seed, [&](std::size_t, std::size_t, std::size_t p, std::span<const double> s) {
      q[p] = (phi(s) - phi_x) / h;
    });
    row.quotient = estimate_from_samples(q, seed);
    row.generator = target;
    row.error = std::abs(row.quotient.mean - target);
    if (!rep.rows.empty() && row.error > rep.rows.back().error) rep.decreasing = false;
    rep.rows.push_back(row);
  }
  for (std::size_t i = 1; i < rep.rows.size(); ++i) rep.error_ratios.push_back(rep.rows[i - 1].error / rep.rows[i].error);
  return rep;
}

Estimate directional_derivative_Pt(const SemigroupSetup& setup, const Observable& phi, std::span<const double> x,
                                   double t, std::span<const double> h, double fd_step, std::size_t M,
                                   std::uint64_t seed) {
  if (!(fd_step > 0.0)) throw std::invalid_argument("finite-difference step must be positive");
  const double hn = cm_norm(setup.pair, h);
  if (hn == 0.0) throw std::invalid_argument("direction must be non-zero");
  Vec plus(x.begin(), x.end()), minus(x.begin(), x.end());
  for (std::size_t k = 0; k < plus.size(); ++k) {
    plus[k] += fd_step * h[k] / hn;
    minus[k] -= fd_step * h[k] / hn;
  }
  const std::vector<Vec> xs{plus, minus};
  const double ts[] = {t};
  Vec vp(M), vm(M);
  for_each_endpoint(setup, xs, ts, M, seed, [&](std::size_t s, std::size_t, std::size_t p, std::span<const double> st) {
    (s == 0 ? vp : vm)[p] = phi(st);
  });
  Vec d(M);
  for (std::size_t p = 0; p < M; ++p) d[p] = (vp[p] - vm[p]) / (2.0 * fd_step);
  return estimate_from_samples(d, seed);
}

std::vector<Vec> sample_invariant(const SemigroupSetup& setup, double burn_in, std::size_t M, std::uint64_t seed) {
  const auto& pair = setup.pair;
  const std::size_t n = pair.dim();
  const NoisePlan start_plan = NoisePlan(seed, M).derived("invariant-start");
  std::vector<Vec> states(M, Vec(n));
  for (std::size_t p = 0; p < M; ++p) {
    start_plan.fill_normals(p, 0, states[p]);
    for (std::size_t k = 0; k < n; ++k) states[p][k] *= std::sqrt(pair.c()[k] / (2.0 * pair.a()[k]));
  }
  if (setup.drift.is_zero() || burn_in <= 0.0) return states;
  const TimeGrid grid = TimeGrid::with_max_step(burn_in, setup.dt);
  return evolve_states(pair, setup.drift, states, grid, NoisePlan(seed, M).derived("invariant-run"), setup.scheme);
}

GaussianProjection ou_projection(const OperatorPair& pair, std::span<const double> x, std::span<const double> d,
                                 double t) {
  if (!(t >= 0.0)) throw std::invalid_argument("time must be non-negative");
  GaussianProjection g;
  for (std::size_t k = 0; k < std::min(d.size(), pair.dim()); ++k) {
    const double a = pair.a()[k];
    g.mean += d[k] * std::exp(-a * t) * x[k];
    g.variance += d[k] * d[k] * pair.c()[k] * -std::expm1(-2.0 * a * t) / (2.0 * a);
  }
  return g;
}

double ou_cosine_moment(const OperatorPair& pair, std::span<const double> x, std::span<const double> d, double omega,
                        double theta, double t, int p) {
  const auto g = ou_projection(pair, x, d, t);
  const double mu = omega * g.mean + theta;
  const double s2 = omega * omega * g.variance;
  auto ecos = [&](double k) { return std::exp(-0.5 * k * k * s2) * std::cos(k * mu); };
  switch (p) {
    case 1:
      return ecos(1.0);
    case 2:
      return 0.5 * (1.0 + ecos(2.0));
    case 4:
      return (3.0 + 4.0 * ecos(2.0) + ecos(4.0)) / 8.0;
    default:
      throw std::invalid_argument("cosine moments available for p in {1, 2, 4}");
  }
}

}  // namespace harnack
