#include "harnack/sde.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <mutex>
#include <stdexcept>

#include "harnack/errors.hpp"

namespace harnack {

TimeGrid::TimeGrid(double t_end, std::size_t steps) : t_end_(t_end), steps_(steps) {
  if (!(t_end > 0.0) || !std::isfinite(t_end)) throw std::invalid_argument("time grid needs t_end > 0");
  if (steps == 0) throw std::invalid_argument("time grid needs at least one step");
}

TimeGrid TimeGrid::with_max_step(double t_end, double max_dt) {
  if (!(max_dt > 0.0)) throw std::invalid_argument("time step must be positive");
  const double r = t_end / max_dt;
  std::size_t steps = std::size_t(std::ceil(r - 1e-9 * r));
  return TimeGrid(t_end, std::max<std::size_t>(steps, 1));
}

std::size_t TimeGrid::index_of(double t) const {
  const double r = t / t_end_ * double(steps_);
  const double i = std::round(r);
  if (i < 0.0 || i > double(steps_) || std::abs(r - i) > 1e-9 * std::max(1.0, r))
    throw std::invalid_argument("time " + std::to_string(t) + " is not on the grid");
  return std::size_t(i);
}

std::string scheme_name(Scheme s) { return s == Scheme::exponential ? "exponential" : "drift_implicit"; }

Scheme parse_scheme(const std::string& name) {
  if (name == "exponential") return Scheme::exponential;
  if (name == "drift_implicit") return Scheme::drift_implicit;
  throw std::invalid_argument("unknown scheme '" + name + "'");
}

PathEnsemble::PathEnsemble(std::size_t paths, std::size_t dim, TimeGrid grid, std::vector<std::size_t> recorded,
                           Provenance provenance)
    : paths_(paths),
      dim_(dim),
      grid_(grid),
      recorded_(std::move(recorded)),
      provenance_(std::move(provenance)),
      states_(paths * recorded_.size() * dim, 0.0) {}

std::size_t PathEnsemble::slot_of_time(double t) const {
  const std::size_t idx = grid_.index_of(t);
  const auto it = std::find(recorded_.begin(), recorded_.end(), idx);
  if (it == recorded_.end()) throw std::invalid_argument("time " + std::to_string(t) + " was not recorded");
  return std::size_t(it - recorded_.begin());
}

Vec PathEnsemble::column(std::size_t slot, std::size_t mode) const {
  Vec v(paths_);
  for (std::size_t p = 0; p < paths_; ++p) v[p] = state(p, slot)[mode];
  return v;
}

StepCoefficients StepCoefficients::make(const OperatorPair& pair, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("time step must be positive");
  StepCoefficients s;
  const std::size_t n = pair.dim();
  s.decay.resize(n);
  s.psi.resize(n);
  s.noise_sd.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double a = pair.a()[k];
    s.decay[k] = std::exp(-a * dt);
    s.psi[k] = -std::expm1(-a * dt) / a;
    s.noise_sd[k] = std::sqrt(pair.c()[k] * -std::expm1(-2.0 * a * dt) / (2.0 * a));
  }
  return s;
}

Vec step_exponential(const OperatorPair& pair, const Drift& drift, std::span<const double> x, double dt,
                     std::span<const double> noise) {
  if (x.size() != pair.dim() || noise.size() != pair.dim())
    throw std::invalid_argument("vector dimension does not match the model");
  const auto s = StepCoefficients::make(pair, dt);
  const Vec f = drift.eval(x);
  Vec out(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) out[k] = s.decay[k] * x[k] + s.psi[k] * f[k] + s.noise_sd[k] * noise[k];
  return out;
}

std::vector<std::size_t> record_indices(const TimeGrid& grid, std::span<const double> times) {
  std::vector<std::size_t> idx;
  idx.reserve(times.size());
  for (double t : times) idx.push_back(grid.index_of(t));
  std::sort(idx.begin(), idx.end());
  idx.erase(std::unique(idx.begin(), idx.end()), idx.end());
  return idx;
}

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline void advance(const StepCoefficients& coef, const Drift& drift, Scheme scheme, double dt, bool zero,
                    Vec& x, Vec& f, const Vec& noise) {
  if (!zero) {
    if (scheme == Scheme::exponential) {
      drift.eval_into(x, f);
    } else {
      f = yosida_drift(drift, dt, x);
    }
  }
  for (std::size_t k = 0; k < x.size(); ++k) x[k] = coef.decay[k] * x[k] + coef.psi[k] * f[k] + coef.noise_sd[k] * noise[k];
}

bool all_finite(const Vec& x) {
  for (double v : x)
    if (!std::isfinite(v)) return false;
  return true;
}

struct Kernel {
  const OperatorPair& pair;
  const Drift& drift;
  std::span<const Vec> x0s;
  const TimeGrid& grid;
  const NoisePlan& plan;
  Scheme scheme;
  std::vector<std::size_t> record;
  StepCoefficients coef;

  Kernel(const OperatorPair& p, const Drift& d, std::span<const Vec> xs, const TimeGrid& g, const NoisePlan& pl,
         Scheme sc, std::vector<std::size_t> rec)
      : pair(p), drift(d), x0s(xs), grid(g), plan(pl), scheme(sc), record(std::move(rec)),
        coef(StepCoefficients::make(p, g.dt())) {
    if (x0s.empty()) throw std::invalid_argument("simulation needs at least one initial condition");
    for (const Vec& x : x0s)
      if (x.size() != pair.dim()) throw std::invalid_argument("initial condition dimension does not match the model");
    if (record.empty()) {
      record.resize(grid.steps() + 1);
      for (std::size_t i = 0; i <= grid.steps(); ++i) record[i] = i;
    }
    for (std::size_t i = 0; i < record.size(); ++i) {
      if (record[i] > grid.steps() || (i > 0 && record[i] <= record[i - 1]))
        throw std::invalid_argument("record indices must be increasing grid steps");
    }
    if (scheme == Scheme::drift_implicit) check_delta_window(drift, grid.dt());
  }

  std::vector<PathEnsemble> allocate(std::size_t paths) const {
    Provenance prov{pair.id(), drift.id(), scheme_name(scheme) + "(dt=" + fmt(grid.dt()) + ")", plan.seed()};
    std::vector<PathEnsemble> out;
    out.reserve(x0s.size());
    for (std::size_t s = 0; s < x0s.size(); ++s) out.emplace_back(paths, pair.dim(), grid, record, prov);
    return out;
  }

  // Simulates noise path p into row `row` of every ensemble. Returns false on a non-finite state.
  bool run_path(std::size_t p, std::vector<PathEnsemble>& out, std::size_t row) const {
    const std::size_t n = pair.dim();
    const std::size_t K = x0s.size();
    std::vector<Vec> xs(x0s.begin(), x0s.end());
    Vec noise(n), f(n, 0.0);
    std::size_t slot = 0;
    auto store = [&](std::size_t step) {
      if (slot < record.size() && record[slot] == step) {
        for (std::size_t s = 0; s < K; ++s) std::copy(xs[s].begin(), xs[s].end(), out[s].state(row, slot).begin());
        ++slot;
      }
    };
    store(0);
    const bool zero = drift.is_zero();
    const double dt = grid.dt();
    const std::size_t last = record.back();
    for (std::size_t i = 0; i < last; ++i) {
      plan.fill_normals(p, i, noise);
      for (std::size_t s = 0; s < K; ++s) advance(coef, drift, scheme, dt, zero, xs[s], f, noise);
      store(i + 1);
    }
    for (const Vec& x : xs)
      if (!all_finite(x)) return false;
    return true;
  }
};

}  // namespace

std::vector<PathEnsemble> simulate_batch(const OperatorPair& pair, const Drift& drift, std::span<const Vec> x0s,
                                         const TimeGrid& grid, const NoisePlan& plan, Scheme scheme,
                                         std::vector<std::size_t> record) {
  const Kernel kernel(pair, drift, x0s, grid, plan, scheme, std::move(record));
  auto out = kernel.allocate(plan.paths());
  const auto M = static_cast<std::ptrdiff_t>(plan.paths());
  std::mutex err_mutex;
  std::string error;
  bool nonfinite = false;
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t p = 0; p < M; ++p) {
    try {
      if (!kernel.run_path(std::size_t(p), out, std::size_t(p))) {
        std::lock_guard<std::mutex> lock(err_mutex);
        nonfinite = true;
      }
    } catch (const std::exception& e) {
      std::lock_guard<std::mutex> lock(err_mutex);
      if (error.empty()) error = e.what();
    }
  }
  if (!error.empty()) throw std::runtime_error("simulation aborted: " + error);
  if (nonfinite) throw std::runtime_error("simulation produced non-finite states");
  return out;
}

std::vector<PathEnsemble> simulate_batch_serial(const OperatorPair& pair, const Drift& drift,
                                                std::span<const Vec> x0s, const TimeGrid& grid,
                                                const NoisePlan& plan, Scheme scheme,
                                                std::vector<std::size_t> record) {
  const Kernel kernel(pair, drift, x0s, grid, plan, scheme, std::move(record));
  auto out = kernel.allocate(plan.paths());
  for (std::size_t p = 0; p < plan.paths(); ++p)
    if (!kernel.run_path(p, out, p)) throw std::runtime_error("simulation produced non-finite states");
  return out;
}

PathEnsemble simulate_ensemble(const OperatorPair& pair, const Drift& drift, std::span<const double> x0,
                               const TimeGrid& grid, const NoisePlan& plan, Scheme scheme,
                               std::vector<std::size_t> record) {
  const std::vector<Vec> x0s{Vec(x0.begin(), x0.end())};
  return std::move(simulate_batch(pair, drift, x0s, grid, plan, scheme, std::move(record)).front());
}

PathEnsemble simulate_ensemble_serial(const OperatorPair& pair, const Drift& drift, std::span<const double> x0,
                                      const TimeGrid& grid, const NoisePlan& plan, Scheme scheme,
                                      std::vector<std::size_t> record) {
  const std::vector<Vec> x0s{Vec(x0.begin(), x0.end())};
  return std::move(simulate_batch_serial(pair, drift, x0s, grid, plan, scheme, std::move(record)).front());
}

std::vector<Vec> evolve_states(const OperatorPair& pair, const Drift& drift, std::span<const Vec> starts,
                               const TimeGrid& grid, const NoisePlan& plan, Scheme scheme) {
  if (starts.size() != plan.paths()) throw std::invalid_argument("need one start per noise path");
  for (const Vec& x : starts)
    if (x.size() != pair.dim()) throw std::invalid_argument("initial condition dimension does not match the model");
  if (scheme == Scheme::drift_implicit) check_delta_window(drift, grid.dt());
  const auto coef = StepCoefficients::make(pair, grid.dt());
  std::vector<Vec> out(starts.begin(), starts.end());
  const auto M = static_cast<std::ptrdiff_t>(starts.size());
  const bool zero = drift.is_zero();
  std::mutex err_mutex;
  std::string error;
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t p = 0; p < M; ++p) {
    try {
      Vec noise(pair.dim()), f(pair.dim(), 0.0);
      Vec& x = out[std::size_t(p)];
      for (std::size_t i = 0; i < grid.steps(); ++i) {
        plan.fill_normals(std::size_t(p), i, noise);
        advance(coef, drift, scheme, grid.dt(), zero, x, f, noise);
      }
      if (!all_finite(x)) throw std::runtime_error("non-finite state");
    } catch (const std::exception& e) {
      std::lock_guard<std::mutex> lock(err_mutex);
      if (error.empty()) error = e.what();
    }
  }
  if (!error.empty()) throw std::runtime_error("simulation aborted: " + error);
  return out;
}

CoupledRatios coupled_paths(const OperatorPair& pair, const Drift& drift, std::span<const double> x,
                            std::span<const double> y, const TimeGrid& grid, const NoisePlan& plan,
                            std::size_t path, Scheme scheme) {
  const Vec d0 = sub(x, y);
  const double n0 = norm(d0);
  if (n0 == 0.0) throw std::invalid_argument("coupled paths need x != y");
  const double c0 = cm_norm(pair, d0);
  const std::vector<Vec> x0s{Vec(x.begin(), x.end()), Vec(y.begin(), y.end())};
  const Kernel kernel(pair, drift, x0s, grid, plan, scheme, {});
  auto ens = kernel.allocate(1);
  if (!kernel.run_path(path, ens, 0)) throw std::runtime_error("simulation produced non-finite states");
  CoupledRatios r;
  for (std::size_t slot = 0; slot < ens[0].slots(); ++slot) {
    Vec d = sub(ens[0].state(0, slot), ens[1].state(0, slot));
    r.times.push_back(ens[0].time(slot));
    r.norm_ratio.push_back(norm(d) / n0);
    r.cm_ratio.push_back(cm_norm(pair, d) / c0);
    r.difference.push_back(std::move(d));
  }
  return r;
}

ContractionCheck check_contraction(const CoupledRatios& r, double rate, bool cm, double tol) {
  ContractionCheck c;
  const Vec& ratio = cm ? r.cm_ratio : r.norm_ratio;
  for (std::size_t i = 0; i < ratio.size(); ++i) {
    const double bound = std::exp(rate * r.times[i]);
    const double excess = ratio[i] / bound - 1.0;
    c.worst_excess = std::max(c.worst_excess, excess);
    if (excess > tol) c.passed = false;
  }
  return c;
}

VariationalResult variational_flow(const OperatorPair& pair, const Drift& drift, const PathEnsemble& base,
                                   std::size_t path, std::span<const double> y0) {
  const TimeGrid& grid = base.grid();
  if (base.slots() != grid.steps() + 1) throw std::invalid_argument("variational flow needs every grid time recorded");
  if (path >= base.paths()) throw std::invalid_argument("path index out of range");
  if (y0.size() != pair.dim() || base.dim() != pair.dim())
    throw std::invalid_argument("vector dimension does not match the model");
  const double n0 = norm(y0);
  const double c0 = cm_norm(pair, y0);
  if (n0 == 0.0) throw std::invalid_argument("variational flow needs y0 != 0");
  const auto coef = StepCoefficients::make(pair, grid.dt());
  const double dt = grid.dt();
  VariationalResult r;
  Vec Y(y0.begin(), y0.end());
  for (std::size_t i = 0; i <= grid.steps(); ++i) {
    r.times.push_back(grid.time(i));
    r.norm_ratio.push_back(norm(Y) / n0);
    r.cm_ratio.push_back(cm_norm(pair, Y) / c0);
    r.sup_norm_ratio = std::max(r.sup_norm_ratio, r.norm_ratio.back());
    r.sup_cm_ratio = std::max(r.sup_cm_ratio, r.cm_ratio.back());
    r.Y.push_back(Y);
    if (i == grid.steps()) break;
    const Vec dfy = drift.jacobian_action(base.state(path, i), Y);
    for (std::size_t k = 0; k < Y.size(); ++k) Y[k] = coef.decay[k] * (Y[k] + dt * dfy[k]);
  }
  return r;
}

Vec ou_exact_sample(const OperatorPair& pair, std::span<const double> x0, double t, const NoisePlan& plan,
                    std::size_t path) {
  if (!(t >= 0.0)) throw std::invalid_argument("OU sample time must be non-negative");
  if (x0.size() != pair.dim()) throw std::invalid_argument("vector dimension does not match the model");
  Vec out(x0.size());
  if (t == 0.0) {
    std::copy(x0.begin(), x0.end(), out.begin());
    return out;
  }
  Vec z(x0.size());
  plan.fill_normals(path, 0, z);
  for (std::size_t k = 0; k < x0.size(); ++k) {
    const double a = pair.a()[k];
    const double sd = std::sqrt(pair.c()[k] * -std::expm1(-2.0 * a * t) / (2.0 * a));
    out[k] = std::exp(-a * t) * x0[k] + sd * z[k];
  }
  return out;
}

}  // namespace harnack
