#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "harnack/drift.hpp"
#include "harnack/linalg.hpp"
#include "harnack/rng.hpp"
#include "harnack/spectral_model.hpp"

namespace harnack {

class TimeGrid {
 public:
  TimeGrid(double t_end, std::size_t steps);
  // Smallest uniform grid on [0, t_end] with spacing at most max_dt.
  static TimeGrid with_max_step(double t_end, double max_dt);

  double t_end() const noexcept { return t_end_; }
  std::size_t steps() const noexcept { return steps_; }
  double dt() const noexcept { return t_end_ / double(steps_); }
  double time(std::size_t i) const noexcept { return t_end_ * double(i) / double(steps_); }
  // Step index of t; throws if t is not a grid point.
  std::size_t index_of(double t) const;

 private:
  double t_end_;
  std::size_t steps_;
};

enum class Scheme { exponential, drift_implicit };

std::string scheme_name(Scheme s);
Scheme parse_scheme(const std::string& name);

struct Provenance {
  std::string model_id;
  std::string drift_id;
  std::string scheme_id;
  std::uint64_t seed = 0;
};

// M paths x recorded slots x n modes, stored path-major.
class PathEnsemble {
 public:
  PathEnsemble(std::size_t paths, std::size_t dim, TimeGrid grid, std::vector<std::size_t> recorded,
               Provenance provenance);

  std::size_t paths() const noexcept { return paths_; }
  std::size_t dim() const noexcept { return dim_; }
  const TimeGrid& grid() const noexcept { return grid_; }
  const std::vector<std::size_t>& recorded() const noexcept { return recorded_; }
  std::size_t slots() const noexcept { return recorded_.size(); }
  const Provenance& provenance() const noexcept { return provenance_; }

  double time(std::size_t slot) const { return grid_.time(recorded_.at(slot)); }
  std::size_t slot_of_time(double t) const;

  std::span<double> state(std::size_t path, std::size_t slot) noexcept {
    return {states_.data() + (path * recorded_.size() + slot) * dim_, dim_};
  }
  std::span<const double> state(std::size_t path, std::size_t slot) const noexcept {
    return {states_.data() + (path * recorded_.size() + slot) * dim_, dim_};
  }
  std::span<const double> endpoint(std::size_t path) const noexcept { return state(path, slots() - 1); }
  Vec column(std::size_t slot, std::size_t mode) const;
  const Vec& raw() const noexcept { return states_; }

 private:
  std::size_t paths_;
  std::size_t dim_;
  TimeGrid grid_;
  std::vector<std::size_t> recorded_;
  Provenance provenance_;
  Vec states_;
};

struct StepCoefficients {
  Vec decay;
  Vec psi;
  Vec noise_sd;

  static StepCoefficients make(const OperatorPair& pair, double dt);
};

// One exponential step; `noise` holds standard normals, scaled here by the exact OU increment law.
Vec step_exponential(const OperatorPair& pair, const Drift& drift, std::span<const double> x, double dt,
                     std::span<const double> noise);

std::vector<std::size_t> record_indices(const TimeGrid& grid, std::span<const double> times);

// Simulates every initial condition under the same noise (common random numbers).
// `record` lists step indices to keep; empty keeps all of them.
std::vector<PathEnsemble> simulate_batch(const OperatorPair& pair, const Drift& drift, std::span<const Vec> x0s,
                                         const TimeGrid& grid, const NoisePlan& plan, Scheme scheme,
                                         std::vector<std::size_t> record = {});

// Single-threaded reference producing bit-identical output.
std::vector<PathEnsemble> simulate_batch_serial(const OperatorPair& pair, const Drift& drift,
                                                std::span<const Vec> x0s, const TimeGrid& grid,
                                                const NoisePlan& plan, Scheme scheme,
                                                std::vector<std::size_t> record = {});

PathEnsemble simulate_ensemble(const OperatorPair& pair, const Drift& drift, std::span<const double> x0,
                               const TimeGrid& grid, const NoisePlan& plan, Scheme scheme = Scheme::exponential,
                               std::vector<std::size_t> record = {});

PathEnsemble simulate_ensemble_serial(const OperatorPair& pair, const Drift& drift, std::span<const double> x0,
                                      const TimeGrid& grid, const NoisePlan& plan,
                                      Scheme scheme = Scheme::exponential, std::vector<std::size_t> record = {});

// Path p starts from starts[p] and uses noise path p; returns the states at the end of the grid.
std::vector<Vec> evolve_states(const OperatorPair& pair, const Drift& drift, std::span<const Vec> starts,
                               const TimeGrid& grid, const NoisePlan& plan, Scheme scheme = Scheme::exponential);

struct CoupledRatios {
  Vec times;
  Vec norm_ratio;
  Vec cm_ratio;
  // Raw difference path X(t,x) - X(t,y), one entry per grid time.
  std::vector<Vec> difference;
};

CoupledRatios coupled_paths(const OperatorPair& pair, const Drift& drift, std::span<const double> x,
                            std::span<const double> y, const TimeGrid& grid, const NoisePlan& plan,
                            std::size_t path = 0, Scheme scheme = Scheme::exponential);

struct ContractionCheck {
  double worst_excess = 0.0;
  bool passed = true;
};

// ratio(t) <= e^{rate t} (1 + tol) at every grid time.
ContractionCheck check_contraction(const CoupledRatios& r, double rate, bool cm, double tol);

struct VariationalResult {
  Vec times;
  std::vector<Vec> Y;
  Vec norm_ratio;
  Vec cm_ratio;
  double sup_norm_ratio = 0.0;
  double sup_cm_ratio = 0.0;
};

// Integrating-factor Euler for dY = [A + DF(X(t))] Y dt along a recorded path.
VariationalResult variational_flow(const OperatorPair& pair, const Drift& drift, const PathEnsemble& base,
                                   std::size_t path, std::span<const double> y0);

Vec ou_exact_sample(const OperatorPair& pair, std::span<const double> x0, double t, const NoisePlan& plan,
                    std::size_t path = 0);

}  // namespace harnack
