#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "harnack/linalg.hpp"
#include "harnack/spectral_model.hpp"

namespace harnack {

enum class DriftKind { zero, linear, composed, cubic, reaction_diffusion, yosida };

// Decreasing scalar nonlinearities for the reaction-diffusion drift.
enum class PhiKind { cubic, cubic_damped };

PhiKind parse_phi(const std::string& name);
std::string phi_name(PhiKind phi);

struct GrowthBound {
  double M = 1.0;
  int m = 1;
};

class Drift {
 public:
  static Drift zero();
  static Drift linear(double zeta);
  // F = C^{1/2} G with G(x)_k = L_G sin(x_k).
  static Drift composed(const OperatorPair& pair, double L_G);
  // F(x) = -kappa <u,x>^3 u + zeta_F x with |u| <= 1; truncations keep the leading entries of u.
  static Drift cubic_kernel(Vec u, double kappa, double zeta_F);
  // F(f) = phi(f) - (zeta_F/2) f^2 pointwise on the grid, projected on the first `modes` sine modes.
  static Drift reaction_diffusion(PhiKind phi, double zeta_F, std::size_t modes, std::size_t grid_size = 0);
  static Drift yosida_wrapped(const Drift& base, double delta);

  DriftKind kind() const noexcept;
  bool is_zero() const noexcept { return kind() == DriftKind::zero; }

  void eval_into(std::span<const double> x, std::span<double> out) const;
  Vec eval(std::span<const double> x) const;
  Vec jacobian_action(std::span<const double> x, std::span<const double> h) const;

  // Declared one-sided Lipschitz constant: <F(x)-F(y), x-y> <= zeta_F |x-y|^2.
  double zeta_F() const noexcept;
  std::optional<double> lipschitz_constant() const noexcept;
  double L_G() const noexcept;
  GrowthBound growth() const noexcept;
  // Norm entering the growth bound: grid sup-norm for reaction-diffusion, Euclidean otherwise.
  double e_norm(std::span<const double> y) const;
  // Dimension the drift is tied to, if any.
  std::optional<std::size_t> dim() const noexcept;
  std::string id() const;
  Drift truncated(std::size_t n) const;

  const Drift& base() const;
  double delta() const;

 private:
  struct Impl;
  explicit Drift(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}
  std::shared_ptr<const Impl> impl_;
};

struct ResolventOptions {
  int max_iterations = 200;
  double tolerance = 1e-10;
};

struct ResolventResult {
  Vec y;
  double residual = 0.0;
  int iterations = 0;
  bool fallback_used = false;
};

void check_delta_window(const Drift& drift, double delta);

// Solves y - delta (F(y) - zeta_F y) = x.
ResolventResult yosida_resolvent(const Drift& drift, double delta, std::span<const double> x,
                                 const ResolventOptions& options = {});

// F(J_delta(x)).
Vec yosida_drift(const Drift& drift, double delta, std::span<const double> x);

using PairSampler = std::function<std::pair<Vec, Vec>(std::size_t)>;

// Independent pairs with coordinates uniform in [-half_width, half_width].
PairSampler uniform_box_pairs(std::size_t dim, double half_width, std::uint64_t seed);

struct DissipativityReport {
  double max_violation = -std::numeric_limits<double>::infinity();
  std::size_t trials = 0;
  std::size_t failures = 0;
  bool passed = true;
};

DissipativityReport check_dissipativity(const Drift& drift, double zeta, const PairSampler& sampler,
                                        std::size_t trials);

struct YosidaRateRow {
  double delta = 0.0;
  double resolvent_gap = 0.0;
  double cji_bound = 0.0;
  double cji_literal_bound = 0.0;
  bool cji_ok = false;
  bool cji_literal_ok = false;
  double drift_gap = 0.0;
  double vy1_lhs = 0.0;
  double vy1_bound = 0.0;
  double vy1_literal_bound = 0.0;
  bool vy1_ok = false;
  bool vy1_literal_ok = false;
  double max_lip_quotient = 0.0;
  double lip_bound = 0.0;
  bool lip_ok = false;
};

struct YosidaRateReport {
  std::vector<YosidaRateRow> rows;
  bool drift_gap_monotone = true;
  bool all_ok = true;
};

YosidaRateReport check_yosida_rates(const Drift& drift, std::span<const double> y, std::span<const double> deltas,
                                    const PairSampler& sampler, std::size_t lipschitz_pairs);

// Random-probe sweep: probe i uses y = first sample, delta = deltas[i % size].
struct YosidaProbeReport {
  std::size_t probes = 0;
  std::size_t cji_violations = 0;
  std::size_t lip_violations = 0;
  double worst_cji_ratio = 0.0;
  double worst_lip_ratio = 0.0;
};

YosidaProbeReport probe_yosida_bounds(const Drift& drift, std::span<const double> deltas,
                                      const PairSampler& sampler, std::size_t probes);

}  // namespace harnack
