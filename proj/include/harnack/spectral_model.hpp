#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "harnack/linalg.hpp"

namespace harnack {

enum class SpectrumKind { dirichlet, explicit_list };

// Eigenvalues of Q, non-increasing and positive. Storage is 0-based: values()[0] is lambda_1.
class Spectrum {
 public:
  explicit Spectrum(std::vector<double> lambda, SpectrumKind kind = SpectrumKind::explicit_list);

  static Spectrum dirichlet(std::size_t n);

  std::size_t size() const noexcept { return lambda_.size(); }
  double operator[](std::size_t k) const { return lambda_.at(k); }
  std::span<const double> values() const noexcept { return lambda_; }
  SpectrumKind kind() const noexcept { return kind_; }
  Spectrum truncated(std::size_t n) const;

 private:
  std::vector<double> lambda_;
  SpectrumKind kind_;
};

inline Spectrum dirichlet_spectrum(std::size_t n) { return Spectrum::dirichlet(n); }

// A = -1/2 Q^{-beta}, C = Q^{2 alpha}, both diagonal in the eigenbasis of Q.
class OperatorPair {
 public:
  OperatorPair(Spectrum spectrum, double alpha, double beta);

  const Spectrum& spectrum() const noexcept { return spectrum_; }
  double alpha() const noexcept { return alpha_; }
  double beta() const noexcept { return beta_; }
  std::span<const double> a() const noexcept { return a_; }
  std::span<const double> c() const noexcept { return c_; }
  std::size_t dim() const noexcept { return a_.size(); }

  double a1() const noexcept { return a_[0]; }
  double zeta_A() const noexcept { return -a_[0]; }
  // Operator norm of C^{1/2}, i.e. lambda_1^alpha.
  double sqrt_c_norm() const noexcept;

  OperatorPair truncated(std::size_t n) const;
  std::string id() const;
  std::uint64_t hash() const;

 private:
  Spectrum spectrum_;
  double alpha_;
  double beta_;
  Vec a_;
  Vec c_;
};

inline OperatorPair build_pair(Spectrum spectrum, double alpha, double beta) {
  return OperatorPair(std::move(spectrum), alpha, beta);
}

Vec semigroup_apply(const OperatorPair& pair, double t, std::span<const double> x);

double cm_inner(const OperatorPair& pair, std::span<const double> h1, std::span<const double> h2);
double cm_norm(const OperatorPair& pair, std::span<const double> h);

// <Ax, x> and [Ax, x]_C.
double generator_form(const OperatorPair& pair, std::span<const double> x);
double generator_form_cm(const OperatorPair& pair, std::span<const double> x);

// Moves h along mode k to unit Cameron-Martin norm: sqrt(c_k) e_k.
Vec cm_unit_vector(const OperatorPair& pair, std::size_t k);

struct SmoothingConstants {
  double gamma;
  double K;
};

SmoothingConstants smoothing_constants(const OperatorPair& pair);

// lambda_k^{-alpha} e^{-a_k t} t^gamma, the quantity bounded by K.
double smoothing_ratio(const OperatorPair& pair, double t, std::size_t k);

enum class K1Case { smoothing, composed };

struct ModelConstants {
  double gamma = 0.0;
  double K = 1.0;
  double K1 = 1.0;
  double zeta_A = 0.0;
  double zeta_F = 0.0;
  // zeta_A + zeta_F; negative means decay.
  double zeta_X = 0.0;
  // Positive-means-decay rate used by the Lipschitz-case bounds.
  double zeta_X_lipschitz = 0.0;
  double L_F = 0.0;
  double L_G = 0.0;
  double M = 1.0;
  int m = 1;
  double delta = 0.0;
  double eta = 0.5;
};

double harnack_K1(K1Case which, const ModelConstants& consts, const OperatorPair& pair);

struct TraceReport {
  double value;
  double per_mode_tail;
};

TraceReport trace_condition(const OperatorPair& pair, double T, double eta);

double exp_integrability_threshold(const OperatorPair& pair);

// Closed-form double Gaussian integral of exp(eps ||x - y||_C^2); +inf at or above the threshold.
double exp_integrability_value(const OperatorPair& pair, double eps);

}  // namespace harnack
