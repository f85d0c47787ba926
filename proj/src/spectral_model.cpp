#include "harnack/spectral_model.hpp"

#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "harnack/errors.hpp"

namespace harnack {

namespace {

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace

Spectrum::Spectrum(std::vector<double> lambda, SpectrumKind kind) : lambda_(std::move(lambda)), kind_(kind) {
  if (lambda_.empty()) throw std::invalid_argument("spectrum needs at least one eigenvalue");
  for (std::size_t k = 0; k < lambda_.size(); ++k) {
    if (!(lambda_[k] > 0.0) || !std::isfinite(lambda_[k]))
      throw std::invalid_argument("eigenvalues must be positive and finite");
    if (k > 0 && lambda_[k] > lambda_[k - 1])
      throw std::invalid_argument("eigenvalues must be non-increasing");
  }
}

Spectrum Spectrum::dirichlet(std::size_t n) {
  if (n == 0) throw std::invalid_argument("dirichlet spectrum needs n >= 1");
  std::vector<double> lambda(n);
  const double pi2 = std::numbers::pi * std::numbers::pi;
  for (std::size_t k = 1; k <= n; ++k) lambda[k - 1] = 1.0 / (pi2 * double(k) * double(k));
  return Spectrum(std::move(lambda), SpectrumKind::dirichlet);
}

Spectrum Spectrum::truncated(std::size_t n) const {
  if (n == 0 || n > lambda_.size()) throw std::invalid_argument("truncation dimension out of range");
  return Spectrum(std::vector<double>(lambda_.begin(), lambda_.begin() + std::ptrdiff_t(n)), kind_);
}

OperatorPair::OperatorPair(Spectrum spectrum, double alpha, double beta)
    : spectrum_(std::move(spectrum)), alpha_(alpha), beta_(beta) {
  if (!std::isfinite(alpha) || !std::isfinite(beta) || alpha < 0.0 || beta < 0.0)
    throw std::invalid_argument("alpha and beta must be finite and non-negative");
  const auto lam = spectrum_.values();
  a_.resize(lam.size());
  c_.resize(lam.size());
  for (std::size_t k = 0; k < lam.size(); ++k) {
    a_[k] = 0.5 * std::pow(lam[k], -beta);
    c_[k] = std::pow(lam[k], 2.0 * alpha);
  }
}

double OperatorPair::sqrt_c_norm() const noexcept { return std::pow(spectrum_[0], alpha_); }

OperatorPair OperatorPair::truncated(std::size_t n) const {
  return OperatorPair(spectrum_.truncated(n), alpha_, beta_);
}

std::string OperatorPair::id() const {
  char buf[160];
  std::snprintf(buf, sizeof buf, "%s(n=%zu,alpha=%.17g,beta=%.17g)",
                spectrum_.kind() == SpectrumKind::dirichlet ? "dirichlet" : "explicit", dim(), alpha_, beta_);
  std::string s = buf;
  if (spectrum_.kind() == SpectrumKind::explicit_list) {
    char h[32];
    std::string lam;
    for (double v : spectrum_.values()) {
      std::snprintf(h, sizeof h, "%.17g,", v);
      lam += h;
    }
    std::snprintf(h, sizeof h, "#%016llx", static_cast<unsigned long long>(fnv1a(lam)));
    s += h;
  }
  return s;
}

std::uint64_t OperatorPair::hash() const {
  std::string s = id();
  char buf[32];
  for (double v : spectrum_.values()) {
    std::snprintf(buf, sizeof buf, ",%.17g", v);
    s += buf;
  }
  return fnv1a(s);
}

Vec semigroup_apply(const OperatorPair& pair, double t, std::span<const double> x) {
  if (!(t >= 0.0)) throw std::invalid_argument("semigroup time must be non-negative");
  if (x.size() != pair.dim()) throw std::invalid_argument("vector dimension does not match the model");
  Vec r(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) r[k] = std::exp(-pair.a()[k] * t) * x[k];
  return r;
}

double cm_inner(const OperatorPair& pair, std::span<const double> h1, std::span<const double> h2) {
  if (h1.size() != pair.dim() || h2.size() != pair.dim())
    throw std::invalid_argument("vector dimension does not match the model");
  double s = 0.0;
  for (std::size_t k = 0; k < h1.size(); ++k) s += h1[k] * h2[k] / pair.c()[k];
  return s;
}

double cm_norm(const OperatorPair& pair, std::span<const double> h) { return std::sqrt(cm_inner(pair, h, h)); }

double generator_form(const OperatorPair& pair, std::span<const double> x) {
  if (x.size() != pair.dim()) throw std::invalid_argument("vector dimension does not match the model");
  double s = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) s -= pair.a()[k] * x[k] * x[k];
  return s;
}

double generator_form_cm(const OperatorPair& pair, std::span<const double> x) {
  if (x.size() != pair.dim()) throw std::invalid_argument("vector dimension does not match the model");
  double s = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) s -= pair.a()[k] * x[k] * x[k] / pair.c()[k];
  return s;
}

Vec cm_unit_vector(const OperatorPair& pair, std::size_t k) {
  Vec e = unit_vector(pair.dim(), k);
  e[k] = std::sqrt(pair.c()[k]);
  return e;
}

SmoothingConstants smoothing_constants(const OperatorPair& pair) {
  const double alpha = pair.alpha();
  const double beta = pair.beta();
  if (!(beta > 0.0)) throw UnsupportedRegime("smoothing constants need beta > 0");
  if (alpha >= beta) throw UnsupportedRegime("smoothing constants need alpha < beta");
  if (alpha == 0.0) return {0.0, 1.0};
  const double gamma = alpha / beta;
  return {gamma, std::pow(2.0 * alpha / (std::numbers::e * beta), gamma)};
}

double smoothing_ratio(const OperatorPair& pair, double t, std::size_t k) {
  const auto sc = smoothing_constants(pair);
  const double lam = pair.spectrum()[k];
  return std::pow(lam, -pair.alpha()) * std::exp(-pair.a()[k] * t) * std::pow(t, sc.gamma);
}

double harnack_K1(K1Case which, const ModelConstants& consts, const OperatorPair& pair) {
  if (!(consts.zeta_X_lipschitz > 0.0))
    throw std::invalid_argument("Lipschitz-case constants need a positive decay rate zeta_X");
  const double cnorm = pair.sqrt_c_norm();
  switch (which) {
    case K1Case::smoothing:
      if (!(consts.gamma < 1.0)) throw std::invalid_argument("smoothing case needs gamma < 1");
      return 1.0 + consts.K * consts.L_F * cnorm * (1.0 / (1.0 - consts.gamma) + 1.0 / consts.zeta_X_lipschitz);
    case K1Case::composed:
      return 1.0 + consts.L_G * cnorm / consts.zeta_X_lipschitz;
  }
  throw std::invalid_argument("unknown K1 case");
}

TraceReport trace_condition(const OperatorPair& pair, double T, double eta) {
  if (!(eta > 0.0 && eta < 1.0)) throw std::invalid_argument("eta must lie in (0,1)");
  if (!(T > 0.0)) throw std::invalid_argument("T must be positive");
  double value = 0.0;
  for (std::size_t k = 0; k < pair.dim(); ++k) {
    const double two_a = 2.0 * pair.a()[k];
    value += pair.c()[k] * std::pow(two_a, eta - 1.0) * boost::math::tgamma_lower(1.0 - eta, two_a * T);
  }
  double tail = 0.0;
  if (pair.spectrum().kind() == SpectrumKind::dirichlet) {
    // Mode k beyond n contributes at most c_k (2 a_k)^{eta-1} Gamma(1-eta) = G * k^{-q}.
    const double pi2 = std::numbers::pi * std::numbers::pi;
    const double alpha = pair.alpha();
    const double beta = pair.beta();
    const double q = 2.0 * (2.0 * alpha + beta * (1.0 - eta));
    const double G = std::tgamma(1.0 - eta) * std::pow(pi2, -2.0 * alpha) * std::pow(std::pow(pi2, beta), eta - 1.0);
    const double n = double(pair.dim());
    tail = q > 1.0 ? G * std::pow(n, 1.0 - q) / (q - 1.0) : std::numeric_limits<double>::infinity();
  }
  return {value, tail};
}

double exp_integrability_threshold(const OperatorPair& pair) { return 0.5 * pair.a1(); }

double exp_integrability_value(const OperatorPair& pair, double eps) {
  if (eps >= exp_integrability_threshold(pair)) return std::numeric_limits<double>::infinity();
  double log_v = 0.0;
  for (double a : pair.a()) log_v += -0.5 * std::log1p(-2.0 * eps / a);
  return std::exp(log_v);
}

}  // namespace harnack
