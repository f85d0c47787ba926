#include "harnack/observable.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

namespace harnack {

std::string observable_kind_name(ObservableKind kind) {
  switch (kind) {
    case ObservableKind::cosine:
      return "cosine";
    case ObservableKind::tanh:
      return "tanh";
    case ObservableKind::product_sigmoid:
      return "product_sigmoid";
    case ObservableKind::floor_shifted:
      return "floor_shifted";
    case ObservableKind::linear:
      return "linear";
    case ObservableKind::quadratic:
      return "quadratic";
    case ObservableKind::sign:
      return "sign";
  }
  return "unknown";
}

ObservableKind parse_observable_kind(const std::string& name) {
  for (auto k : {ObservableKind::cosine, ObservableKind::tanh, ObservableKind::product_sigmoid,
                 ObservableKind::floor_shifted, ObservableKind::linear, ObservableKind::quadratic,
                 ObservableKind::sign})
    if (observable_kind_name(k) == name) return k;
  throw std::invalid_argument("unknown observable kind '" + name + "'");
}

namespace {

double ridge_dot(std::span<const double> d, std::span<const double> x) {
  const std::size_t n = std::min(d.size(), x.size());
  double s = 0.0;
  for (std::size_t k = 0; k < n; ++k) s += d[k] * x[k];
  for (std::size_t k = n; k < d.size(); ++k)
    if (d[k] != 0.0) throw std::invalid_argument("observable direction reaches beyond the state dimension");
  return s;
}

double sigmoid(double s) { return s >= 0.0 ? 1.0 / (1.0 + std::exp(-s)) : std::exp(s) / (1.0 + std::exp(s)); }

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

Observable::Observable(ObservableKind kind, std::vector<Ridge> ridges, double amplitude, double offset, double floor)
    : kind_(kind), ridges_(std::move(ridges)), amplitude_(amplitude), offset_(offset), floor_(floor) {
  for (const Ridge& r : ridges_)
    if (!std::isfinite(r.omega) || !std::isfinite(r.theta)) throw std::invalid_argument("observable parameters must be finite");
  if (!std::isfinite(amplitude) || !std::isfinite(offset)) throw std::invalid_argument("observable parameters must be finite");
}

Observable Observable::cosine(Vec direction, double omega, double phase, double amplitude, double offset) {
  return Observable(ObservableKind::cosine, {Ridge{std::move(direction), omega, phase}}, amplitude, offset, 0.0);
}

Observable Observable::tanh(Vec direction, double omega, double center, double amplitude, double offset) {
  return Observable(ObservableKind::tanh, {Ridge{std::move(direction), omega, 0.0 - omega * center}}, amplitude, offset, 0.0);
}

Observable Observable::product_sigmoid(std::vector<Vec> directions, Vec omegas, Vec centers, double amplitude,
                                       double offset) {
  if (directions.empty() || directions.size() != omegas.size() || directions.size() != centers.size())
    throw std::invalid_argument("product_sigmoid needs matching directions, omegas and centers");
  std::vector<Ridge> ridges;
  for (std::size_t i = 0; i < directions.size(); ++i)
    ridges.push_back({std::move(directions[i]), omegas[i], 0.0 - omegas[i] * centers[i]});
  return Observable(ObservableKind::product_sigmoid, std::move(ridges), amplitude, offset, 0.0);
}

Observable Observable::floor_shifted(Vec direction, double omega, double phase, double amplitude, double offset,
                                     double floor) {
  if (!(floor > 0.0)) throw std::invalid_argument("floor must be positive");
  return Observable(ObservableKind::floor_shifted, {Ridge{std::move(direction), omega, phase}}, amplitude, offset,
                    floor);
}

Observable Observable::linear(Vec direction, double scale, double offset) {
  return Observable(ObservableKind::linear, {Ridge{std::move(direction), 1.0, 0.0}}, scale, offset, 0.0);
}

Observable Observable::quadratic(Vec direction, double scale, double offset) {
  return Observable(ObservableKind::quadratic, {Ridge{std::move(direction), 1.0, 0.0}}, scale, offset, 0.0);
}

Observable Observable::constant(double value) { return cosine(Vec{}, 0.0, 0.0, 0.0, value); }

Observable Observable::sign(Vec direction, double center, double amplitude, double offset) {
  return Observable(ObservableKind::sign, {Ridge{std::move(direction), 1.0, 0.0 - center}}, amplitude, offset, 0.0);
}

Vec Observable::ridge_values(std::span<const double> x) const {
  Vec s(ridges_.size());
  for (std::size_t i = 0; i < ridges_.size(); ++i) s[i] = ridges_[i].omega * ridge_dot(ridges_[i].direction, x) + ridges_[i].theta;
  return s;
}

double Observable::profile(std::span<const double> s) const {
  switch (kind_) {
    case ObservableKind::cosine:
    case ObservableKind::floor_shifted:
      return std::cos(s[0]);
    case ObservableKind::tanh:
      return std::tanh(s[0]);
    case ObservableKind::product_sigmoid: {
      double g = 1.0;
      for (double v : s) g *= sigmoid(v);
      return g;
    }
    case ObservableKind::linear:
      return s[0];
    case ObservableKind::quadratic:
      return s[0] * s[0];
    case ObservableKind::sign:
      return double(s[0] > 0.0) - double(s[0] < 0.0);
  }
  return 0.0;
}

void Observable::profile_derivatives(std::span<const double> s, Vec& d1, Vec& d2) const {
  const std::size_t m = s.size();
  d1.assign(m, 0.0);
  d2.assign(m * m, 0.0);
  switch (kind_) {
    case ObservableKind::cosine:
    case ObservableKind::floor_shifted:
      d1[0] = -std::sin(s[0]);
      d2[0] = -std::cos(s[0]);
      return;
    case ObservableKind::tanh: {
      const double th = std::tanh(s[0]);
      d1[0] = 1.0 - th * th;
      d2[0] = -2.0 * th * (1.0 - th * th);
      return;
    }
    case ObservableKind::product_sigmoid: {
      double g = 1.0;
      Vec sig(m);
      for (std::size_t i = 0; i < m; ++i) {
        sig[i] = sigmoid(s[i]);
        g *= sig[i];
      }
      for (std::size_t i = 0; i < m; ++i) {
        d1[i] = g * (1.0 - sig[i]);
        for (std::size_t j = 0; j < m; ++j)
          d2[i * m + j] = i == j ? g * (1.0 - sig[i]) * (1.0 - 2.0 * sig[i]) : g * (1.0 - sig[i]) * (1.0 - sig[j]);
      }
      return;
    }
    case ObservableKind::linear:
      d1[0] = 1.0;
      return;
    case ObservableKind::quadratic:
      d1[0] = 2.0 * s[0];
      d2[0] = 2.0;
      return;
    case ObservableKind::sign:
      return;
  }
}

bool Observable::floored_at(std::span<const double> s) const {
  return kind_ == ObservableKind::floor_shifted && offset_ + amplitude_ * profile(s) < floor_;
}

double Observable::operator()(std::span<const double> x) const {
  if (ridges_.empty() || amplitude_ == 0.0) return offset_;
  const Vec s = ridge_values(x);
  const double v = offset_ + amplitude_ * profile(s);
  return kind_ == ObservableKind::floor_shifted ? std::max(v, floor_) : v;
}

Vec Observable::gradient(std::span<const double> x) const {
  Vec g(x.size(), 0.0);
  if (ridges_.empty() || amplitude_ == 0.0) return g;
  const Vec s = ridge_values(x);
  if (floored_at(s)) return g;
  Vec d1, d2;
  profile_derivatives(s, d1, d2);
  for (std::size_t i = 0; i < ridges_.size(); ++i) {
    const double w = amplitude_ * d1[i] * ridges_[i].omega;
    const Vec& d = ridges_[i].direction;
    for (std::size_t k = 0; k < std::min(d.size(), x.size()); ++k) g[k] += w * d[k];
  }
  return g;
}

double Observable::cm_gradient_norm(const OperatorPair& pair, std::span<const double> x) const {
  if (x.size() != pair.dim()) throw std::invalid_argument("vector dimension does not match the model");
  const Vec g = gradient(x);
  double s = 0.0;
  for (std::size_t k = 0; k < g.size(); ++k) s += pair.c()[k] * g[k] * g[k];
  return std::sqrt(s);
}

double Observable::trace_c_hessian(const OperatorPair& pair, std::span<const double> x) const {
  if (x.size() != pair.dim()) throw std::invalid_argument("vector dimension does not match the model");
  if (ridges_.empty() || amplitude_ == 0.0) return 0.0;
  const Vec s = ridge_values(x);
  if (floored_at(s)) return 0.0;
  Vec d1, d2;
  profile_derivatives(s, d1, d2);
  const std::size_t m = ridges_.size();
  double tr = 0.0;
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j) {
      const Vec& di = ridges_[i].direction;
      const Vec& dj = ridges_[j].direction;
      double cij = 0.0;
      for (std::size_t k = 0; k < std::min({di.size(), dj.size(), x.size()}); ++k) cij += pair.c()[k] * di[k] * dj[k];
      tr += d2[i * m + j] * ridges_[i].omega * ridges_[j].omega * cij;
    }
  return amplitude_ * tr;
}

bool Observable::bounded() const noexcept {
  return kind_ != ObservableKind::linear && kind_ != ObservableKind::quadratic;
}

double Observable::sup_abs() const noexcept {
  if (ridges_.empty() || amplitude_ == 0.0) return std::abs(offset_);
  if (!bounded()) return std::numeric_limits<double>::infinity();
  const double s = std::abs(offset_) + std::abs(amplitude_);
  return kind_ == ObservableKind::floor_shifted ? std::max(s, floor_) : s;
}

double Observable::inf_value() const noexcept {
  if (ridges_.empty() || amplitude_ == 0.0) return offset_;
  switch (kind_) {
    case ObservableKind::cosine:
    case ObservableKind::tanh:
    case ObservableKind::sign:
      return offset_ - std::abs(amplitude_);
    case ObservableKind::product_sigmoid:
      return amplitude_ > 0.0 ? offset_ : offset_ + amplitude_;
    case ObservableKind::floor_shifted:
      return std::max(floor_, offset_ - std::abs(amplitude_));
    case ObservableKind::linear:
      return -std::numeric_limits<double>::infinity();
    case ObservableKind::quadratic:
      return amplitude_ >= 0.0 ? offset_ : -std::numeric_limits<double>::infinity();
  }
  return 0.0;
}

std::size_t Observable::support() const noexcept {
  std::size_t top = 0;
  for (const Ridge& r : ridges_)
    for (std::size_t k = 0; k < r.direction.size(); ++k)
      if (r.direction[k] != 0.0) top = std::max(top, k + 1);
  return top;
}

std::string Observable::id() const {
  std::string s = observable_kind_name(kind_) + "(amp=" + fmt(amplitude_) + ",offset=" + fmt(offset_);
  if (kind_ == ObservableKind::floor_shifted) s += ",floor=" + fmt(floor_);
  for (const Ridge& r : ridges_) {
    s += ",ridge[omega=" + fmt(r.omega) + ",theta=" + fmt(r.theta) + ",d=";
    for (std::size_t k = 0; k < r.direction.size(); ++k) s += (k ? ":" : "") + fmt(r.direction[k]);
    s += "]";
  }
  return s + ")";
}

}  // namespace harnack
