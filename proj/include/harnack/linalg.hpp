#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace harnack {

using Vec = std::vector<double>;

inline void require_same_size(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw std::invalid_argument("vector size mismatch");
}

inline double dot(std::span<const double> a, std::span<const double> b) {
  require_same_size(a, b);
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

inline double sup_norm(std::span<const double> a) {
  double m = 0.0;
  for (double v : a) m = std::max(m, std::abs(v));
  return m;
}

inline Vec add(std::span<const double> a, std::span<const double> b) {
  require_same_size(a, b);
  Vec r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] + b[i];
  return r;
}

inline Vec sub(std::span<const double> a, std::span<const double> b) {
  require_same_size(a, b);
  Vec r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] - b[i];
  return r;
}

inline Vec scaled(std::span<const double> a, double s) {
  Vec r(a.begin(), a.end());
  for (double& v : r) v *= s;
  return r;
}

// Zero-pads or checks that the dropped tail is zero.
inline Vec resized(std::span<const double> a, std::size_t n) {
  Vec r(n, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (i < n) {
      r[i] = a[i];
    } else if (a[i] != 0.0) {
      throw std::invalid_argument("vector has support beyond the truncation dimension");
    }
  }
  return r;
}

inline Vec unit_vector(std::size_t n, std::size_t k) {
  if (k >= n) throw std::invalid_argument("unit vector index out of range");
  Vec e(n, 0.0);
  e[k] = 1.0;
  return e;
}

}  // namespace harnack
