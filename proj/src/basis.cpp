#include "harnack/basis.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace harnack {

BasisTransform::BasisTransform(std::size_t modes, std::size_t grid_size) : modes_(modes), grid_(grid_size) {
  if (modes == 0) throw std::invalid_argument("basis needs at least one mode");
  if (grid_size < modes) throw std::invalid_argument("grid must have at least as many points as modes");
  table_.resize(modes * grid_size);
  for (std::size_t j = 0; j < grid_; ++j)
    for (std::size_t k = 0; k < modes_; ++k)
      table_[j * modes_ + k] = std::numbers::sqrt2 * std::sin(double(k + 1) * std::numbers::pi * point(j));
}

void BasisTransform::to_grid(std::span<const double> coeffs, std::span<double> values) const {
  if (coeffs.size() != modes_ || values.size() != grid_) throw std::invalid_argument("basis size mismatch");
  for (std::size_t j = 0; j < grid_; ++j) {
    const double* row = &table_[j * modes_];
    double s = 0.0;
    for (std::size_t k = 0; k < modes_; ++k) s += row[k] * coeffs[k];
    values[j] = s;
  }
}

void BasisTransform::to_spectral(std::span<const double> values, std::span<double> coeffs) const {
  if (coeffs.size() != modes_ || values.size() != grid_) throw std::invalid_argument("basis size mismatch");
  const double w = 1.0 / double(grid_ + 1);
  for (std::size_t k = 0; k < modes_; ++k) coeffs[k] = 0.0;
  for (std::size_t j = 0; j < grid_; ++j) {
    const double* row = &table_[j * modes_];
    const double v = values[j] * w;
    for (std::size_t k = 0; k < modes_; ++k) coeffs[k] += row[k] * v;
  }
}

Vec BasisTransform::to_grid(std::span<const double> coeffs) const {
  Vec v(grid_);
  to_grid(coeffs, v);
  return v;
}

Vec BasisTransform::to_spectral(std::span<const double> values) const {
  Vec c(modes_);
  to_spectral(values, c);
  return c;
}

double BasisTransform::grid_sup_norm(std::span<const double> coeffs) const { return sup_norm(to_grid(coeffs)); }

}  // namespace harnack
