#pragma once

#include <cstddef>
#include <span>

#include "harnack/linalg.hpp"

namespace harnack {

// Sine basis e_k(xi) = sqrt(2) sin(k pi xi) sampled at xi_j = j/(N+1), j = 1..N.
// For k, l <= N the sampled vectors are exactly orthogonal under the weight 1/(N+1).
class BasisTransform {
 public:
  BasisTransform(std::size_t modes, std::size_t grid_size);

  std::size_t modes() const noexcept { return modes_; }
  std::size_t grid_size() const noexcept { return grid_; }
  double point(std::size_t j) const { return double(j + 1) / double(grid_ + 1); }
  double entry(std::size_t j, std::size_t k) const { return table_[j * modes_ + k]; }

  void to_grid(std::span<const double> coeffs, std::span<double> values) const;
  void to_spectral(std::span<const double> values, std::span<double> coeffs) const;
  Vec to_grid(std::span<const double> coeffs) const;
  Vec to_spectral(std::span<const double> values) const;

  // Sup-norm of the grid values: the computable stand-in for the C([0,1]) norm.
  double grid_sup_norm(std::span<const double> coeffs) const;

 private:
  std::size_t modes_;
  std::size_t grid_;
  Vec table_;
};

}  // namespace harnack
