#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>

namespace harnack {

using PhiloxCounter = std::array<std::uint32_t, 4>;
using PhiloxKey = std::array<std::uint32_t, 2>;

PhiloxCounter philox4x32_10(PhiloxCounter counter, PhiloxKey key) noexcept;

// Wichura's AS241 rational approximation, relative accuracy about 1e-16.
double inverse_normal_cdf(double p) noexcept;

std::uint64_t splitmix64(std::uint64_t x) noexcept;
std::uint64_t derive_seed(std::uint64_t seed, std::string_view tag) noexcept;

// Gaussian increments keyed by (seed, path, step, mode). Any subset can be regenerated
// independently, so results do not depend on evaluation order or thread count.
class NoisePlan {
 public:
  NoisePlan(std::uint64_t seed, std::size_t paths) : seed_(seed), paths_(paths) {}

  std::uint64_t seed() const noexcept { return seed_; }
  std::size_t paths() const noexcept { return paths_; }
  std::size_t first_path() const noexcept { return first_; }

  double normal(std::size_t path, std::size_t step, std::size_t mode) const noexcept;
  double uniform(std::size_t path, std::size_t step, std::size_t mode) const noexcept;
  // out[k] = normal(path, step, k).
  void fill_normals(std::size_t path, std::size_t step, std::span<double> out) const noexcept;
  void fill_uniforms(std::size_t path, std::size_t step, std::span<double> out) const noexcept;

  NoisePlan derived(std::string_view tag) const noexcept { return {derive_seed(seed_, tag), paths_}; }
  NoisePlan with_paths(std::size_t paths) const noexcept { return {seed_, paths}; }
  // Paths [first, first + count) of this plan, re-indexed from 0.
  NoisePlan window(std::size_t first, std::size_t count) const noexcept {
    NoisePlan w(seed_, count);
    w.first_ = first_ + first;
    return w;
  }

 private:
  std::array<double, 2> uniform_pair(std::size_t path, std::size_t step, std::size_t pair_index) const noexcept;

  std::uint64_t seed_;
  std::size_t paths_;
  std::size_t first_ = 0;
};

}  // namespace harnack
