#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace harnack {

// Pairwise (cascade) summation; result depends only on the input order, never on threading.
double pairwise_sum(std::span<const double> values) noexcept;

struct Estimate {
  double mean = 0.0;
  // Sample standard deviation over sqrt(M).
  double std_error = 0.0;
  std::size_t M = 0;
  std::uint64_t seed = 0;
};

Estimate estimate_from_samples(std::span<const double> values, std::uint64_t seed = 0);

double sample_mean(std::span<const double> values);
double sample_variance(std::span<const double> values);

// Two-sample Kolmogorov-Smirnov statistic and its asymptotic p-value.
double ks_statistic(std::vector<double> a, std::vector<double> b);
double ks_pvalue(double statistic, std::size_t n, std::size_t m);

}  // namespace harnack
