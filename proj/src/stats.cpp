#include "harnack/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace harnack {

double pairwise_sum(std::span<const double> v) noexcept {
  if (v.size() <= 16) {
    double s = 0.0;
    for (double x : v) s += x;
    return s;
  }
  const std::size_t h = v.size() / 2;
  return pairwise_sum(v.first(h)) + pairwise_sum(v.subspan(h));
}

double sample_mean(std::span<const double> v) {
  if (v.empty()) throw std::invalid_argument("mean of an empty sample");
  return pairwise_sum(v) / double(v.size());
}

double sample_variance(std::span<const double> v) {
  if (v.size() < 2) return 0.0;
  const double m = sample_mean(v);
  std::vector<double> sq(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) sq[i] = (v[i] - m) * (v[i] - m);
  return pairwise_sum(sq) / double(v.size() - 1);
}

Estimate estimate_from_samples(std::span<const double> v, std::uint64_t seed) {
  Estimate e;
  e.M = v.size();
  e.seed = seed;
  e.mean = sample_mean(v);
  e.std_error = std::sqrt(sample_variance(v) / double(v.size()));
  return e;
}

double ks_statistic(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("KS statistic needs non-empty samples");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::abs(double(i) / double(a.size()) - double(j) / double(b.size())));
  }
  return d;
}

double ks_pvalue(double statistic, std::size_t n, std::size_t m) {
  const double ne = double(n) * double(m) / double(n + m);
  const double lam = (std::sqrt(ne) + 0.12 + 0.11 / std::sqrt(ne)) * statistic;
  if (lam < 1e-3) return 1.0;
  double sum = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = 2.0 * ((k % 2) ? 1.0 : -1.0) * std::exp(-2.0 * k * k * lam * lam);
    sum += term;
    if (std::abs(term) < 1e-16) break;
  }
  return std::clamp(sum, 0.0, 1.0);
}

}  // namespace harnack
