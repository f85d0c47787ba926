#include "doctest.h"

#include <cmath>
#include <numbers>
#include <vector>

#include <boost/math/special_functions/erf.hpp>

#include "harnack/rng.hpp"
#include "harnack/stats.hpp"

using namespace harnack;

TEST_CASE("philox4x32-10 known answers") {
  CHECK(philox4x32_10({0, 0, 0, 0}, {0, 0}) == PhiloxCounter{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
  CHECK(philox4x32_10({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff}) ==
        PhiloxCounter{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
  CHECK(philox4x32_10({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0}) ==
        PhiloxCounter{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("inverse normal cdf against erfc_inv") {
  for (double p : {1e-300, 1e-20, 1e-8, 1e-3, 0.02425, 0.1, 0.3, 0.5, 0.7, 0.97575, 0.999, 1.0 - 1e-12}) {
    const double want = -std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * p);
    CHECK(inverse_normal_cdf(p) == doctest::Approx(want).epsilon(1e-14).scale(1e-15));
  }
  CHECK(inverse_normal_cdf(0.5) == 0.0);
  CHECK(inverse_normal_cdf(0.25) == -inverse_normal_cdf(0.75));
}

TEST_CASE("seed derivation separates tags") {
  CHECK(derive_seed(1, "a") != derive_seed(1, "b"));
  CHECK(derive_seed(1, "a") != derive_seed(2, "a"));
  CHECK(derive_seed(1, "a") == derive_seed(1, "a"));
  CHECK(splitmix64(0) != 0);
}

TEST_CASE("noise is a pure function of its key") {
  const NoisePlan plan(42, 100);
  std::vector<double> row(7);
  plan.fill_normals(13, 5, row);
  for (std::size_t k = 0; k < row.size(); ++k) CHECK(row[k] == plan.normal(13, 5, k));
  const NoisePlan win = plan.window(10, 5);
  CHECK(win.normal(3, 5, 2) == plan.normal(13, 5, 2));
  CHECK(plan.with_paths(3).normal(1, 1, 1) == plan.normal(1, 1, 1));
  CHECK(plan.derived("x").normal(0, 0, 0) != plan.normal(0, 0, 0));
  CHECK(plan.normal(0, 0, 0) != plan.normal(0, 1, 0));
  CHECK(plan.normal(0, 0, 0) != plan.normal(1, 0, 0));
}

TEST_CASE("uniforms lie in the open unit interval and normals have unit moments") {
  const NoisePlan plan(7, 1);
  std::vector<double> z;
  z.reserve(200000);
  std::size_t outside = 0;
  for (std::size_t s = 0; s < 100000; ++s) {
    const double u = plan.uniform(0, s, 0);
    outside += !(u > 0.0 && u < 1.0);
    z.push_back(plan.normal(0, s, 0));
    z.push_back(plan.normal(0, s, 1));
  }
  CHECK(outside == 0);
  const double m = sample_mean(z);
  const double v = sample_variance(z);
  CHECK(std::abs(m) < 4.0 / std::sqrt(2e5));
  CHECK(std::abs(v - 1.0) < 4.0 * std::sqrt(2.0 / 2e5));
  double m4 = 0.0;
  for (double x : z) m4 += x * x * x * x;
  m4 /= double(z.size());
  CHECK(std::abs(m4 - 3.0) < 4.0 * std::sqrt(96.0 / 2e5));
}

TEST_CASE("statistics helpers") {
  const std::vector<double> v{1.0, 2.0, 3.0, 4.0};
  CHECK(pairwise_sum(v) == 10.0);
  CHECK(sample_mean(v) == 2.5);
  CHECK(sample_variance(v) == doctest::Approx(5.0 / 3.0));
  const Estimate e = estimate_from_samples(v, 9);
  CHECK(e.M == 4);
  CHECK(e.seed == 9);
  CHECK(e.std_error == doctest::Approx(std::sqrt(5.0 / 3.0 / 4.0)));

  std::vector<double> big(1 << 20, 0.1);
  CHECK(pairwise_sum(big) == doctest::Approx(0.1 * double(1 << 20)).epsilon(1e-14));

  CHECK(ks_statistic({1.0, 2.0, 3.0}, {1.0, 2.0, 3.0}) == 0.0);
  CHECK(ks_statistic({0.0, 0.1}, {1.0, 1.1}) == 1.0);
  CHECK(ks_pvalue(0.0, 100, 100) == doctest::Approx(1.0));
  CHECK(ks_pvalue(0.5, 100, 100) < 1e-4);
}
