#include "doctest.h"

#include <cmath>
#include <numbers>

#include <boost/math/quadrature/tanh_sinh.hpp>

#include "harnack/checks.hpp"
#include "harnack/errors.hpp"
#include "harnack/rng.hpp"
#include "harnack/spectral_model.hpp"

using namespace harnack;

namespace {

constexpr double pi2 = std::numbers::pi * std::numbers::pi;

}  // namespace

TEST_CASE("dirichlet spectrum and derived coefficients") {
  const OperatorPair pair = build_pair(dirichlet_spectrum(16), 0.5, 1.0);
  REQUIRE(pair.dim() == 16);
  for (std::size_t k = 0; k < 16; ++k) {
    const double kk = double(k + 1);
    CHECK(pair.spectrum()[k] == doctest::Approx(1.0 / (pi2 * kk * kk)).epsilon(1e-15));
    CHECK(pair.a()[k] == doctest::Approx(0.5 * pi2 * kk * kk).epsilon(1e-14));
    CHECK(pair.c()[k] == doctest::Approx(1.0 / (pi2 * kk * kk)).epsilon(1e-14));
  }
  CHECK(pair.a1() == doctest::Approx(4.934802200544679).epsilon(1e-14));
  CHECK(pair.c()[0] == doctest::Approx(0.10132118364233778).epsilon(1e-14));
  CHECK(pair.zeta_A() == -pair.a1());
  CHECK(pair.sqrt_c_norm() == doctest::Approx(1.0 / std::numbers::pi));
}

TEST_CASE("spectra must be positive and non-increasing") {
  CHECK_THROWS_AS(Spectrum({1.0, 2.0}), std::invalid_argument);
  CHECK_THROWS_AS(Spectrum({1.0, 0.0}), std::invalid_argument);
  CHECK_NOTHROW(Spectrum({1.0, 1.0, 0.5}));
}

TEST_CASE("truncation keeps the leading modes") {
  const OperatorPair full = build_pair(dirichlet_spectrum(32), 0.5, 1.0);
  const OperatorPair cut = full.truncated(8);
  REQUIRE(cut.dim() == 8);
  for (std::size_t k = 0; k < 8; ++k) CHECK(cut.a()[k] == full.a()[k]);
  CHECK(cut.id() == build_pair(dirichlet_spectrum(8), 0.5, 1.0).id());
  CHECK(cut.hash() != full.hash());
}

TEST_CASE("semigroup acts diagonally") {
  const OperatorPair pair = build_pair(dirichlet_spectrum(6), 0.5, 1.0);
  const Vec x{1.0, -2.0, 0.5, 0.0, 3.0, 1.0};
  const Vec y = semigroup_apply(pair, 0.3, x);
  for (std::size_t k = 0; k < 6; ++k) CHECK(y[k] == doctest::Approx(std::exp(-0.3 * pair.a()[k]) * x[k]));
  const Vec z = semigroup_apply(pair, 0.2, semigroup_apply(pair, 0.1, x));
  for (std::size_t k = 0; k < 6; ++k) CHECK(z[k] == doctest::Approx(y[k]).epsilon(1e-14));
}

TEST_CASE("Cameron-Martin norm and generator forms") {
  const OperatorPair pair = build_pair(dirichlet_spectrum(8), 0.5, 1.0);
  for (std::size_t k = 0; k < 8; ++k) CHECK(cm_norm(pair, cm_unit_vector(pair, k)) == doctest::Approx(1.0));
  const Vec x{1.0, 0.5, -0.25, 0.0, 0.0, 0.0, 0.0, 2.0};
  double ax = 0.0, axc = 0.0, cm = 0.0;
  for (std::size_t k = 0; k < 8; ++k) {
    ax += -pair.a()[k] * x[k] * x[k];
    axc += -pair.a()[k] * x[k] * x[k] / pair.c()[k];
    cm += x[k] * x[k] / pair.c()[k];
  }
  CHECK(generator_form(pair, x) == doctest::Approx(ax));
  CHECK(generator_form_cm(pair, x) == doctest::Approx(axc));
  CHECK(cm_norm(pair, x) == doctest::Approx(std::sqrt(cm)));
  // <Ax,x> <= zeta_A |x|^2 and likewise in the Cameron-Martin inner product.
  CHECK(generator_form(pair, x) <= pair.zeta_A() * dot(x, x) + 1e-12);
  CHECK(generator_form_cm(pair, x) <= pair.zeta_A() * cm + 1e-12);
}

TEST_CASE("smoothing constant matches the maximum of the ratio") {
  for (auto [alpha, beta] : {std::pair{0.5, 1.0}, std::pair{0.25, 1.0}, std::pair{0.3, 0.9}}) {
    const OperatorPair pair = build_pair(dirichlet_spectrum(32), alpha, beta);
    const auto sc = smoothing_constants(pair);
    CHECK(sc.gamma == alpha / beta);
    double best = 0.0;
    for (std::size_t k = 0; k < 4; ++k)
      for (int i = 0; i <= 40000; ++i) best = std::max(best, smoothing_ratio(pair, std::exp(-9.0 + 12.0 * i / 40000.0), k));
    CHECK(sc.K == doctest::Approx(best).epsilon(1e-7));
    CHECK(sc.K >= best);
  }
  CHECK(smoothing_constants(build_pair(dirichlet_spectrum(4), 0.5, 1.0)).K ==
        doctest::Approx(std::exp(-0.5)).epsilon(1e-15));
  CHECK_THROWS_AS(smoothing_constants(build_pair(dirichlet_spectrum(4), 1.0, 1.0)), UnsupportedRegime);
}

TEST_CASE("K1 formulas") {
  const OperatorPair pair = build_pair(dirichlet_spectrum(16), 0.5, 1.0);
  ModelConstants mc;
  mc.L_G = 2.0;
  mc.zeta_X_lipschitz = 3.0;
  CHECK(harnack_K1(K1Case::composed, mc, pair) == doctest::Approx(1.0 + 2.0 / std::numbers::pi / 3.0));
  mc.gamma = 0.5;
  mc.K = std::exp(-0.5);
  mc.L_F = 1.5;
  CHECK(harnack_K1(K1Case::smoothing, mc, pair) ==
        doctest::Approx(1.0 + std::exp(-0.5) * 1.5 / std::numbers::pi * (2.0 + 1.0 / 3.0)));
  mc.zeta_X_lipschitz = 0.0;
  CHECK_THROWS(harnack_K1(K1Case::composed, mc, pair));
}

TEST_CASE("trace integral against quadrature") {
  boost::math::quadrature::tanh_sinh<double> q;
  for (double eta : {0.25, 0.5, 0.75}) {
    const OperatorPair pair = build_pair(dirichlet_spectrum(12), 0.5, 1.0);
    const double T = 0.7;
    double want = 0.0;
    for (std::size_t k = 0; k < pair.dim(); ++k) {
      const double a = pair.a()[k];
      // Substitute t = s^{1/(1-eta)} to remove the endpoint singularity.
      const double e = 1.0 / (1.0 - eta);
      want += pair.c()[k] * q.integrate([&](double s) { return e * std::exp(-2.0 * a * std::pow(s, e)); }, 0.0,
                                        std::pow(T, 1.0 - eta));
    }
    const auto tr = trace_condition(pair, T, eta);
    CHECK(std::abs(tr.value - want) <= 1e-12);
    CHECK(tr.per_mode_tail > 0.0);
    CHECK(std::isfinite(tr.per_mode_tail));
  }
  CHECK_THROWS(trace_condition(build_pair(dirichlet_spectrum(4), 0.5, 1.0), 1.0, 1.0));
}

TEST_CASE("exponential integrability of the invariant Gaussian") {
  const OperatorPair pair = build_pair(dirichlet_spectrum(16), 0.5, 1.0);
  const double star = exp_integrability_threshold(pair);
  CHECK(star == doctest::Approx(pair.a1() / 2.0));
  CHECK(std::isinf(exp_integrability_value(pair, star)));
  // Per mode, ||X-Y||_C^2 contributes chi^2_1 / a_k.
  boost::math::quadrature::tanh_sinh<double> q;
  const double eps = star / 2.0;
  double want = 1.0;
  for (std::size_t k = 0; k < pair.dim(); ++k) {
    const double a = pair.a()[k];
    want *= q.integrate(
        [&](double u) { return std::exp(eps * u * u / a - u * u / 2.0) / std::sqrt(2.0 * std::numbers::pi); },
        -std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity());
  }
  CHECK(exp_integrability_value(pair, eps) == doctest::Approx(want).epsilon(1e-10));
  CHECK(exp_integrability_value(pair, 0.0) == 1.0);
}

TEST_CASE("worked examples") {
  CHECK(dirichlet_spectrum(1)[0] == doctest::Approx(1.0 / pi2));
  const Spectrum s3 = dirichlet_spectrum(3);
  CHECK(s3[1] == doctest::Approx(1.0 / (4.0 * pi2)));
  CHECK(s3[2] == doctest::Approx(1.0 / (9.0 * pi2)));
  CHECK_THROWS(dirichlet_spectrum(0));

  const OperatorPair p01 = build_pair(dirichlet_spectrum(4), 0.0, 1.0);
  CHECK(p01.a1() == doctest::Approx(pi2 / 2.0));
  CHECK(p01.c()[0] == 1.0);
  const auto sc0 = smoothing_constants(p01);
  CHECK(sc0.gamma == 0.0);
  CHECK(sc0.K == 1.0);
  const Vec h{1.0, -2.0, 0.5, 3.0};
  CHECK(cm_norm(p01, h) == doctest::Approx(norm(h)));

  const OperatorPair p00 = build_pair(dirichlet_spectrum(4), 0.0, 0.0);
  for (std::size_t k = 0; k < 4; ++k) {
    CHECK(p00.a()[k] == 0.5);
    CHECK(p00.c()[k] == 1.0);
  }

  const OperatorPair half = build_pair(dirichlet_spectrum(4), 0.5, 1.0);
  for (std::size_t k = 0; k < 4; ++k) CHECK(half.c()[k] == doctest::Approx(half.spectrum()[k]));
  CHECK(cm_norm(half, unit_vector(4, 0)) == doctest::Approx(std::numbers::pi));
  CHECK(semigroup_apply(half, 0.0, h) == h);
  CHECK_THROWS(semigroup_apply(half, -1.0, h));

  const OperatorPair scalar = build_pair(Spectrum({0.25}), 0.0, 0.5);
  CHECK(scalar.a1() == doctest::Approx(1.0));
  CHECK(semigroup_apply(build_pair(Spectrum({0.25}), 0.0, 1.0), 0.5, Vec{1.0})[0] == doctest::Approx(std::exp(-1.0)));
}

TEST_CASE("K1 worked examples") {
  const OperatorPair pair = build_pair(dirichlet_spectrum(4), 0.5, 1.0);
  ModelConstants mc;
  mc.zeta_X_lipschitz = 2.0;
  mc.L_G = 1.0;
  CHECK(harnack_K1(K1Case::composed, mc, pair) == doctest::Approx(1.0 + 1.0 / (2.0 * std::numbers::pi)));
  mc.L_G = 0.0;
  CHECK(harnack_K1(K1Case::composed, mc, pair) == 1.0);
  mc.gamma = 0.5;
  mc.K = std::exp(-0.5);
  mc.L_F = 1.0;
  mc.zeta_X_lipschitz = 1.0;
  CHECK(harnack_K1(K1Case::smoothing, mc, pair) == doctest::Approx(1.0 + 3.0 * std::exp(-0.5) / std::numbers::pi));
  mc.L_F = 0.0;
  CHECK(harnack_K1(K1Case::smoothing, mc, pair) == 1.0);
}

TEST_CASE("trace integral limits") {
  const OperatorPair pair = build_pair(dirichlet_spectrum(16), 0.5, 1.0);
  const double T = 0.3;
  double cov = 0.0;
  for (std::size_t k = 0; k < 16; ++k) cov += pair.c()[k] * -std::expm1(-2.0 * pair.a()[k] * T) / (2.0 * pair.a()[k]);
  CHECK(trace_condition(pair, T, 1e-9).value == doctest::Approx(cov).epsilon(1e-7));
  double prev = 0.0;
  for (std::size_t n : {1u, 2u, 4u, 8u, 16u}) {
    const double v = trace_condition(pair.truncated(n), T, 0.5).value;
    CHECK(v > prev);
    prev = v;
  }
  // One mode with a = 1/2, c = 1: the integral tends to Gamma(1/2).
  const OperatorPair one = build_pair(Spectrum({1.0}), 0.5, 1.0);
  CHECK(trace_condition(one, 200.0, 0.5).value == doctest::Approx(std::sqrt(std::numbers::pi)).epsilon(1e-12));
}

TEST_CASE("inner-product structure and smoothing probes") {
  const OperatorPair pair = build_pair(dirichlet_spectrum(12), 0.5, 1.0);
  const NoisePlan plan(77, 1);
  std::size_t bad = 0;
  for (std::size_t i = 0; i < 200; ++i) {
    Vec u(12), v(12);
    plan.fill_normals(0, 2 * i, u);
    plan.fill_normals(0, 2 * i + 1, v);
    const double lhs = std::pow(cm_norm(pair, add(u, v)), 2) + std::pow(cm_norm(pair, sub(u, v)), 2);
    const double rhs = 2.0 * (std::pow(cm_norm(pair, u), 2) + std::pow(cm_norm(pair, v), 2));
    bad += std::abs(lhs - rhs) > 1e-12 * rhs;
    bad += generator_form(pair, u) > -pair.a1() * dot(u, u) * (1.0 - 1e-14);
  }
  CHECK(bad == 0);
  const auto sc = smoothing_constants(pair);
  std::size_t over = 0;
  for (std::size_t i = 0; i < 10000; ++i) {
    const double t = std::exp(-10.0 + 13.0 * plan.uniform(1, i, 0));
    const std::size_t k = std::min<std::size_t>(11, std::size_t(12.0 * plan.uniform(1, i, 1)));
    over += smoothing_ratio(pair, t, k) > sc.K + 1e-12;
  }
  CHECK(over == 0);
}
