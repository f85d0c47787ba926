#include "doctest.h"

#include <cmath>
#include <numbers>
#include <vector>

#include "harnack/config.hpp"
#include "harnack/rng.hpp"
#include "harnack/semigroup.hpp"

using namespace harnack;

namespace {

SemigroupSetup ou_setup(std::size_t n = 8) {
  SemigroupSetup s;
  s.pair = build_pair(dirichlet_spectrum(n), 0.5, 1.0);
  s.drift = Drift::zero();
  return s;
}

// E g(m + sd Z) by the trapezoid rule on +-12 sd.
template <class G>
double gaussian_expectation(double m, double sd, G&& g) {
  const int N = 20000;
  double s = 0.0;
  for (int i = 0; i <= N; ++i) {
    const double z = -12.0 + 24.0 * i / N;
    const double w = (i == 0 || i == N) ? 0.5 : 1.0;
    s += w * g(m + sd * z) * std::exp(-0.5 * z * z);
  }
  return s * (24.0 / N) / std::sqrt(2.0 * std::numbers::pi);
}

}  // namespace

TEST_CASE("Gaussian projection and cosine moments") {
  const auto s = ou_setup();
  const Vec x = scaled(unit_vector(8, 0), 0.7);
  const Vec d{0.6, 0.8, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0};
  for (double t : {0.05, 0.5, 2.0}) {
    const auto g = ou_projection(s.pair, x, d, t);
    double var = 0.0;
    for (std::size_t k = 0; k < 8; ++k) var += d[k] * d[k] * s.pair.c()[k] * -std::expm1(-2.0 * s.pair.a()[k] * t) / (2.0 * s.pair.a()[k]);
    CHECK(g.mean == doctest::Approx(0.6 * 0.7 * std::exp(-s.pair.a1() * t)));
    CHECK(g.variance == doctest::Approx(var));
    for (int p : {1, 2, 4}) {
      const double want = gaussian_expectation(g.mean, std::sqrt(g.variance), [&](double u) { return std::pow(std::cos(3.0 * u + 0.4), p); });
      CHECK(ou_cosine_moment(s.pair, x, d, 3.0, 0.4, t, p) == doctest::Approx(want).epsilon(1e-10).scale(1e-12));
    }
    // Jensen for the exact semigroup.
    const double m1 = ou_cosine_moment(s.pair, x, d, 3.0, 0.4, t, 1);
    CHECK(m1 * m1 <= ou_cosine_moment(s.pair, x, d, 3.0, 0.4, t, 2) + 1e-15);
  }
}

TEST_CASE("Monte Carlo estimate agrees with the closed form") {
  const auto s = ou_setup();
  const Vec x = unit_vector(8, 0);
  const Observable phi = Observable::cosine(unit_vector(8, 0), 2.0);
  for (double t : {0.1, 0.5}) {
    const Estimate e = estimate_Pt(s, phi, x, t, 20000, 17);
    const double exact = ou_cosine_moment(s.pair, x, unit_vector(8, 0), 2.0, 0.0, t, 1);
    CHECK(e.M == 20000);
    CHECK(std::abs(e.mean - exact) <= 4.0 * e.std_error);
  }
  CHECK_THROWS(estimate_Pt(s, phi, x, 0.0, 10, 1));
}

TEST_CASE("the estimator is linear in the observable under fixed noise") {
  SemigroupSetup s = ou_setup();
  s.drift = Drift::cubic_kernel(power_profile(8, 1.0), 5.0, 0.0);
  const Vec x = unit_vector(8, 0);
  const Observable f = Observable::cosine(unit_vector(8, 0), 3.0);
  const Observable g = Observable::cosine(unit_vector(8, 0), 3.0, 0.0, -2.5, 4.0);
  const Estimate ef = estimate_Pt(s, f, x, 0.5, 5000, 8);
  const Estimate eg = estimate_Pt(s, g, x, 0.5, 5000, 8);
  CHECK(eg.mean == doctest::Approx(4.0 - 2.5 * ef.mean).epsilon(1e-13));
  CHECK(eg.std_error == doctest::Approx(2.5 * ef.std_error).epsilon(1e-10));
  CHECK(estimate_Pt(s, Observable::constant(3.0), x, 0.5, 100, 8).mean == 3.0);
}

TEST_CASE("results do not depend on the chunk size") {
  SemigroupSetup s = ou_setup();
  s.drift = Drift::linear(-1.0);
  const std::vector<Vec> xs{unit_vector(8, 0), unit_vector(8, 1)};
  const Vec ts{0.25, 0.5};
  auto collect = [&](std::size_t chunk) {
    std::vector<double> out(2 * 2 * 300);
    for_each_endpoint(s, xs, ts, 300, 4, [&](std::size_t a, std::size_t slot, std::size_t p, std::span<const double> st) {
      out[(a * 2 + slot) * 300 + p] = st[0] + 0.5 * st[3];
    }, chunk);
    return out;
  };
  CHECK(collect(7) == collect(1u << 14));
}

TEST_CASE("common random numbers cut the variance of differences") {
  SemigroupSetup s = ou_setup();
  s.drift = Drift::cubic_kernel(power_profile(8, 1.0), 5.0, 0.0);
  const Vec x = unit_vector(8, 0);
  const Vec h = cm_unit_vector(s.pair, 0);
  const Observable phi = Observable::cosine(unit_vector(8, 0), 3.0);
  const double step = 0.05;
  const Estimate crn = directional_derivative_Pt(s, phi, x, 0.25, h, step, 4000, 3);
  const Estimate up = estimate_Pt(s, phi, add(x, scaled(h, step)), 0.25, 4000, 11);
  const Estimate down = estimate_Pt(s, phi, sub(x, scaled(h, step)), 0.25, 4000, 12);
  const double indep = std::hypot(up.std_error, down.std_error) / (2.0 * step);
  CHECK(indep * indep >= 10.0 * crn.std_error * crn.std_error);
  CHECK(std::abs(crn.mean - (up.mean - down.mean) / (2.0 * step)) <= 4.0 * std::hypot(indep, crn.std_error));
}

TEST_CASE("generator of the zero drift on a quadratic") {
  const auto s = ou_setup();
  const Observable q = Observable::quadratic(unit_vector(8, 0));
  const Vec x = scaled(unit_vector(8, 0), 0.8);
  CHECK(apply_generator(s, q, x) == doctest::Approx(s.pair.c()[0] - 2.0 * s.pair.a1() * 0.64));
  SemigroupSetup lin = s;
  lin.drift = Drift::linear(-1.0);
  CHECK(apply_generator(lin, q, x) == doctest::Approx(s.pair.c()[0] - 2.0 * (s.pair.a1() + 1.0) * 0.64));
  const Vec dts{0.04, 0.02};
  const auto rep = generator_consistency(s, q, x, dts, 4.0, 5);
  REQUIRE(rep.rows.size() == 2);
  CHECK(rep.rows[0].M == 2500);
  CHECK(rep.rows[1].M == 10000);
  CHECK(rep.error_ratios.size() == 1);
}

TEST_CASE("invariant law is preserved by the semigroup") {
  const auto s = ou_setup();
  const std::size_t M = 20000;
  const auto mu = sample_invariant(s, 0.0, M, 21);
  const auto moved = evolve_states(s.pair, s.drift, mu, TimeGrid(0.5, 1), NoisePlan(22, M));
  const auto fresh = sample_invariant(s, 0.0, M, 23);
  for (std::size_t k : {0u, 3u}) {
    std::vector<double> a, b;
    for (std::size_t j = 0; j < M; ++j) {
      a.push_back(moved[j][k]);
      b.push_back(fresh[j][k]);
    }
    CHECK(ks_pvalue(ks_statistic(a, b), M, M) > 1e-3);
    CHECK(sample_variance(b) == doctest::Approx(s.pair.c()[k] / (2.0 * s.pair.a()[k])).epsilon(0.05));
  }
}

TEST_CASE("grid alignment") {
  SemigroupSetup s = ou_setup();
  s.drift = Drift::linear(-1.0);
  const Vec ts{0.25, 1.0};
  const TimeGrid g = s.grid_for(ts);
  CHECK(g.t_end() == 1.0);
  CHECK(g.dt() <= s.dt);
  CHECK_NOTHROW(g.index_of(0.25));
  const TimeGrid z = ou_setup().grid_for(ts);
  CHECK(z.steps() == 4);
  SemigroupSetup fine = ou_setup();
  fine.coarse_zero_steps = false;
  CHECK(fine.grid_for(ts).steps() == g.steps());
}

TEST_CASE("constant and bounded observables") {
  const auto s = ou_setup();
  const Vec x = unit_vector(8, 0);
  const Estimate one = estimate_Pt(s, Observable::constant(1.0), x, 0.5, 1000, 1);
  CHECK(one.mean == 1.0);
  CHECK(one.std_error == 0.0);
  const Observable c = Observable::cosine(unit_vector(8, 0), 4.0, 0.3, 2.5);
  const Estimate e = estimate_Pt(s, c, x, 0.5, 5000, 2);
  CHECK(std::abs(e.mean) <= 2.5);
}

TEST_CASE("generator on constant and linear observables") {
  SemigroupSetup s = ou_setup();
  s.drift = Drift::cubic_kernel(power_profile(8, 1.0), 5.0, 0.0);
  const Vec x{0.7, -0.2, 0.1, 0.0, 0.3, 0.0, 0.0, -0.4};
  CHECK(apply_generator(s, Observable::constant(3.0), x) == 0.0);
  const Vec F = s.drift.eval(x);
  CHECK(apply_generator(s, Observable::linear(unit_vector(8, 0)), x) ==
        doctest::Approx(-s.pair.a1() * x[0] + F[0]).epsilon(1e-12));
  const Vec dts{0.04, 0.02};
  const auto rep = generator_consistency(s, Observable::constant(3.0), x, dts, 1.0, 3);
  for (const auto& row : rep.rows) {
    CHECK(row.quotient.mean == 0.0);
    CHECK(row.error == 0.0);
  }
}

TEST_CASE("directional derivative: constants, antisymmetry and the Gaussian case") {
  const auto s = ou_setup();
  const Vec x = scaled(unit_vector(8, 0), 0.4);
  const Vec h = cm_unit_vector(s.pair, 0);
  const Observable phi = Observable::cosine(unit_vector(8, 0), 2.0);
  const Estimate zero = directional_derivative_Pt(s, Observable::constant(2.0), x, 0.5, h, 1e-2, 2000, 4);
  CHECK(zero.mean == 0.0);
  CHECK(zero.std_error == 0.0);
  const Estimate plus = directional_derivative_Pt(s, phi, x, 0.5, h, 1e-2, 2000, 4);
  const Estimate minus = directional_derivative_Pt(s, phi, x, 0.5, scaled(h, -1.0), 1e-2, 2000, 4);
  CHECK(plus.mean == -minus.mean);
  // d/dx E cos(2 X1) with X1 ~ N(e^{-at} x, v): -2 e^{-at} sin(2 m) e^{-2 v}, along the unit CM direction.
  const double a = s.pair.a1();
  const double hn = h[0];
  const GaussianProjection g = ou_projection(s.pair, x, unit_vector(8, 0), 0.5);
  const double exact = -2.0 * std::exp(-a * 0.5) * std::sin(2.0 * g.mean) * std::exp(-2.0 * g.variance) * hn;
  const Estimate fd = directional_derivative_Pt(s, phi, x, 0.5, h, 1e-2, 40000, 5);
  CHECK(std::abs(fd.mean - exact) <= 4.0 * fd.std_error + 1e-4 * std::abs(exact));
}

TEST_CASE("invariant law with a drift and zero burn-in") {
  SemigroupSetup s = ou_setup();
  const std::size_t M = 20000;
  // Zero burn-in with the zero drift is the exact Gaussian law.
  const auto mu = sample_invariant(s, 0.0, M, 31);
  Vec c0;
  for (const auto& v : mu) c0.push_back(v[0]);
  Vec ref(M);
  const double sd = std::sqrt(s.pair.c()[0] / (2.0 * s.pair.a1()));
  for (std::size_t j = 0; j < M; ++j) ref[j] = sd * NoisePlan(32, M).normal(j, 0, 0);
  CHECK(ks_pvalue(ks_statistic(c0, ref), M, M) > 1e-3);

  s.drift = Drift::linear(-1.0);
  const auto lin = sample_invariant(s, 8.0, M, 33);
  Vec l0;
  for (const auto& v : lin) l0.push_back(v[0]);
  const double var = s.pair.c()[0] / (2.0 * (s.pair.a1() + 1.0));
  const Estimate st = estimate_from_samples(l0, 0);
  CHECK(std::abs(st.mean) <= 4.0 * st.std_error);
  Vec sq;
  for (double v : l0) sq.push_back(v * v);
  const Estimate m2 = estimate_from_samples(sq, 0);
  CHECK(std::abs(m2.mean - var) <= 4.0 * m2.std_error + 0.02 * var);
}
