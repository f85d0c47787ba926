#include "doctest.h"

#include <cmath>
#include <string>
#include <vector>

#include "harnack/observable.hpp"

using namespace harnack;

namespace {

const OperatorPair kPair = build_pair(dirichlet_spectrum(6), 0.5, 1.0);

std::vector<Observable> smooth_family() {
  const Vec d1 = unit_vector(6, 0);
  const Vec mix{0.6, 0.0, 0.8};
  return {Observable::cosine(d1, 3.0, 0.2, 1.5, 0.5),
          Observable::cosine(mix, 2.0),
          Observable::tanh(d1, 4.0, 0.1, 2.0, -1.0),
          Observable::product_sigmoid({d1, unit_vector(6, 2)}, {5.0, 3.0}, {0.1, -0.2}, 1.0, 0.25),
          Observable::linear(mix, 2.0, 1.0),
          Observable::quadratic(d1, 0.5, 2.0)};
}

}  // namespace

TEST_CASE("values of the basic kinds") {
  const Vec x{0.3, -1.0, 0.5, 0.0, 0.0, 0.0};
  CHECK(Observable::cosine(unit_vector(6, 0), 2.0, 0.1, 3.0, 1.0)(x) == doctest::Approx(1.0 + 3.0 * std::cos(0.7)));
  CHECK(Observable::tanh(unit_vector(6, 0), 2.0, 0.1)(x) == doctest::Approx(std::tanh(0.4)));
  CHECK(Observable::linear(unit_vector(6, 1), 2.0, 1.0)(x) == doctest::Approx(-1.0));
  CHECK(Observable::quadratic(unit_vector(6, 2), 4.0)(x) == doctest::Approx(1.0));
  CHECK(Observable::constant(2.5)(x) == 2.5);
  CHECK(Observable::sign(unit_vector(6, 1))(x) == -1.0);
  CHECK(Observable::sign(unit_vector(6, 1), -2.0, 3.0, 1.0)(x) == 4.0);
  CHECK(Observable::sign(unit_vector(6, 3))(x) == 0.0);
  const Observable ps = Observable::product_sigmoid({unit_vector(6, 0)}, {10.0}, {0.3});
  CHECK(ps(x) == doctest::Approx(0.5));
  // Short directions act as zero-padded.
  CHECK(Observable::cosine({1.0}, 2.0)(x) == doctest::Approx(std::cos(0.6)));
}

TEST_CASE("floor_shifted is positive and floored") {
  const Observable f = Observable::floor_shifted(unit_vector(6, 0), 1.0, 0.0, 1.0, 0.5, 0.1);
  CHECK(f.positive());
  CHECK(f.inf_value() == doctest::Approx(0.1));
  const Vec at_pi = scaled(unit_vector(6, 0), M_PI);
  CHECK(f(at_pi) == doctest::Approx(0.1));
  CHECK(f(Vec(6, 0.0)) == doctest::Approx(1.5));
  CHECK_THROWS(Observable::floor_shifted(unit_vector(6, 0), 1.0, 0.0, 1.0, 0.5, 0.0));
}

TEST_CASE("bounds") {
  CHECK(Observable::cosine(unit_vector(6, 0), 1.0, 0.0, 2.0, 1.0).sup_abs() == 3.0);
  CHECK(Observable::cosine(unit_vector(6, 0), 1.0, 0.0, 2.0, 3.0).inf_value() == 1.0);
  CHECK(Observable::cosine(unit_vector(6, 0), 1.0, 0.0, 2.0, 3.0).positive());
  CHECK_FALSE(Observable::linear(unit_vector(6, 0)).bounded());
  CHECK(std::isinf(Observable::quadratic(unit_vector(6, 0)).sup_abs()));
  CHECK(Observable::sign(unit_vector(6, 0)).inf_value() == -1.0);
  CHECK(Observable::product_sigmoid({unit_vector(6, 0)}, {1.0}, {0.0}, -2.0, 1.0).inf_value() == -1.0);
  CHECK(Observable::constant(-4.0).sup_abs() == 4.0);
  CHECK(Observable::cosine(unit_vector(6, 4)).support() == 5);
}

TEST_CASE("gradient and Hessian trace match finite differences") {
  const Vec x{0.31, -0.2, 0.45, 0.1, -0.05, 0.2};
  for (const auto& f : smooth_family()) {
    CAPTURE(f.id());
    const Vec g = f.gradient(x);
    const double h = 1e-5;
    double tr = 0.0;
    for (std::size_t k = 0; k < 6; ++k) {
      Vec xp = x, xm = x;
      xp[k] += h;
      xm[k] -= h;
      CHECK(g[k] == doctest::Approx((f(xp) - f(xm)) / (2.0 * h)).epsilon(1e-6).scale(1.0));
      const double hh = 1e-4;
      Vec yp = x, ym = x;
      yp[k] += hh;
      ym[k] -= hh;
      tr += kPair.c()[k] * (f(yp) - 2.0 * f(x) + f(ym)) / (hh * hh);
    }
    CHECK(f.trace_c_hessian(kPair, x) == doctest::Approx(tr).epsilon(1e-5).scale(1.0));
    double cg = 0.0;
    for (std::size_t k = 0; k < 6; ++k) cg += kPair.c()[k] * g[k] * g[k];
    CHECK(f.cm_gradient_norm(kPair, x) == doctest::Approx(std::sqrt(cg)));
  }
  CHECK(norm(Observable::sign(unit_vector(6, 0)).gradient(x)) == 0.0);
}

TEST_CASE("observable kind names round trip") {
  for (auto k : {ObservableKind::cosine, ObservableKind::tanh, ObservableKind::product_sigmoid,
                 ObservableKind::floor_shifted, ObservableKind::linear, ObservableKind::quadratic,
                 ObservableKind::sign})
    CHECK(parse_observable_kind(observable_kind_name(k)) == k);
  CHECK_THROWS(parse_observable_kind("nope"));
  CHECK(Observable::cosine(unit_vector(6, 0)).id() != Observable::cosine(unit_vector(6, 1)).id());
}
