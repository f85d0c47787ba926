#include "doctest.h"

#include <cmath>
#include <limits>

#include "harnack/checks.hpp"
#include "harnack/config.hpp"
#include "harnack/errors.hpp"
#include "harnack/semigroup.hpp"

using namespace harnack;

namespace {

CheckSpec ou_spec(std::size_t n = 8) {
  CheckSpec s;
  s.setup.pair = build_pair(dirichlet_spectrum(n), 0.5, 1.0);
  s.setup.drift = Drift::zero();
  s.x = unit_vector(n, 0);
  s.h = cm_unit_vector(s.setup.pair, 0);
  s.observable = Observable::cosine(unit_vector(n, 0), 10.0);
  s.M = 20000;
  s.seed = 5;
  s.t = 0.5;
  return s;
}

}  // namespace

TEST_CASE("classify") {
  CHECK(classify(1.0, 0.1, 3.0) == Verdict::pass);
  CHECK(classify(-1.0, 0.1, 3.0) == Verdict::fail);
  CHECK(classify(0.2, 0.1, 3.0) == Verdict::inconclusive);
  CHECK(classify(0.0, 0.0, 3.0) == Verdict::pass);
  CHECK(classify(-1e-300, 0.0, 3.0) == Verdict::fail);
  CHECK(classify(std::nan(""), 0.1, 3.0) == Verdict::inconclusive);
  CHECK(parse_regime(regime_name(Regime::lipschitz)) == Regime::lipschitz);
  CHECK_THROWS(parse_regime("other"));
}

TEST_CASE("model constants per drift") {
  const OperatorPair pair = build_pair(dirichlet_spectrum(16), 0.5, 1.0);
  const ModelConstants z = derive_constants(pair, Drift::zero());
  CHECK(z.zeta_X == doctest::Approx(-pair.a1()));
  CHECK(z.K1 == doctest::Approx(1.0));
  const ModelConstants c = derive_constants(pair, Drift::composed(pair, 1.0));
  const double zl = pair.a1() - 1.0 / M_PI;
  CHECK(c.zeta_X_lipschitz == doctest::Approx(zl));
  CHECK(c.K1 == doctest::Approx(1.0 + (1.0 / M_PI) / zl));
  const ModelConstants q = derive_constants(pair, Drift::cubic_kernel(power_profile(16, 1.0), 5.0, 0.0));
  CHECK(std::isnan(q.K1));
}

TEST_CASE("regime hypotheses") {
  CheckSpec s = ou_spec(16);
  s.setup.drift = Drift::cubic_kernel(power_profile(16, 1.0), 5.0, 0.0);
  s.regime = Regime::lipschitz;
  CHECK_THROWS_AS(require_regime(s), UnsupportedRegime);
  s.regime = Regime::dissipative;
  CHECK_NOTHROW(require_regime(s));
}

TEST_CASE("margin identity and monotone factor") {
  for (Regime reg : {Regime::lipschitz, Regime::dissipative})
    for (double p : {2.0, 4.0}) {
      CheckSpec s = ou_spec();
      s.regime = reg;
      s.p = p;
      const HarnackReport r = check_harnack(s);
      CAPTURE(r.id);
      CHECK(r.margin + r.lhs.mean == doctest::Approx(r.rhs.mean * r.factor).epsilon(1e-14));
      CHECK(r.factor > 1.0);
      CHECK(r.ci_margin > 0.0);
      CHECK(r.verdict != Verdict::fail);
      REQUIRE(r.details.contains("closed_form"));
      CHECK(r.details["closed_form"]["lhs_within"].get<bool>());
      CHECK(r.details["closed_form"]["rhs_within"].get<bool>());
      s.exponent_scale = 0.01;
      const HarnackReport weak = check_harnack(s);
      CHECK(weak.factor < r.factor);
      CHECK(weak.lhs.mean == r.lhs.mean);
    }
}

TEST_CASE("h = 0 reduces to Jensen") {
  CheckSpec s = ou_spec();
  s.h = Vec(8, 0.0);
  for (double p : {2.0, 3.0}) {
    s.p = p;
    const HarnackReport r = check_harnack(s);
    CHECK(r.factor == 1.0);
    CHECK(r.margin >= -1e-15);
    CHECK(r.verdict != Verdict::fail);
  }
}

TEST_CASE("constant observable has a deterministic verdict") {
  CheckSpec s = ou_spec();
  s.observable = Observable::constant(-2.0);
  const HarnackReport r = check_harnack(s);
  CHECK(r.lhs.mean == doctest::Approx(4.0));
  CHECK(r.rhs.mean == doctest::Approx(4.0));
  CHECK(r.ci_margin <= 1e-15);
  CHECK(r.verdict == Verdict::pass);
  CHECK(r.margin == doctest::Approx(4.0 * (r.factor - 1.0)));

  s.observable = Observable::constant(3.0);
  const HarnackReport lg = check_log_harnack(s);
  CHECK(lg.form == BoundForm::additive);
  CHECK(lg.verdict == Verdict::pass);
  CHECK(lg.margin == doctest::Approx(lg.factor));
}

TEST_CASE("log-Harnack agrees with the power form at large p") {
  CheckSpec s = ou_spec();
  s.observable = Observable::floor_shifted(unit_vector(8, 0), 10.0, 0.0, 1.0, 2.0);
  const HarnackReport r = check_log_harnack(s, 64.0);
  CHECK(r.verdict == Verdict::pass);
  CHECK(r.details["power_limit"]["consistent"].get<bool>());
  s.observable = Observable::cosine(unit_vector(8, 0), 10.0);
  CHECK_THROWS(check_log_harnack(s));
}

TEST_CASE("sweep covers the grid") {
  CheckSpec s = ou_spec();
  HarnackGrid g{{2.0, 4.0}, {0.25, 1.0}, {scaled(s.h, 0.1), s.h}, {Regime::lipschitz, Regime::dissipative}};
  const auto rs = harnack_sweep(s, g);
  CHECK(rs.size() == 16);
  for (const auto& r : rs) CHECK(r.verdict != Verdict::fail);
}

TEST_CASE("Galerkin gaps vanish for equal dimensions and decoupled modes") {
  CheckSpec s = ou_spec(16);
  s.M = 2000;
  const HarnackReport same = check_galerkin(s, {16, 16});
  CHECK(same.details["gaps"][0].get<double>() == 0.0);
  const HarnackReport r = check_galerkin(s, {4, 8, 16});
  for (double g : r.details["gaps"]) CHECK(g == 0.0);
  CHECK(r.verdict == Verdict::pass);
}

TEST_CASE("gradient estimate") {
  CheckSpec s = ou_spec();
  s.M = 4000;
  const HarnackReport r = check_gradient_estimate(s);
  CHECK(r.verdict != Verdict::fail);
  CHECK(r.lhs.mean >= 0.0);
  CHECK(r.details.contains("alternative"));
}

TEST_CASE("strong Feller differences shrink with the shift") {
  CheckSpec s = ou_spec();
  s.x = Vec(8, 0.0);
  s.observable = Observable::sign(unit_vector(8, 0));
  s.t = 0.25;
  s.M = 20000;
  const HarnackReport r = check_strong_feller(s, {1.0, 0.25, 0.0625, 0.0});
  CHECK(r.details["envelope_ok"].get<bool>());
  CHECK(r.details["differences"].back().get<double>() == 0.0);
  CHECK(r.verdict == Verdict::pass);
}

TEST_CASE("hypercontractivity family and oracles") {
  HypercontractivitySpec h;
  h.setup.pair = build_pair(dirichlet_spectrum(8), 0.5, 1.0);
  h.family = hermite_family(h.setup.pair);
  REQUIRE(h.family.size() == 4);
  CHECK(h.family[0].name == "constant");
  CHECK(h.family[3].name == "steep");
  h.t_grid = {0.0, 0.25};
  h.outer = 400;
  h.inner = 200;
  h.seed = 3;
  const HarnackReport r = check_hypercontractivity(h);
  CHECK(r.details["nelson_region_ok"].get<bool>());
  CHECK(r.details["steep_ratio_at_t0"].get<double>() > 1.0);
  CHECK(r.verdict != Verdict::fail);
  const auto& members = r.details["members"];
  CHECK(members[0]["ratios"][1].get<double>() == doctest::Approx(1.0));
}

TEST_CASE("report serialisation maps non-finite values to null") {
  HarnackReport r;
  r.id = "x";
  r.margin = std::numeric_limits<double>::quiet_NaN();
  const auto j = report_to_json(r);
  CHECK(j["margin"].is_null());
  CHECK(j["verdict"] == "INCONCLUSIVE");
  CHECK(j["form"] == "multiplicative");
}

TEST_CASE("Galerkin rejects a start outside the smallest subspace") {
  CheckSpec s = ou_spec(16);
  s.M = 200;
  s.x = unit_vector(16, 5);
  CHECK_THROWS_AS(check_galerkin(s, {4, 8}), std::invalid_argument);
  s.x = unit_vector(16, 3);
  CHECK_NOTHROW(check_galerkin(s, {4, 8}));
}

TEST_CASE("gradient check on constants and the Gaussian case") {
  CheckSpec s = ou_spec();
  s.M = 2000;
  s.observable = Observable::constant(0.7);
  const HarnackReport c = check_gradient_estimate(s);
  CHECK(c.lhs.mean == 0.0);
  CHECK(c.verdict == Verdict::pass);
  // Zero drift: |grad P_t cos(w x1)| along the unit CM direction is w e^{-at} |sin(w m)| e^{-w^2 v / 2} |h_1|.
  s.observable = Observable::cosine(unit_vector(8, 0), 2.0);
  s.x = scaled(unit_vector(8, 0), 0.4);
  s.M = 40000;
  const HarnackReport g = check_gradient_estimate(s, 1e-2);
  const double a = s.setup.pair.a1();
  const GaussianProjection pr = ou_projection(s.setup.pair, s.x, unit_vector(8, 0), s.t);
  const double exact = 2.0 * std::exp(-a * s.t) * std::abs(std::sin(2.0 * pr.mean)) * std::exp(-2.0 * pr.variance);
  const double hn = cm_unit_vector(s.setup.pair, 0)[0];
  CHECK(std::abs(std::abs(g.details["gradient_cm_frame"][0].get<double>()) - exact * hn) <= 4.0 * g.lhs.std_error);
  CHECK(g.verdict == Verdict::pass);
}

TEST_CASE("Yosida gaps vanish for a linear drift") {
  CheckSpec s = ou_spec();
  s.setup.drift = Drift::linear(-1.0);
  s.M = 1000;
  const HarnackReport r = check_yosida_semigroup(s, {0.5, 0.1, 0.01});
  for (double g : r.details["gaps"]) CHECK(g <= 1e-12);
  CHECK(r.verdict == Verdict::pass);
}

TEST_CASE("linear drift passes both regimes") {
  CheckSpec s = ou_spec();
  s.setup.drift = Drift::linear(-1.0);
  s.M = 20000;
  for (Regime rg : {Regime::lipschitz, Regime::dissipative}) {
    s.regime = rg;
    CHECK(check_harnack(s).verdict == Verdict::pass);
    s.observable = Observable::floor_shifted(unit_vector(8, 0), 10.0, 0.0, 1.0, 2.0);
    CHECK(check_log_harnack(s).verdict == Verdict::pass);
    s.h = Vec(8, 0.0);
    const HarnackReport z = check_log_harnack(s);
    CHECK(z.factor == 0.0);
    CHECK(z.verdict != Verdict::fail);
    s.h = cm_unit_vector(s.setup.pair, 0);
    s.observable = Observable::cosine(unit_vector(8, 0), 10.0);
  }
}
