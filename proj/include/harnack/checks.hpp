#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

#include "harnack/drift.hpp"
#include "harnack/observable.hpp"
#include "harnack/semigroup.hpp"
#include "harnack/spectral_model.hpp"
#include "harnack/stats.hpp"

namespace harnack {

enum class Verdict { pass, fail, inconclusive };
enum class Regime { lipschitz, dissipative };
enum class BoundForm { multiplicative, additive, convergence };

std::string verdict_name(Verdict v);
std::string regime_name(Regime r);
Regime parse_regime(const std::string& name);
std::string form_name(BoundForm f);

// PASS iff margin > z ci, FAIL iff margin < -z ci. A zero-width interval decides on the sign of the margin.
Verdict classify(double margin, double ci, double z);

struct PlotTable {
  std::string name;
  std::vector<std::string> columns;
  std::vector<Vec> rows;
};

struct HarnackReport {
  std::string id;
  Estimate lhs;
  Estimate rhs;
  // Multiplicative: margin = rhs * factor - lhs. Additive: margin = rhs + factor - lhs.
  double factor = 1.0;
  double margin = 0.0;
  double ci_margin = 0.0;
  Verdict verdict = Verdict::inconclusive;
  BoundForm form = BoundForm::multiplicative;
  nlohmann::json details = nlohmann::json::object();
  std::vector<PlotTable> plots;
};

nlohmann::json report_to_json(const HarnackReport& r);

struct CheckSpec {
  std::string check_id = "check";
  SemigroupSetup setup;
  Regime regime = Regime::dissipative;
  double p = 2.0;
  double t = 1.0;
  Vec x;
  Vec h;
  Observable observable = Observable::constant(1.0);
  std::size_t M = 100000;
  std::uint64_t seed = 0;
  double z = 3.0;
  // Multiplies the exponent of the Harnack factor; 1 is the theorem, anything smaller is a sabotage probe.
  double exponent_scale = 1.0;
  // Use e^{-2t zeta_X} (the sign the proof produces) instead of e^{2t zeta_X}.
  bool proof_sign = false;
};

// Constants of the model as the checks use them. K1 is NaN when no Lipschitz-case formula applies.
ModelConstants derive_constants(const OperatorPair& pair, const Drift& drift);

// Throws UnsupportedRegime when the drift does not meet the regime's hypotheses.
void require_regime(const CheckSpec& spec);

// Coefficient c in exp(p c ||h||_C^2 / (t (p-1))): K1^2 or e^{+-2 t zeta_X}.
double harnack_coefficient(const CheckSpec& spec, const ModelConstants& consts, double t);

struct HarnackGrid {
  Vec ps;
  Vec ts;
  std::vector<Vec> hs;
  std::vector<Regime> regimes;
};

// Every (regime, p, t, h) combination from one shared simulation of x and x + h for all h.
std::vector<HarnackReport> harnack_sweep(const CheckSpec& base, const HarnackGrid& grid);

HarnackReport check_harnack_lipschitz(const CheckSpec& spec);
HarnackReport check_harnack_dissipative(const CheckSpec& spec);
HarnackReport check_harnack(const CheckSpec& spec);

// Additive report; details carry the power-form consistency at exponent `limit_p`.
HarnackReport check_log_harnack(const CheckSpec& spec, double limit_p = 64.0);

HarnackReport check_gradient_estimate(const CheckSpec& spec, double fd_step = 1e-2);

// Shared-noise gaps |P_delta(t)phi(x) - P(t)phi(x)| against the un-regularized drift.
HarnackReport check_yosida_semigroup(const CheckSpec& spec, const Vec& deltas);

// Cauchy gaps |P_{n_{i+1}}(t)phi(x) - P_{n_i}(t)phi(x)|; spec.setup must cover the largest dimension.
HarnackReport check_galerkin(const CheckSpec& spec, const std::vector<std::size_t>& dims);

// |P(t)f(x + h_m) - P(t)f(x)| along spec.h scaled to each Cameron-Martin norm in h_norms.
HarnackReport check_strong_feller(const CheckSpec& spec, const Vec& h_norms);

struct HyperFamilyMember {
  std::string name;
  Observable f;
};

// Constant, first and second Hermite polynomials in mode 1, and a steep sigmoid step in its upper tail.
std::vector<HyperFamilyMember> hermite_family(const OperatorPair& pair);

struct HypercontractivitySpec {
  std::string check_id = "hypercontractivity";
  SemigroupSetup setup;
  Vec t_grid;
  std::vector<HyperFamilyMember> family;
  std::size_t outer = 2000;
  std::size_t inner = 2000;
  double burn_in = 2.0;
  std::uint64_t seed = 0;
  double z = 3.0;
  // Pairs for the exponential-integrability bracket; 0 skips it.
  std::size_t bracket_pairs = 0;
};

HarnackReport check_hypercontractivity(const HypercontractivitySpec& spec);

struct ExpIntegrabilityBracket {
  double eps_star = 0.0;
  double below_eps = 0.0;
  double below_mean = 0.0;
  // Closed form when the drift is zero, NaN otherwise.
  double below_exact = 0.0;
  double below_change = 0.0;
  double above_eps = 0.0;
  Vec sizes;
  Vec above_means;
  double above_growth = 0.0;
  bool converges_below = false;
  bool diverges_above = false;
};

// E exp(eps ||X - Y||_C^2) for X, Y independent from the sampled invariant law, at eps*/2 and 2 eps*.
ExpIntegrabilityBracket exp_integrability_bracket(const SemigroupSetup& setup, std::size_t pairs, double burn_in,
                                                  std::uint64_t seed);

}  // namespace harnack
