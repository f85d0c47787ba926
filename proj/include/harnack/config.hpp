#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "harnack/checks.hpp"
#include "harnack/drift.hpp"
#include "harnack/observable.hpp"
#include "harnack/sde.hpp"
#include "harnack/spectral_model.hpp"

namespace harnack {

enum class CheckType {
  ou_oracle,
  harnack,
  log_harnack,
  gradient,
  yosida,
  galerkin,
  strong_feller,
  hypercontractivity,
  generator
};

std::string check_type_name(CheckType t);
CheckType parse_check_type(const std::string& name);
// One line per check type, for `list-checks`.
std::vector<std::pair<std::string, std::string>> check_catalogue();

struct CheckConfig {
  std::string name;
  CheckType type = CheckType::harnack;
  std::vector<Regime> regimes{Regime::dissipative};
  Vec ps{2.0};
  Vec ts{1.0};
  Vec h_norms{1.0};
  // Direction of h; scaled to each entry of h_norms in Cameron-Martin norm.
  Vec h_direction;
  Vec x;
  Observable observable = Observable::constant(1.0);
  std::size_t M = 100000;
  std::optional<std::uint64_t> seed;
  double z = 3.0;
  double exponent_scale = 1.0;
  std::optional<bool> proof_sign;
  double fd_step = 1e-2;
  double limit_p = 64.0;
  Vec deltas;
  std::vector<std::size_t> dims;
  Vec t_grid;
  std::size_t outer = 2000;
  std::size_t inner = 2000;
  double burn_in = 2.0;
  std::size_t bracket_pairs = 0;
  Vec dts;
  double m_scale = 1.0;
};

struct RunConfig {
  std::string name = "run";
  std::uint64_t seed = 0;
  int threads = 0;
  double dt = 1.0 / 64.0;
  Scheme scheme = Scheme::exponential;
  OperatorPair pair = build_pair(dirichlet_spectrum(16), 0.5, 1.0);
  Drift drift = Drift::zero();
  // Sorted by name.
  std::vector<CheckConfig> checks;
};

// Throws ConfigError naming the offending key or value.
RunConfig parse_config(const std::string& text, const std::string& source = "<string>");
RunConfig load_config(const std::string& path);

// u_k = k^{-s} / sqrt(zeta(2s)), the truncation of a unit vector.
Vec power_profile(std::size_t n, double s);

}  // namespace harnack
