#include <cmath>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "harnack/config.hpp"
#include "harnack/runner.hpp"
#include "harnack/semigroup.hpp"
#include "harnack/spectral_model.hpp"

namespace {

int print_oracle(const std::vector<double>& times, std::size_t mode, std::size_t n, double alpha, double beta,
                 double x0, double omega) {
  using namespace harnack;
  if (mode < 1 || mode > n) {
    std::cerr << "--mode must lie in 1.." << n << "\n";
    return 2;
  }
  const OperatorPair pair = build_pair(dirichlet_spectrum(n), alpha, beta);
  const std::size_t k = mode - 1;
  const Vec x = scaled(unit_vector(n, k), x0);
  const Vec d = unit_vector(n, k);
  const double a = pair.a()[k];
  const double c = pair.c()[k];
  nlohmann::json rows = nlohmann::json::array();
  for (double t : times) {
    const GaussianProjection g = ou_projection(pair, x, d, t);
    rows.push_back({{"t", t},
                    {"mean", g.mean},
                    {"variance", g.variance},
                    {"decay", std::exp(-a * t)},
                    {"E_cos", ou_cosine_moment(pair, x, d, omega, 0.0, t, 1)},
                    {"E_cos2", ou_cosine_moment(pair, x, d, omega, 0.0, t, 2)},
                    {"E_cos4", ou_cosine_moment(pair, x, d, omega, 0.0, t, 4)}});
  }
  const nlohmann::json out{{"model", pair.id()},
                           {"mode", mode},
                           {"a", a},
                           {"c", c},
                           {"x", x0},
                           {"omega", omega},
                           {"stationary_variance", c / (2.0 * a)},
                           {"times", rows}};
  std::cout << out.dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Monte Carlo verification of Harnack-type inequalities for Galerkin-truncated SPDEs"};
  app.require_subcommand(1);

  harnack::RunOptions opt;
  std::string config;
  std::uint64_t seed = 0;
  int threads = 0;
  auto* run = app.add_subcommand("run", "run the checks declared in a TOML config");
  run->add_option("config", config, "config file")->required();
  auto* seed_opt = run->add_option("--seed", seed, "override the master seed");
  run->add_flag("--strict", opt.strict, "treat INCONCLUSIVE verdicts as failures");
  run->add_flag("--proof-sign", opt.proof_sign, "use e^{-2t zeta_X} in dissipative factors");
  run->add_option("--out-dir", opt.out_dir, "output directory")->capture_default_str();
  auto* threads_opt = run->add_option("--threads", threads, "OpenMP thread count")->check(CLI::PositiveNumber);

  auto* list = app.add_subcommand("list-checks", "list the available check types");

  auto* oracle = app.add_subcommand("oracle", "closed-form reference values");
  oracle->require_subcommand(1);
  std::vector<double> times;
  std::size_t mode = 1, n = 16;
  double alpha = 0.5, beta = 1.0, x0 = 1.0, omega = 1.0;
  auto* ou = oracle->add_subcommand("ou", "zero-drift Ornstein-Uhlenbeck mode statistics");
  ou->add_option("--t", times, "times")->required()->check(CLI::NonNegativeNumber);
  ou->add_option("--mode", mode, "mode index, 1-based")->required();
  ou->add_option("--n", n, "truncation dimension")->capture_default_str();
  ou->add_option("--alpha", alpha, "alpha")->capture_default_str();
  ou->add_option("--beta", beta, "beta")->capture_default_str();
  ou->add_option("--x", x0, "initial coordinate along the mode")->capture_default_str();
  ou->add_option("--omega", omega, "cosine frequency")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (*run) {
    if (*seed_opt) opt.seed = seed;
    if (*threads_opt) opt.threads = threads;
    return harnack::run_command(config, opt, std::cout, std::cerr);
  }
  if (*list) {
    for (const auto& [name, what] : harnack::check_catalogue()) std::cout << name << "\t" << what << "\n";
    return 0;
  }
  if (*ou) {
    try {
      return print_oracle(times, mode, n, alpha, beta, x0, omega);
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << "\n";
      return 2;
    }
  }
  return 0;
}
