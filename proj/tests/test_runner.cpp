#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"

#include "harnack/config.hpp"
#include "harnack/errors.hpp"
#include "harnack/rng.hpp"
#include "harnack/runner.hpp"

using namespace harnack;
namespace fs = std::filesystem;

namespace {

const std::string kHead = R"(
[run]
name = "t"
seed = 99

[model]
spectrum = "dirichlet"
n = 8
alpha = 0.5
beta = 1.0

[drift]
kind = "zero"
)";

const std::string kSmall = kHead + R"(
[checks.zeta]
type = "ou_oracle"
t = [0.5, 1.0]
x_mode = 1
M = 4000
observable = { kind = "cosine", mode = 1 }

[checks.alpha]
type = "harnack"
regime = ["lipschitz", "dissipative"]
p = [2, 4]
t = 0.5
h_norm = [0.5, 1.0]
x_mode = 1
M = 4000
observable = { kind = "cosine", mode = 1, omega = 10.0 }
)";

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("harnack_runner_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

RunOutcome run_text(const std::string& text, const fs::path& dir, int threads, std::optional<std::uint64_t> seed = {}) {
  RunOptions o;
  o.out_dir = dir.string();
  o.threads = threads;
  o.seed = seed;
  std::ostringstream log;
  return execute(parse_config(text), o, log);
}

}  // namespace

TEST_CASE("configuration parsing") {
  const RunConfig c = parse_config(kSmall);
  CHECK(c.name == "t");
  CHECK(c.seed == 99);
  CHECK(c.pair.dim() == 8);
  CHECK(c.drift.is_zero());
  REQUIRE(c.checks.size() == 2);
  CHECK(c.checks[0].name == "alpha");
  CHECK(c.checks[1].name == "zeta");
  CHECK(c.checks[0].regimes.size() == 2);
  CHECK(c.checks[0].h_norms == Vec{0.5, 1.0});
  CHECK(cm_norm(c.pair, c.checks[0].h_direction) == doctest::Approx(1.0));
  CHECK(c.checks[1].ts == Vec{0.5, 1.0});
  CHECK(check_seed(c.checks[1], 99) == derive_seed(99, "zeta"));
}

TEST_CASE("configuration errors name the problem") {
  CHECK_THROWS_WITH_AS(parse_config(kHead + "[checks.a]\ntype = \"harnack\"\nbogus_key = 1\n"),
                       doctest::Contains("unknown key 'bogus_key'"), ConfigError);
  CHECK_THROWS_AS(parse_config(kHead + "[checks.a]\ntype = \"nonsense\"\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[run]\nname = \"x\"\nextra = 2\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("this is = = not toml"), ConfigError);
  CHECK_THROWS_AS(load_config("/nonexistent/harnack.toml"), ConfigError);
}

TEST_CASE("power profile is a truncated unit vector") {
  const Vec u = power_profile(4096, 1.0);
  CHECK(norm(u) == doctest::Approx(1.0).epsilon(1e-3));
  CHECK(norm(u) < 1.0);
  CHECK(u[0] / u[1] == doctest::Approx(2.0));
}

TEST_CASE("an empty check list exits cleanly") {
  const fs::path dir = scratch("empty");
  const RunOutcome o = run_text(kHead, dir, 1);
  CHECK(o.exit_code == 0);
  CHECK(slurp(dir / "summary.csv") == "id,lhs,rhs,factor,margin,ci,verdict\n");
  const auto j = nlohmann::json::parse(slurp(dir / "report.json"));
  CHECK(j["exit_code"] == 0);
  CHECK(j["checks"].empty());
}

TEST_CASE("summary is byte-identical across thread counts") {
  const fs::path a = scratch("det1"), b = scratch("det2"), c = scratch("det3");
  const RunOutcome oa = run_text(kSmall, a, 1);
  run_text(kSmall, b, 2);
  CHECK(oa.exit_code == 0);
  CHECK(oa.passed + oa.inconclusive == 10);
  const std::string sa = slurp(a / "summary.csv");
  CHECK(sa == slurp(b / "summary.csv"));
  run_text(kSmall, c, 1, 1234);
  CHECK(sa != slurp(c / "summary.csv"));
  const auto j = nlohmann::json::parse(slurp(a / "report.json"));
  CHECK(j["checks"][0]["name"] == "alpha");
  CHECK(j["master_seed"] == 99);
}

TEST_CASE("exit codes") {
  const fs::path dir = scratch("codes");
  std::ostringstream out, err;
  CHECK(run_command(std::string(HARNACK_SOURCE_DIR) + "/tests/data/unknown_key.toml", {.out_dir = dir.string()}, out, err) == 2);
  CHECK(err.str().find("unknown key 'bogus_key'") != std::string::npos);

  const fs::path lip_zero = dir / "lip_zero.toml";
  fs::create_directories(dir);
  std::ofstream(lip_zero) << kHead << "[checks.lip]\ntype = \"harnack\"\nregime = \"lipschitz\"\n"
                     << "x_mode = 1\nM = 100\nobservable = { kind = \"cosine\", mode = 1 }\n";
  std::ofstream(dir / "cubic.toml") << std::string(kHead).replace(kHead.find("kind = \"zero\""), 13,
                                                                    "kind = \"cubic\"\nkappa = 5.0\nzeta_F = 0.0\nu_profile = 1.0")
                                    << "[checks.lip]\ntype = \"harnack\"\nregime = \"lipschitz\"\n"
                                    << "x_mode = 1\nM = 100\nobservable = { kind = \"cosine\", mode = 1 }\n";
  std::ostringstream o2, e2;
  CHECK(run_command((dir / "cubic.toml").string(), {.out_dir = (dir / "o").string()}, o2, e2) == 2);

  // Shrinking the exponent on a steep observable must be caught.
  std::ofstream(dir / "sab.toml") << std::string(kHead).replace(kHead.find("kind = \"zero\""), 13,
                                                                  "kind = \"composed\"\nL_G = 1.0")
                                  << "[checks.s]\ntype = \"harnack\"\nregime = \"dissipative\"\nt = 0.25\n"
                                  << "exponent_scale = 0.01\nx = [0.0]\nM = 20000\n"
                                  << "observable = { kind = \"product_sigmoid\", modes = [1], omega = 50.0, center = 0.09 }\n";
  std::ostringstream o3, e3;
  CHECK(run_command((dir / "sab.toml").string(), {.out_dir = (dir / "s").string()}, o3, e3) == 1);
  std::ostringstream o4, e4;
  CHECK(run_command(lip_zero.string(), {.out_dir = (dir / "b").string()}, o4, e4) == 0);
}
