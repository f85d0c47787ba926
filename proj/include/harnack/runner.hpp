#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "harnack/checks.hpp"
#include "harnack/config.hpp"

namespace harnack {

struct RunOptions {
  std::optional<std::uint64_t> seed;
  bool strict = false;
  bool proof_sign = false;
  std::optional<int> threads;
  std::string out_dir = "harnack-out";
};

struct CheckOutcome {
  std::string name;
  CheckType type = CheckType::harnack;
  std::uint64_t seed = 0;
  std::vector<HarnackReport> reports;
};

struct RunOutcome {
  std::vector<CheckOutcome> checks;
  std::size_t passed = 0;
  std::size_t failed = 0;
  std::size_t inconclusive = 0;
  int exit_code = 0;
};

std::uint64_t check_seed(const CheckConfig& c, std::uint64_t master);

// Runs one configured check; reports come back in a fixed order.
std::vector<HarnackReport> run_check(const RunConfig& cfg, const CheckConfig& c, std::uint64_t seed, bool proof_sign);

// Runs every check in name order and writes report.json, summary.csv and plots/ under opt.out_dir.
RunOutcome execute(const RunConfig& cfg, const RunOptions& opt, std::ostream& log, const std::string& source = "");

std::string summary_csv(const std::vector<CheckOutcome>& checks);

// Exit codes: 0 no FAIL, 1 FAIL (or INCONCLUSIVE under strict), 2 configuration error, 3 runtime error.
int run_command(const std::string& config_path, const RunOptions& opt, std::ostream& out, std::ostream& err);

}  // namespace harnack
