#include "harnack/runner.hpp"

#include <omp.h>

#include <cctype>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

#include "json.hpp"

#include "harnack/errors.hpp"
#include "harnack/rng.hpp"
#include "harnack/semigroup.hpp"

namespace harnack {

namespace {

std::string g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string short_num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) out += ch == '"' ? std::string("\"\"") : std::string(1, ch);
  return out + "\"";
}

std::string file_stem(const std::string& s) {
  std::string out;
  for (char ch : s) out += (std::isalnum(static_cast<unsigned char>(ch)) || ch == '-' || ch == '.') ? ch : '_';
  return out;
}

CheckSpec base_spec(const RunConfig& cfg, const CheckConfig& c, std::uint64_t seed, bool proof_sign) {
  CheckSpec s;
  s.check_id = c.name;
  s.setup = SemigroupSetup{cfg.pair, cfg.drift, cfg.dt, cfg.scheme};
  s.x = c.x;
  s.observable = c.observable;
  s.M = c.M;
  s.seed = seed;
  s.z = c.z;
  s.exponent_scale = c.exponent_scale;
  s.proof_sign = c.proof_sign.value_or(proof_sign);
  s.t = c.ts.front();
  s.regime = c.regimes.front();
  return s;
}

HarnackReport ou_oracle_report(const CheckSpec& s) {
  const Observable& obs = s.observable;
  const Ridge& rd = obs.ridges().front();
  const Vec d = resized(rd.direction, s.setup.pair.dim());
  HarnackReport r;
  r.id = s.check_id + "[t=" + short_num(s.t) + "]";
  r.form = BoundForm::convergence;
  r.lhs = estimate_Pt(s.setup, obs, s.x, s.t, s.M, s.seed);
  const double exact = obs.offset() + obs.amplitude() * ou_cosine_moment(s.setup.pair, s.x, d, rd.omega, rd.theta, s.t, 1);
  r.rhs = {exact, 0.0, s.M, s.seed};
  const double err = std::abs(r.lhs.mean - exact);
  r.factor = 1.0;
  r.margin = s.z * r.lhs.std_error - err;
  r.ci_margin = r.lhs.std_error;
  r.verdict = err <= s.z * r.lhs.std_error ? Verdict::pass : Verdict::fail;
  r.details = {{"t", s.t}, {"exact", exact}, {"abs_error", err}, {"stderr", r.lhs.std_error},
               {"observable", obs.id()}, {"M", s.M}, {"seed", s.seed}};
  return r;
}

HarnackReport generator_report(const RunConfig& cfg, const CheckConfig& c, const CheckSpec& s) {
  const GeneratorReport g = generator_consistency(s.setup, s.observable, s.x, c.dts, c.m_scale, s.seed);
  HarnackReport r;
  r.id = c.name;
  r.form = BoundForm::convergence;
  PlotTable table{"generator", {"dt", "M", "quotient", "quotient_stderr", "generator", "error"}, {}};
  for (const auto& row : g.rows)
    table.rows.push_back({row.dt, double(row.M), row.quotient.mean, row.quotient.std_error, row.generator, row.error});
  bool in_band = !g.error_ratios.empty();
  for (double q : g.error_ratios) in_band = in_band && q >= 1.5 && q <= 2.5;
  const auto& last = g.rows.back();
  r.lhs = {last.error, last.quotient.std_error, last.M, s.seed};
  r.rhs = {last.generator, 0.0, last.M, s.seed};
  r.factor = 1.0;
  r.margin = s.z * last.quotient.std_error - last.error;
  r.ci_margin = last.quotient.std_error;
  r.verdict = in_band ? Verdict::pass : Verdict::inconclusive;
  r.plots.push_back(std::move(table));
  r.details = {{"dts", c.dts},       {"m_scale", c.m_scale},       {"error_ratios", g.error_ratios},
               {"decreasing", g.decreasing}, {"observable", s.observable.id()}, {"drift", cfg.drift.id()},
               {"seed", s.seed}};
  return r;
}

}  // namespace

std::uint64_t check_seed(const CheckConfig& c, std::uint64_t master) {
  return c.seed ? *c.seed : derive_seed(master, c.name);
}

std::vector<HarnackReport> run_check(const RunConfig& cfg, const CheckConfig& c, std::uint64_t seed, bool proof_sign) {
  CheckSpec s = base_spec(cfg, c, seed, proof_sign);
  std::vector<HarnackReport> out;
  switch (c.type) {
    case CheckType::ou_oracle:
      for (double t : c.ts) {
        s.t = t;
        out.push_back(ou_oracle_report(s));
      }
      break;
    case CheckType::harnack: {
      HarnackGrid grid{c.ps, c.ts, {}, c.regimes};
      for (double hn : c.h_norms) grid.hs.push_back(scaled(c.h_direction, hn));
      out = harnack_sweep(s, grid);
      break;
    }
    case CheckType::log_harnack:
      for (Regime r : c.regimes)
        for (double t : c.ts)
          for (double hn : c.h_norms) {
            s.regime = r;
            s.t = t;
            s.h = scaled(c.h_direction, hn);
            s.check_id = c.name + "[" + regime_name(r) + ",t=" + short_num(t) + ",h=" + short_num(hn) + "]";
            out.push_back(check_log_harnack(s, c.limit_p));
          }
      break;
    case CheckType::gradient:
      for (Regime r : c.regimes)
        for (double t : c.ts) {
          s.regime = r;
          s.t = t;
          s.check_id = c.name + "[" + regime_name(r) + ",t=" + short_num(t) + "]";
          out.push_back(check_gradient_estimate(s, c.fd_step));
        }
      break;
    case CheckType::yosida:
      out.push_back(check_yosida_semigroup(s, c.deltas));
      break;
    case CheckType::galerkin:
      out.push_back(check_galerkin(s, c.dims));
      break;
    case CheckType::strong_feller:
      s.h = c.h_direction;
      out.push_back(check_strong_feller(s, c.h_norms));
      break;
    case CheckType::hypercontractivity: {
      HypercontractivitySpec hs;
      hs.check_id = c.name;
      hs.setup = s.setup;
      hs.t_grid = c.t_grid;
      hs.family = hermite_family(cfg.pair);
      hs.outer = c.outer;
      hs.inner = c.inner;
      hs.burn_in = c.burn_in;
      hs.seed = seed;
      hs.z = c.z;
      hs.bracket_pairs = c.bracket_pairs;
      out.push_back(check_hypercontractivity(hs));
      break;
    }
    case CheckType::generator:
      out.push_back(generator_report(cfg, c, s));
      break;
  }
  return out;
}

std::string summary_csv(const std::vector<CheckOutcome>& checks) {
  std::string s = "id,lhs,rhs,factor,margin,ci,verdict\n";
  for (const auto& c : checks)
    for (const auto& r : c.reports)
      s += csv_field(r.id) + "," + g17(r.lhs.mean) + "," + g17(r.rhs.mean) + "," + g17(r.factor) + "," +
           g17(r.margin) + "," + g17(r.ci_margin) + "," + verdict_name(r.verdict) + "\n";
  return s;
}

RunOutcome execute(const RunConfig& cfg, const RunOptions& opt, std::ostream& log, const std::string& source) {
  const int threads = opt.threads.value_or(cfg.threads);
  if (threads > 0) omp_set_num_threads(threads);
  const std::uint64_t master = opt.seed.value_or(cfg.seed);

  RunOutcome outcome;
  for (const CheckConfig& c : cfg.checks) {
    CheckOutcome co;
    co.name = c.name;
    co.type = c.type;
    co.seed = check_seed(c, master);
    co.reports = run_check(cfg, c, co.seed, opt.proof_sign);
    for (const auto& r : co.reports) {
      log << verdict_name(r.verdict) << "  " << r.id << "  margin=" << short_num(r.margin)
          << " ci=" << short_num(r.ci_margin) << "\n";
      switch (r.verdict) {
        case Verdict::pass:
          ++outcome.passed;
          break;
        case Verdict::fail:
          ++outcome.failed;
          break;
        case Verdict::inconclusive:
          ++outcome.inconclusive;
          break;
      }
    }
    outcome.checks.push_back(std::move(co));
  }
  outcome.exit_code = outcome.failed > 0 || (opt.strict && outcome.inconclusive > 0) ? 1 : 0;

  namespace fs = std::filesystem;
  const fs::path dir(opt.out_dir);
  fs::create_directories(dir / "plots");

  nlohmann::json checks = nlohmann::json::array();
  for (const auto& co : outcome.checks) {
    nlohmann::json reports = nlohmann::json::array();
    for (const auto& r : co.reports) {
      reports.push_back(report_to_json(r));
      for (const auto& p : r.plots) {
        std::ofstream f(dir / "plots" / (file_stem(r.id) + "__" + p.name + ".csv"));
        for (std::size_t i = 0; i < p.columns.size(); ++i) f << (i ? "," : "") << p.columns[i];
        f << "\n";
        for (const auto& row : p.rows) {
          for (std::size_t i = 0; i < row.size(); ++i) f << (i ? "," : "") << g17(row[i]);
          f << "\n";
        }
      }
    }
    checks.push_back({{"name", co.name}, {"type", check_type_name(co.type)}, {"seed", co.seed}, {"reports", reports}});
  }
  const nlohmann::json report{{"name", cfg.name},
                              {"config", source},
                              {"master_seed", master},
                              {"model", cfg.pair.id()},
                              {"model_hash", cfg.pair.hash()},
                              {"drift", cfg.drift.id()},
                              {"dt", cfg.dt},
                              {"scheme", scheme_name(cfg.scheme)},
                              {"strict", opt.strict},
                              {"proof_sign", opt.proof_sign},
                              {"checks", checks},
                              {"counts", {{"PASS", outcome.passed}, {"FAIL", outcome.failed}, {"INCONCLUSIVE", outcome.inconclusive}}},
                              {"warnings", outcome.inconclusive > 0},
                              {"exit_code", outcome.exit_code}};
  std::ofstream(dir / "report.json") << report.dump(2) << "\n";
  std::ofstream(dir / "summary.csv") << summary_csv(outcome.checks);
  return outcome;
}

int run_command(const std::string& config_path, const RunOptions& opt, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  try {
    cfg = load_config(config_path);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return 2;
  }
  try {
    const RunOutcome o = execute(cfg, opt, out, config_path);
    out << o.passed << " PASS, " << o.failed << " FAIL, " << o.inconclusive << " INCONCLUSIVE\n";
    if (o.inconclusive > 0) err << "warning: " << o.inconclusive << " inconclusive verdict(s)\n";
    return o.exit_code;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return 2;
  } catch (const UnsupportedRegime& e) {
    err << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    err << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "runtime error: " << e.what() << "\n";
    return 3;
  }
}

}  // namespace harnack
