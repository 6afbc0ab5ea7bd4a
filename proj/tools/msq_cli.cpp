#include <CLI11.hpp>

#include <cstdio>
#include <iostream>

#include "msq/error.hpp"
#include "msq/runner.hpp"
#include "msq/version.hpp"

using namespace msq;

namespace {

int run_cmd(const std::string& config_path) {
  ExperimentConfig cfg = ExperimentConfig::load(config_path);
  RunResult r = run(cfg);
  std::printf("run complete: %s (%zu steps, %zu checkpoints)\n", r.run_dir.c_str(), r.trajectory.steps,
              r.trajectory.times.size());
  return kExitOk;
}

int verify_cmd(bool full, const std::string& config_path, const std::vector<int>& only, const std::string& work_dir) {
  VerifyOptions opt;
  opt.full = full;
  opt.only = only;
  opt.work_dir = work_dir;
  if (!config_path.empty()) opt.base = ExperimentConfig::load(config_path);
  opt.on_result = [](const CriterionResult& r) {
    std::printf("%s\n", r.line().c_str());
    std::fflush(stdout);
  };
  auto results = verify(opt);
  std::size_t failed = 0;
  for (const auto& r : results) failed += r.pass ? 0 : 1;
  std::printf("%zu/%zu criteria passed\n", results.size() - failed, results.size());
  return failed ? kExitAcceptance : kExitOk;
}

int rates_cmd(const std::string& dir) {
  auto rows = rates(dir);
  std::printf("%-16s %10s %10s %4s %10s %10s  %s\n", "series", "slope", "stderr", "n", "t_lo", "t_hi", "status");
  for (const auto& r : rows)
    std::printf("%-16s %10.4f %10.2e %4zu %10.4g %10.4g  %s%s%s\n", r.name.c_str(), r.slope, r.stderr_slope, r.n,
                r.t_lo, r.t_hi, r.status.c_str(), r.note.empty() ? "" : " ", r.note.c_str());
  return kExitOk;
}

int oracle_cmd(const std::string& config_path) {
  std::size_t n = 4096;
  double L = 512;
  if (!config_path.empty()) {
    ExperimentConfig cfg = ExperimentConfig::load(config_path);
    n = cfg.n;
    L = cfg.L;
  }
  OracleReport o = oracle(n, L);
  std::printf("%8s %14s %14s\n", "t", "rel_err", "rel_err_R2");
  for (std::size_t i = 0; i < o.t.size(); ++i)
    std::printf("%8.3g %14.3e %14.3e\n", o.t[i], o.rel_err[i], o.rel_err_free[i]);
  std::printf("max relative L2 deviation %.3e (%.1f s)\n", o.max_rel_err, o.seconds);
  return o.max_rel_err <= 1e-10 ? kExitOk : kExitAcceptance;
}

int weyl_cmd() {
  std::printf("h,norm_l2_l2,norm_l2_linf,moyal_remainder\n");
  for (const auto& r : weyl_selftest())
    std::printf("%.17g,%.17g,%.17g,%.17g\n", r.h, r.norm_l2, r.norm_linf, r.moyal_remainder);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Modified scattering numerics for dispersive equations with |u|u nonlinearity"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  std::string config, work_dir = "msq_verify", dir;
  bool quick = false, full = false;
  std::vector<int> only;

  auto* run_sc = app.add_subcommand("run", "Run one experiment");
  run_sc->add_option("--config", config, "JSON configuration file")->required();

  auto* verify_sc = app.add_subcommand("verify", "Run the acceptance suite");
  verify_sc->add_flag("--quick", quick, "Quick scale (default)");
  verify_sc->add_flag("--full", full, "Add the full-scale criteria");
  verify_sc->add_option("--config", config, "Override the reference configuration");
  verify_sc->add_option("--only", only, "Criterion numbers to run");
  verify_sc->add_option("--work-dir", work_dir, "Directory for reference runs");

  auto* rates_sc = app.add_subcommand("rates", "Re-fit decay rates of a run directory");
  rates_sc->add_option("dir", dir, "Run directory")->required();

  auto* oracle_sc = app.add_subcommand("oracle", "Compare free evolution with the exact Gaussian");
  oracle_sc->add_option("--config", config, "Configuration supplying grid.n and grid.L");

  app.add_subcommand("weyl-selftest", "Projector norms and Moyal remainders versus h");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*run_sc) return run_cmd(config);
    if (*verify_sc) {
      if (quick && full) throw Error(ErrorKind::Config, "--quick and --full are exclusive");
      return verify_cmd(full, config, only, work_dir);
    }
    if (*rates_sc) return rates_cmd(dir);
    if (*oracle_sc) return oracle_cmd(config);
    return weyl_cmd();
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitNumerical;
  }
}
