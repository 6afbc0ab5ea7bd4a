#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "msq/dispersion.hpp"
#include "msq/evolution.hpp"
#include "msq/grid.hpp"

namespace msq {

struct SymbolSpec {
  std::string name = "quadratic";
  std::map<std::string, double> coeffs;
};

// One experiment, read from a JSON file. Unknown keys are rejected.
struct ExperimentConfig {
  SymbolSpec symbol_x, symbol_y;
  std::size_t n = 1024;
  double L = 256.0;
  std::string datum_kind = "focused_gaussian";  // focused_gaussian | gaussian | zero
  double datum_width = 2.0;
  double eps = 0.1;
  cplx lambda{1.0, 0.0};
  double t_max = 30.0;
  double dt0 = 0.05;
  double dt_growth = 0.02;
  double r1 = 1.0, r2 = 2.0;
  std::size_t n_diag = 128;
  double Y = 0.0;  // 0: sized from the datum's spectrum
  int checkpoints_per_decade = 20;
  double leak_tol = 1e-8;
  double cauchy_t_lo = 5.0;     // Cauchy pairs (t, 2t) with t in [cauchy_t_lo, t_max/2]
  double residual_t_lo = 10.0;  // profile residuals on [residual_t_lo, t_max/4]
  bool snapshots = true;
  std::string output_dir = "msq_run";
  std::uint64_t seed = 0x5eed;

  static ExperimentConfig from_json(const nlohmann::json& j);
  static ExperimentConfig load(const std::string& path);
  nlohmann::json to_json() const;
  void validate() const;

  DispersionSymbol2D symbol() const;
  ComplexField datum(const DispersionSymbol2D& sym) const;
};

// Reference configurations used by verify.
ExperimentConfig quick_reference(cplx lambda);
ExperimentConfig full_reference(cplx lambda);

struct RateRow {
  std::string name;
  double slope = 0, intercept = 0, stderr_slope = 0;
  std::size_t n = 0;
  double t_lo = 0, t_hi = 0;
  double lo = -INFINITY, hi = INFINITY;  // acceptance band on the slope
  std::string status;                    // PASS | FAIL | INFO | SKIP
  std::string note;
};

// Re-fits every monitored series from the CSV files in a run directory.
// MissingColumns if trajectory.csv is absent or lacks a required column.
std::vector<RateRow> rates(const std::string& run_dir);
void write_rates_csv(const std::string& path, const std::vector<RateRow>& rows);

struct RunResult {
  nlohmann::json manifest;
  std::string run_dir;
  Trajectory trajectory;
};

// Executes the pipeline and writes trajectory.csv, z_cauchy.csv,
// residual.csv, rates.csv, snapshots, profile files and manifest.json.
RunResult run(const ExperimentConfig& cfg);

// Checks that every file listed in the manifest exists with its checksum.
bool verify_manifest(const std::string& run_dir, std::string* why = nullptr);

std::string sha256_file(const std::string& path);

struct OracleReport {
  std::vector<double> t, rel_err;  // against the periodized closed form
  std::vector<double> rel_err_free;  // against the closed form on R^2 (domain truncation included)
  double max_rel_err = 0;
  double seconds = 0;
};

// lambda = 0, F = |xi|^2, u0 = exp(-|x|^2) compared with the exact solution.
OracleReport oracle(std::size_t n = 4096, double L = 512.0, const std::vector<double>& times = {2, 10, 30});

struct CriterionResult {
  int id = 0;
  std::string name;
  bool pass = false;
  std::string measured;
  std::string threshold;
  double seconds = 0;

  std::string line() const;
};

struct VerifyOptions {
  bool full = false;
  std::vector<int> only;  // empty: every criterion of the mode
  ExperimentConfig base = quick_reference(cplx(1.0, 0.0));
  std::string work_dir = "msq_verify";
  std::function<void(const CriterionResult&)> on_result;
};

// Runs the acceptance suite. Quick mode covers criteria 1-10 and 13, full
// mode adds 11 and 12. Configuration errors propagate as exceptions.
std::vector<CriterionResult> verify(const VerifyOptions& opt);

struct WeylSelftestRow {
  double h = 0, norm_l2 = 0, norm_linf = 0, moyal_remainder = 0;
};
std::vector<WeylSelftestRow> weyl_selftest();

}  // namespace msq
