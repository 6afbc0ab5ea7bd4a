#include "msq/runner.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>

#include "msq/error.hpp"
#include "msq/fft.hpp"
#include "msq/fit.hpp"
#include "msq/scattering.hpp"
#include "msq/version.hpp"
#include "msq/weyl.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace msq {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Schema helpers --------------------------------------------------------------

void reject_unknown(const json& j, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw Error(ErrorKind::Config, where + " must be an object");
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!ok.count(it.key())) throw Error(ErrorKind::Config, "unknown key '" + it.key() + "' in " + where);
}

double get_number(const json& j, const char* key, double dflt, const std::string& where) {
  if (!j.contains(key)) return dflt;
  if (!j[key].is_number()) throw Error(ErrorKind::Config, where + "." + key + " must be a number");
  return j[key].get<double>();
}

std::size_t get_count(const json& j, const char* key, std::size_t dflt, const std::string& where) {
  if (!j.contains(key)) return dflt;
  if (!j[key].is_number_integer() || j[key].get<long long>() < 0)
    throw Error(ErrorKind::Config, where + "." + key + " must be a non-negative integer");
  return j[key].get<std::size_t>();
}

SymbolSpec parse_symbol(const json& j, const std::string& where) {
  reject_unknown(j, where, {"name", "coeffs"});
  SymbolSpec s;
  if (!j.contains("name") || !j["name"].is_string()) throw Error(ErrorKind::Config, where + ".name must be a string");
  s.name = j["name"].get<std::string>();
  if (j.contains("coeffs")) {
    if (!j["coeffs"].is_object()) throw Error(ErrorKind::Config, where + ".coeffs must be an object");
    for (auto it = j["coeffs"].begin(); it != j["coeffs"].end(); ++it) {
      if (!it->is_number()) throw Error(ErrorKind::Config, where + ".coeffs." + it.key() + " must be a number");
      s.coeffs[it.key()] = it->get<double>();
    }
  }
  return s;
}

json symbol_json(const SymbolSpec& s) {
  json c = json::object();
  for (const auto& [k, v] : s.coeffs) c[k] = v;
  return json{{"name", s.name}, {"coeffs", c}};
}

bool power_of_two(std::size_t n) { return n >= 8 && (n & (n - 1)) == 0; }

// CSV ----------------------------------------------------------------------------

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& cols) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path);
  for (std::size_t c = 0; c < header.size(); ++c) out << (c ? "," : "") << header[c];
  out << "\n";
  std::size_t rows = cols.empty() ? 0 : cols[0].size();
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols.size(); ++c) out << (c ? "," : "") << fmt(cols[c][r]);
    out << "\n";
  }
}

struct Csv {
  std::vector<std::string> header;
  std::map<std::string, std::vector<double>> cols;
  bool present = false;

  const std::vector<double>& col(const std::string& name, const std::string& file) const {
    auto it = cols.find(name);
    if (it == cols.end()) throw Error(ErrorKind::MissingColumns, file + " lacks column '" + name + "'");
    return it->second;
  }
};

Csv read_csv(const std::string& path) {
  Csv csv;
  std::ifstream in(path);
  if (!in) return csv;
  csv.present = true;
  std::string line;
  if (!std::getline(in, line)) return csv;
  std::stringstream hs(line);
  for (std::string cell; std::getline(hs, cell, ',');) {
    csv.header.push_back(cell);
    csv.cols[cell];
  }
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ls(line);
    std::size_t c = 0;
    for (std::string cell; std::getline(ls, cell, ',') && c < csv.header.size(); ++c) {
      try {
        csv.cols[csv.header[c]].push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw Error(ErrorKind::Io, path + ": non-numeric cell '" + cell + "'");
      }
    }
    if (c != csv.header.size()) throw Error(ErrorKind::Io, path + ": ragged row");
  }
  return csv;
}

bool is_octave(double t) { return std::abs(std::log2(t) - std::round(std::log2(t))) < 1e-9; }

}  // namespace

// Config -----------------------------------------------------------------------

ExperimentConfig ExperimentConfig::from_json(const json& j) {
  reject_unknown(j, "config",
                 {"symbol", "grid", "datum", "eps", "lambda", "t_max", "stepper", "cutoff", "diagnostic",
                  "checkpoints_per_decade", "leak_tol", "analysis", "snapshots", "output_dir", "seed", "mode"});
  ExperimentConfig c;
  if (j.contains("symbol")) {
    const json& s = j["symbol"];
    if (s.is_object() && (s.contains("x") || s.contains("y"))) {
      reject_unknown(s, "symbol", {"x", "y"});
      if (!s.contains("x") || !s.contains("y")) throw Error(ErrorKind::Config, "symbol needs both x and y");
      c.symbol_x = parse_symbol(s["x"], "symbol.x");
      c.symbol_y = parse_symbol(s["y"], "symbol.y");
    } else {
      c.symbol_x = c.symbol_y = parse_symbol(s, "symbol");
    }
  }
  if (j.contains("grid")) {
    reject_unknown(j["grid"], "grid", {"n", "L"});
    c.n = get_count(j["grid"], "n", c.n, "grid");
    c.L = get_number(j["grid"], "L", c.L, "grid");
  }
  if (j.contains("datum")) {
    reject_unknown(j["datum"], "datum", {"kind", "width"});
    if (j["datum"].contains("kind")) {
      if (!j["datum"]["kind"].is_string()) throw Error(ErrorKind::Config, "datum.kind must be a string");
      c.datum_kind = j["datum"]["kind"].get<std::string>();
    }
    c.datum_width = get_number(j["datum"], "width", c.datum_width, "datum");
  }
  c.eps = get_number(j, "eps", c.eps, "config");
  if (j.contains("lambda")) {
    reject_unknown(j["lambda"], "lambda", {"re", "im"});
    c.lambda = cplx(get_number(j["lambda"], "re", 0.0, "lambda"), get_number(j["lambda"], "im", 0.0, "lambda"));
  }
  c.t_max = get_number(j, "t_max", c.t_max, "config");
  if (j.contains("stepper")) {
    reject_unknown(j["stepper"], "stepper", {"dt0", "dt_growth"});
    c.dt0 = get_number(j["stepper"], "dt0", c.dt0, "stepper");
    c.dt_growth = get_number(j["stepper"], "dt_growth", c.dt_growth, "stepper");
  }
  if (j.contains("cutoff")) {
    reject_unknown(j["cutoff"], "cutoff", {"r1", "r2"});
    c.r1 = get_number(j["cutoff"], "r1", c.r1, "cutoff");
    c.r2 = get_number(j["cutoff"], "r2", c.r2, "cutoff");
  }
  if (j.contains("diagnostic")) {
    reject_unknown(j["diagnostic"], "diagnostic", {"n", "Y"});
    c.n_diag = get_count(j["diagnostic"], "n", c.n_diag, "diagnostic");
    c.Y = get_number(j["diagnostic"], "Y", c.Y, "diagnostic");
  }
  c.checkpoints_per_decade =
      static_cast<int>(get_count(j, "checkpoints_per_decade", static_cast<std::size_t>(c.checkpoints_per_decade), "config"));
  c.leak_tol = get_number(j, "leak_tol", c.leak_tol, "config");
  if (j.contains("analysis")) {
    reject_unknown(j["analysis"], "analysis", {"cauchy_t_lo", "residual_t_lo"});
    c.cauchy_t_lo = get_number(j["analysis"], "cauchy_t_lo", c.cauchy_t_lo, "analysis");
    c.residual_t_lo = get_number(j["analysis"], "residual_t_lo", c.residual_t_lo, "analysis");
  }
  if (j.contains("snapshots")) {
    if (!j["snapshots"].is_boolean()) throw Error(ErrorKind::Config, "snapshots must be a boolean");
    c.snapshots = j["snapshots"].get<bool>();
  }
  if (j.contains("output_dir")) {
    if (!j["output_dir"].is_string()) throw Error(ErrorKind::Config, "output_dir must be a string");
    c.output_dir = j["output_dir"].get<std::string>();
  }
  if (j.contains("seed")) {
    if (!j["seed"].is_number_unsigned()) throw Error(ErrorKind::Config, "seed must be a non-negative integer");
    c.seed = j["seed"].get<std::uint64_t>();
  }
  if (j.contains("mode")) {
    static const std::set<std::string> modes{"run", "verify", "rates", "oracle", "weyl-selftest"};
    if (!j["mode"].is_string() || !modes.count(j["mode"].get<std::string>()))
      throw Error(ErrorKind::Config, "mode must be one of run, verify, rates, oracle, weyl-selftest");
  }
  c.validate();
  return c;
}

ExperimentConfig ExperimentConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open config " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::Config, path + ": " + e.what());
  }
  return from_json(j);
}

json ExperimentConfig::to_json() const {
  return json{{"symbol", {{"x", symbol_json(symbol_x)}, {"y", symbol_json(symbol_y)}}},
              {"grid", {{"n", n}, {"L", L}}},
              {"datum", {{"kind", datum_kind}, {"width", datum_width}}},
              {"eps", eps},
              {"lambda", {{"re", lambda.real()}, {"im", lambda.imag()}}},
              {"t_max", t_max},
              {"stepper", {{"dt0", dt0}, {"dt_growth", dt_growth}}},
              {"cutoff", {{"r1", r1}, {"r2", r2}}},
              {"diagnostic", {{"n", n_diag}, {"Y", Y}}},
              {"checkpoints_per_decade", checkpoints_per_decade},
              {"leak_tol", leak_tol},
              {"analysis", {{"cauchy_t_lo", cauchy_t_lo}, {"residual_t_lo", residual_t_lo}}},
              {"snapshots", snapshots},
              {"output_dir", output_dir},
              {"seed", seed}};
}

void ExperimentConfig::validate() const {
  auto bad = [](const std::string& m) { throw Error(ErrorKind::Config, m); };
  if (!power_of_two(n)) bad("grid.n must be a power of two >= 8");
  if (!(L > 0)) bad("grid.L must be positive");
  if (datum_kind != "focused_gaussian" && datum_kind != "gaussian" && datum_kind != "zero")
    bad("datum.kind must be focused_gaussian, gaussian or zero");
  if (!(datum_width > 0)) bad("datum.width must be positive");
  if (!(eps >= 0)) bad("eps must be >= 0");
  if (!std::isfinite(lambda.real()) || !(lambda.imag() >= 0)) bad("lambda.im must be >= 0");
  if (!(t_max > 1)) bad("t_max must exceed 1");
  if (!(dt0 > 0) || !(dt_growth > 0)) bad("stepper.dt0 and stepper.dt_growth must be positive");
  if (!(r1 > 0 && r2 > r1)) bad("cutoff needs r2 > r1 > 0");
  if (n_diag < 4) bad("diagnostic.n must be >= 4");
  if (!(Y >= 0)) bad("diagnostic.Y must be >= 0");
  if (checkpoints_per_decade < 4) bad("checkpoints_per_decade must be >= 4");
  if (!(leak_tol > 0)) bad("leak_tol must be positive");
  if (!(cauchy_t_lo >= 1) || !(residual_t_lo >= 1)) bad("analysis windows must start at t >= 1");
  if (output_dir.empty()) bad("output_dir must not be empty");
}

DispersionSymbol2D ExperimentConfig::symbol() const {
  DispersionSymbol2D s{make_symbol(symbol_x.name, symbol_x.coeffs), make_symbol(symbol_y.name, symbol_y.coeffs)};
  double band = kPi * static_cast<double>(n) / (2.0 * L);
  validate_ellipticity(s.fx, -band, band, 401);
  validate_ellipticity(s.fy, -band, band, 401);
  return s;
}

ComplexField ExperimentConfig::datum(const DispersionSymbol2D& sym) const {
  Grid2D g = Grid2D::make(n, n, L, L);
  ComplexField u0(g, 1.0);
  if (datum_kind == "focused_gaussian") u0 = focused_gaussian_datum(g, sym, datum_width);
  if (datum_kind == "gaussian") u0 = gaussian_datum(g, datum_width);
  return prepare_datum(u0, sym, eps);
}

ExperimentConfig quick_reference(cplx lambda) {
  ExperimentConfig c;
  c.lambda = lambda;
  return c;
}

ExperimentConfig full_reference(cplx lambda) {
  ExperimentConfig c;
  c.n = 2048;
  c.L = 1024;
  c.datum_width = 4.0;
  c.t_max = 160;
  c.lambda = lambda;
  return c;
}

// Checksums ------------------------------------------------------------------------

std::string sha256_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot read " + path);
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
  std::vector<char> buf(1 << 20);
  while (in) {
    in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
    EVP_DigestUpdate(ctx, buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx, md, &len);
  EVP_MD_CTX_free(ctx);
  std::string hex;
  char b[3];
  for (unsigned int i = 0; i < len; ++i) {
    std::snprintf(b, sizeof b, "%02x", md[i]);
    hex += b;
  }
  return hex;
}

bool verify_manifest(const std::string& run_dir, std::string* why) {
  auto fail = [&](const std::string& m) {
    if (why) *why = m;
    return false;
  };
  std::ifstream in(fs::path(run_dir) / "manifest.json");
  if (!in) return fail("manifest.json missing");
  json m;
  try {
    m = json::parse(in);
  } catch (const std::exception& e) {
    return fail(std::string("manifest.json unreadable: ") + e.what());
  }
  if (!m.contains("files") || !m["files"].is_array()) return fail("manifest lists no files");
  for (const auto& f : m["files"]) {
    fs::path p = fs::path(run_dir) / f["path"].get<std::string>();
    if (!fs::exists(p)) return fail("missing " + p.string());
    if (sha256_file(p.string()) != f["sha256"].get<std::string>()) return fail("checksum mismatch for " + p.string());
  }
  return true;
}

// Rates -----------------------------------------------------------------------------

void write_rates_csv(const std::string& path, const std::vector<RateRow>& rows) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path);
  out << "name,slope,intercept,stderr,n,t_lo,t_hi,band_lo,band_hi,status,note\n";
  for (const auto& r : rows)
    out << r.name << "," << fmt(r.slope) << "," << fmt(r.intercept) << "," << fmt(r.stderr_slope) << "," << r.n << ","
        << fmt(r.t_lo) << "," << fmt(r.t_hi) << "," << fmt(r.lo) << "," << fmt(r.hi) << "," << r.status << ","
        << r.note << "\n";
}

std::vector<RateRow> rates(const std::string& run_dir) {
  const std::string traj_path = (fs::path(run_dir) / "trajectory.csv").string();
  Csv traj = read_csv(traj_path);
  if (!traj.present) throw Error(ErrorKind::MissingColumns, traj_path + " not found");
  for (const char* c : {"t", "l2", "linf", "l3", "weighted_1", "weighted_2", "boundary_mass", "vlc_linf", "phi_max"})
    traj.col(c, traj_path);
  const auto& t = traj.col("t", traj_path);
  if (t.empty()) throw Error(ErrorKind::MissingColumns, traj_path + " has no rows");
  const double t_max = t.back();

  cplx lambda(0, 0);
  {
    std::ifstream in(fs::path(run_dir) / "config.json");
    if (in) {
      json c = json::parse(in, nullptr, false);
      if (!c.is_discarded() && c.contains("lambda"))
        lambda = cplx(c["lambda"].value("re", 0.0), c["lambda"].value("im", 0.0));
    }
  }

  std::vector<RateRow> rows;
  auto add = [&](const std::string& name, const std::vector<double>& ts, const std::vector<double>& ms, double lo_t,
                 double hi_t, double lo, double hi, double span) {
    RateRow r;
    r.name = name;
    r.t_lo = lo_t;
    r.t_hi = hi_t;
    r.lo = lo;
    r.hi = hi;
    try {
      FitResult f = fit_decay_rate(ts, ms, lo_t, hi_t, span);
      r.slope = f.slope;
      r.intercept = f.intercept;
      r.stderr_slope = f.stderr_slope;
      r.n = f.n;
      if (std::isinf(lo) && std::isinf(hi))
        r.status = "INFO";
      else
        r.status = (f.slope >= lo && f.slope <= hi) ? "PASS" : "FAIL";
    } catch (const Error& e) {
      r.slope = r.intercept = r.stderr_slope = NAN;
      r.status = "SKIP";
      r.note = to_string(e.kind());
    }
    rows.push_back(r);
  };

  const bool dissipative = lambda.imag() > 0;
  double lo = -INFINITY, hi = INFINITY;
  if (!dissipative) {
    bool linear = lambda == cplx(0, 0);
    lo = linear ? -1.05 : -1.08;
    hi = linear ? -0.95 : -0.92;
  }
  add("linf", t, traj.col("linf", traj_path), 5.0, t_max, lo, hi, 2.0);
  add("l2", t, traj.col("l2", traj_path), 5.0, t_max, -INFINITY, INFINITY, 2.0);
  add("l3", t, traj.col("l3", traj_path), 5.0, t_max, -INFINITY, INFINITY, 2.0);
  add("vlc_linf", t, traj.col("vlc_linf", traj_path), 5.0, t_max, -INFINITY, -0.4, 2.0);

  const std::string zc_path = (fs::path(run_dir) / "z_cauchy.csv").string();
  Csv zc = read_csv(zc_path);
  if (zc.present) {
    const auto& zt = zc.col("t", zc_path);
    double a = zt.empty() ? 0.0 : zt.front(), b = zt.empty() ? 0.0 : zt.back();
    add("z_cauchy_linf", zt, zc.col("d_linf", zc_path), a, b, -INFINITY, -0.4, 2.0);
    add("z_cauchy_l2", zt, zc.col("d_l2", zc_path), a, b, -INFINITY, -0.8, 2.0);
  }
  const std::string rs_path = (fs::path(run_dir) / "residual.csv").string();
  Csv rs = read_csv(rs_path);
  if (rs.present) {
    const auto& rt = rs.col("t", rs_path);
    double a = rt.empty() ? 0.0 : rt.front(), b = rt.empty() ? 0.0 : rt.back();
    add("residual_linf", rt, rs.col("linf", rs_path), a, b, -INFINITY, -1.0, 2.0);
    add("residual_l2", rt, rs.col("l2", rs_path), a, b, -INFINITY, -0.85, 2.0);
    add("scattering_l2", rt, rs.col("scattering_l2", rs_path), a, b, -INFINITY, INFINITY, 2.0);
  }
  const std::string pa_path = (fs::path(run_dir) / "psi_audit.csv").string();
  Csv pa = read_csv(pa_path);
  if (pa.present) {
    const auto& at = pa.col("t", pa_path);
    add("psi_identity", at, pa.col("err", pa_path), 5.0, t_max / 2, -INFINITY, -0.4, 2.0);
  }
  return rows;
}

// Run ---------------------------------------------------------------------------------

RunResult run(const ExperimentConfig& cfg) {
  cfg.validate();
  const auto wall0 = std::chrono::steady_clock::now();
  const DispersionSymbol2D sym = cfg.symbol();
  const ComplexField u0 = cfg.datum(sym);

  fs::path dir(cfg.output_dir);
  fs::create_directories(dir);
  if (cfg.snapshots) fs::create_directories(dir / "snapshots");
  std::ofstream((dir / "config.json").string()) << cfg.to_json().dump(2) << "\n";

  DiagnosticGrid dg = cfg.Y > 0 ? DiagnosticGrid{cfg.n_diag, cfg.Y} : diagnostic_grid_for(u0, sym, cfg.n_diag, 1e-14);
  const PhaseTable table = PhaseTable::uniform(sym, 1.05 * dg.Y);
  ScatteringTracker tracker(sym, table, CutoffProfile{cfg.r1, cfg.r2}, dg, cfg.lambda);

  RunConfig rc;
  rc.lambda = cfg.lambda;
  rc.eps = cfg.eps;
  rc.t_max = cfg.t_max;
  rc.dt0 = cfg.dt0;
  rc.dt_growth = cfg.dt_growth;
  rc.checkpoints = log_checkpoints(cfg.t_max, cfg.checkpoints_per_decade);
  rc.leak_tol = cfg.leak_tol;

  const double res_lo = cfg.residual_t_lo, res_hi = cfg.t_max / 4;
  std::vector<json> index;
  std::vector<std::pair<double, std::string>> residual_snaps;
  auto snapshot_cb = [&](const ComplexField& u, Trajectory&) {
    json e{{"t", u.t}, {"snapshot", nullptr}};
    bool in_window = u.t >= res_lo * (1 - 1e-12) && u.t <= res_hi * (1 + 1e-12);
    if (cfg.snapshots && (is_octave(u.t) || in_window || u.t == cfg.t_max)) {
      char name[64];
      std::snprintf(name, sizeof name, "snapshots/snap_%04zu.msq2", index.size());
      write_snapshot((dir / name).string(), u);
      e["snapshot"] = name;
      if (in_window) residual_snaps.emplace_back(u.t, name);
    }
    index.push_back(e);
  };

  json manifest;
  manifest["config"] = cfg.to_json();
  manifest["version"] = kVersion;
  manifest["diagnostic"] = {{"n", dg.n}, {"Y", dg.Y}};
  manifest["errors"] = json::array();
  manifest["warnings"] = json::array();

  RunResult res;
  res.run_dir = dir.string();
  std::optional<Error> pending;

  auto write_trajectory = [&](const Trajectory& tr) {
    std::vector<double> cols[9];
    for (std::size_t i = 0; i < tr.times.size(); ++i) {
      const auto& nb = tr.norms[i];
      auto payload = [&](const char* k) {
        auto it = tr.payload.find(k);
        return it != tr.payload.end() && i < it->second.size() ? it->second[i] : NAN;
      };
      double row[9] = {tr.times[i], nb.l2, nb.linf, nb.l3, nb.weighted[0], nb.weighted[1], tr.boundary_mass[i],
                       payload("vlc_linf"), payload("phi_max")};
      for (int c = 0; c < 9; ++c) cols[c].push_back(row[c]);
    }
    write_csv((dir / "trajectory.csv").string(),
              {"t", "l2", "linf", "l3", "weighted_1", "weighted_2", "boundary_mass", "vlc_linf", "phi_max"},
              std::vector<std::vector<double>>(cols, cols + 9));
  };

  try {
    res.trajectory =
        evolve(u0, rc, sym,
               {[&](const ComplexField& u, Trajectory& tr) { tracker(u, tr); }, snapshot_cb});
  } catch (const EvolutionAbort& e) {
    res.trajectory = e.partial();
    pending = Error(e.kind(), e.what());
  } catch (const Error& e) {
    pending = e;
  }
  write_trajectory(res.trajectory);
  manifest["steps"] = res.trajectory.steps;
  manifest["checkpoints"] = index;

  const ScatteringSeries& series = tracker.series();
  if (!pending && !series.times.empty()) {
    manifest["alias_warning"] = series.alias_warning;
    // Cauchy pairs
    CauchyReport cr = z_cauchy(series, cfg.cauchy_t_lo, cfg.t_max / 2);
    write_csv((dir / "z_cauchy.csv").string(), {"t", "d_linf", "d_l2"}, {cr.t, cr.d_inf, cr.d_l2});

    // Quadrature audit of Phi: every second checkpoint against all of them.
    RVec phi_half = phase_from_series(series.times, series.abs_v, 2);
    const RVec& phi_all = series.phi.back();
    double dmax = 0, pmax = 0;
    for (std::size_t k = 0; k < phi_all.size(); ++k) {
      dmax = std::max(dmax, std::abs(phi_all[k] - phi_half[k]));
      pmax = std::max(pmax, std::abs(phi_all[k]));
    }
    manifest["phase_audit"] = {{"phi_max", pmax}, {"rel_change_half_spacing", pmax > 0 ? dmax / pmax : 0.0}};

    try {
      ScatteringProfile prof = build_profile(series, cfg.cauchy_t_lo);
      prof.provenance = cfg.output_dir + "@t=" + fmt(prof.t_trunc);
      double zmax = 0;
      for (const auto& z : prof.z_plus) zmax = std::max(zmax, std::abs(z));
      manifest["profile"] = {{"z_plus_linf", zmax},         {"uncertainty", prof.uncertainty},
                             {"tail_bound", prof.tail_bound}, {"t_trunc", prof.t_trunc},
                             {"provenance", prof.provenance}};

      if (cfg.lambda.imag() > 0) {
        PsiPlusReport ps = compute_psi_plus_and_S(series.times, series.abs_v, series.phi, prof.z_plus, cfg.lambda);
        std::vector<double> t4d;
        for (double t : series.times) t4d.push_back(t4d_identity_error(prof.z_plus, prof.psi_plus, cfg.lambda, t));
        write_csv((dir / "psi_audit.csv").string(), {"t", "err", "t4d_err"}, {ps.audit_t, ps.audit_err, t4d});
        manifest["profile"]["min_positivity"] = ps.min_positivity;
      }

      // Profile files on the endpoint-inclusive diagnostic grid.
      Grid2D diag_grid{dg.n, dg.n, dg.Y, dg.Y};
      ComplexField zf(diag_grid, prof.t_trunc), ph(diag_grid, prof.t_trunc);
      zf.data = prof.z_plus;
      const RVec& phase = cfg.lambda.imag() > 0 ? prof.psi_plus : prof.phi_plus;
      for (std::size_t k = 0; k < phase.size(); ++k) ph.data[k] = phase[k];
      write_snapshot((dir / "profile_z_plus.msq2").string(), zf);
      write_snapshot((dir / "profile_phase.msq2").string(), ph);
      write_snapshot((dir / "profile_u_plus.msq2").string(), u_plus_spectral(prof, sym, u0.grid, 0.0));

      std::vector<double> rt, rinf, rl2, rsc;
      for (const auto& [t, name] : residual_snaps) {
        ComplexField u = read_snapshot((dir / name).string());
        Residual r = profile_residual(u, prof, table);
        rt.push_back(t);
        rinf.push_back(r.linf);
        rl2.push_back(r.l2);
        rsc.push_back(scattering_residual(u, prof, sym));
      }
      write_csv((dir / "residual.csv").string(), {"t", "linf", "l2", "scattering_l2"}, {rt, rinf, rl2, rsc});
    } catch (const Error& e) {
      // Too few checkpoints for a profile is a property of the configuration, not a failed run.
      if (e.kind() == ErrorKind::InsufficientData)
        manifest["warnings"].push_back({{"kind", to_string(e.kind())}, {"message", e.what()}});
      else
        pending = e;
    }
  }

  auto rows = rates(dir.string());
  write_rates_csv((dir / "rates.csv").string(), rows);

  if (pending) manifest["errors"].push_back({{"kind", to_string(pending->kind())}, {"message", pending->what()}});
  manifest["wall_clock_s"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - wall0).count();
  json files = json::array();
  std::vector<fs::path> paths;
  for (const auto& e : fs::recursive_directory_iterator(dir))
    if (e.is_regular_file() && e.path().filename() != "manifest.json") paths.push_back(e.path());
  std::sort(paths.begin(), paths.end());
  for (const auto& p : paths)
    files.push_back({{"path", fs::relative(p, dir).generic_string()},
                     {"bytes", fs::file_size(p)},
                     {"sha256", sha256_file(p.string())}});
  manifest["files"] = files;
  std::ofstream((dir / "manifest.json").string()) << manifest.dump(2) << "\n";
  res.manifest = manifest;
  if (pending) throw *pending;
  return res;
}

// Oracle ---------------------------------------------------------------------------------

OracleReport oracle(std::size_t n, double L, const std::vector<double>& times) {
  const auto t0 = std::chrono::steady_clock::now();
  OracleReport rep;
  Grid2D g = Grid2D::make(n, n, L, L);
  DispersionSymbol2D sym{quadratic_symbol(1.0), quadratic_symbol(1.0)};
  ComplexField u0 = gaussian_datum(g, 1.0);
  for (double t : times) {
    ComplexField u = free_propagate(u0, t - 1.0, sym);
    // e^{i tau xi^2} e^{-xi^2/4} <-> (1 - 4 i tau)^{-1/2} exp(-x^2 / (1 - 4 i tau)) per axis.
    const cplx a = 1.0 - cplx(0.0, 4.0 * (t - 1.0));
    const cplx pre = 1.0 / std::sqrt(a);
    CVec periodic(n), free(n);
    for (std::size_t i = 0; i < n; ++i) {
      double x = g.x(0, i);
      free[i] = pre * std::exp(-x * x / a);
      periodic[i] = free[i];
      for (int k : {-2, -1, 1, 2}) {
        double y = x + 2.0 * L * k;
        periodic[i] += pre * std::exp(-y * y / a);
      }
    }
    double num = 0, den = 0, num_free = 0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        cplx e = periodic[i] * periodic[j];
        num += std::norm(u.at(i, j) - e);
        den += std::norm(e);
        num_free += std::norm(u.at(i, j) - free[i] * free[j]);
      }
    rep.t.push_back(t);
    rep.rel_err.push_back(std::sqrt(num / den));
    rep.rel_err_free.push_back(std::sqrt(num_free / den));
    rep.max_rel_err = std::max(rep.max_rel_err, rep.rel_err.back());
  }
  rep.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rep;
}

// Weyl self-test -------------------------------------------------------------------------------

std::vector<WeylSelftestRow> weyl_selftest() {
  const auto f = quadrel_symbol();
  const CutoffProfile cut{};
  std::vector<WeylSelftestRow> rows;
  SymbolJet a{[](double x, double xi) { return cplx(std::exp(-x * x) * std::cos(xi), 0); },
              [](double x, double xi) { return cplx(-2 * x * std::exp(-x * x) * std::cos(xi), 0); },
              [](double x, double xi) { return cplx(-std::exp(-x * x) * std::sin(xi), 0); }};
  SymbolJet b{[f](double x, double xi) { return cplx(x + f.d1(xi), 0); }, [](double, double) { return cplx(1, 0); },
              [f](double, double xi) { return cplx(f.d2(xi), 0); }, [](double x) { return x; }, f.d1};
  for (double h : {1.0, 1e-1, 1e-2, 1e-3}) {
    WeylSelftestRow r;
    r.h = h;
    Grid1D g{512, 20.0 * std::sqrt(h)};
    auto op = build_weyl_1d(projector_symbol(cut, f, h), g, h, "gamma");
    r.norm_l2 = norm_l2_l2(op);
    r.norm_linf = norm_l2_linf(op);
    r.moyal_remainder = h >= 1e-2 ? moyal_remainder_norm(a, b, h, moyal_grid(h)) : NAN;
    rows.push_back(r);
  }
  return rows;
}

}  // namespace msq
