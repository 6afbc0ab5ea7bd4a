#include "msq/evolution.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>

#include "msq/parallel.hpp"
#include "msq/simd.hpp"

namespace msq {

void RunConfig::validate() const {
  if (lambda.imag() < 0) throw Error(ErrorKind::Config, "Im(lambda) must be >= 0");
  if (!(eps > 0 && eps <= 1)) throw Error(ErrorKind::Config, "eps must lie in (0, 1]");
  if (!(t_max > 1)) throw Error(ErrorKind::Config, "t_max must exceed 1");
  if (!(dt0 > 0)) throw Error(ErrorKind::Config, "dt0 must be positive");
  if (!(dt_growth > 0)) throw Error(ErrorKind::Config, "dt_growth must be positive");
  if (checkpoints.empty() || checkpoints.front() != 1.0 || checkpoints.back() != t_max)
    throw Error(ErrorKind::Config, "checkpoints must start at 1 and end at t_max");
  for (std::size_t i = 1; i < checkpoints.size(); ++i)
    if (!(checkpoints[i] > checkpoints[i - 1])) throw Error(ErrorKind::Config, "checkpoints must increase");
}

void nonlinear_substep_inplace(ComplexField& f, double tau, cplx lambda) {
  const double lr = lambda.real(), li = lambda.imag();
  if (tau == 0.0 || (lr == 0.0 && li == 0.0)) return;
  double* p = reinterpret_cast<double*>(f.data.data());
  std::size_t n = f.data.size();
  parallel_for(n, [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) {
      double re = p[2 * i], im = p[2 * i + 1];
      double rho = std::sqrt(re * re + im * im);
      if (rho == 0.0) continue;
      double amp = 1.0, ph;
      if (li > 0.0) {
        double x = li * rho * tau;
        amp = 1.0 / (1.0 + x);
        ph = lr == 0.0 ? 0.0 : (lr / li) * std::log1p(x);
      } else {
        ph = lr * rho * tau;
      }
      double c = amp, s = 0.0;
      if (ph != 0.0) {
        c = amp * std::cos(ph);
        s = amp * std::sin(ph);
      }
      p[2 * i] = re * c - im * s;
      p[2 * i + 1] = im * c + re * s;
    }
  });
}

ComplexField nonlinear_substep(const ComplexField& f, double tau, cplx lambda) {
  ComplexField out = f;
  nonlinear_substep_inplace(out, tau, lambda);
  return out;
}

namespace {

// Strang stepping with adjacent linear half-steps fused: between two
// nonlinear substeps only one transform pair is needed. The dealiasing
// projection commutes with the linear flow, so it rides along.
class SplitStepper {
 public:
  SplitStepper(ComplexField& u, const DispersionSymbol2D& sym, cplx lambda, bool dealias)
      : u_(u), lambda_(lambda), dealias_(dealias && lambda != cplx(0.0, 0.0)) {
    const auto& g = u.grid;
    for (int k = 0; k < 2; ++k) {
      F_[k].resize(g.n(k));
      for (std::size_t j = 0; j < g.n(k); ++j) F_[k][j] = sym.axis(k).eval(g.xi(k, j));
      mask_[k] = dealias_mask(g, k);
    }
  }

  void step(double dt) {
    pending_ += 0.5 * dt;
    linear();
    nonlinear_substep_inplace(u_, dt, lambda_);
    pending_ = 0.5 * dt;
    mask_pending_ = dealias_;
    u_.t += dt;
  }

  // Completes the trailing half-step so u is a full Strang iterate.
  void flush() { linear(); }

 private:
  void linear() {
    if (pending_ == 0.0 && !mask_pending_) return;
    CVec a(F_[0].size()), b(F_[1].size());
    for (std::size_t j = 0; j < a.size(); ++j)
      a[j] = std::polar(mask_pending_ ? mask_[0][j] : 1.0, F_[0][j] * pending_);
    for (std::size_t j = 0; j < b.size(); ++j)
      b[j] = std::polar(mask_pending_ ? mask_[1][j] : 1.0, F_[1][j] * pending_);
    apply_separable_inplace(u_, a, b);
    pending_ = 0.0;
    mask_pending_ = false;
  }

  ComplexField& u_;
  cplx lambda_;
  bool dealias_;
  std::vector<double> F_[2], mask_[2];
  double pending_ = 0.0;
  bool mask_pending_ = false;
};

bool all_finite(const ComplexField& f) {
  return std::isfinite(simd::active().sum_abs2(f.data.data(), f.data.size()));
}

}  // namespace

ComplexField strang_step(const ComplexField& f, double dt, cplx lambda, const DispersionSymbol2D& sym, bool dealias) {
  ComplexField u = f;
  SplitStepper s(u, sym, lambda, dealias);
  s.step(dt);
  s.flush();
  return u;
}

std::vector<double> log_checkpoints(double t_max, int per_decade) {
  if (per_decade < 1) throw Error(ErrorKind::Config, "checkpoints_per_decade must be >= 1");
  int q = std::max(1, static_cast<int>(std::lround(per_decade * std::log10(2.0))));
  std::vector<double> out;
  for (int m = 0;; ++m) {
    double t = std::exp2(static_cast<double>(m) / q);
    if (t >= t_max * (1 - 1e-12)) break;
    out.push_back(t);
  }
  out.push_back(t_max);
  return out;
}

ComplexField prepare_datum(const ComplexField& u0, const DispersionSymbol2D& sym, double eps) {
  double n = datum_norm(u0, sym);
  ComplexField out = u0;
  if (n > 0) simd::active().scale(out.data.data(), eps / n, out.data.size());
  out.t = 1.0;
  return out;
}

Trajectory evolve(const ComplexField& u0, const RunConfig& cfg, const DispersionSymbol2D& sym,
                  const std::vector<CheckpointCallback>& callbacks) {
  cfg.validate();
  if (u0.t != 1.0) throw Error(ErrorKind::Config, "evolve: initial datum must be given at t = 1");
  if (!cfg.snapshot_dir.empty()) std::filesystem::create_directories(cfg.snapshot_dir);

  Trajectory traj;
  ComplexField u = u0;
  const bool linear = cfg.lambda == cplx(0.0, 0.0);
  SplitStepper stepper(u, sym, cfg.lambda, cfg.dealias);

  auto record = [&] {
    if (!all_finite(u)) {
      char buf[96];
      std::snprintf(buf, sizeof buf, "non-finite values at t = %.6g", u.t);
      throw EvolutionAbort(ErrorKind::NonFinite, buf, traj);
    }
    double bm = boundary_mass(u, cfg.frame_fraction);
    if (bm > cfg.leak_tol) {
      char buf[128];
      std::snprintf(buf, sizeof buf, "boundary mass %.3e exceeds %.3e at t = %.6g", bm, cfg.leak_tol, u.t);
      throw EvolutionAbort(ErrorKind::BoundaryLeak, buf, traj);
    }
    traj.times.push_back(u.t);
    traj.norms.push_back(norms(u, sym, cfg.weighted_norms));
    traj.boundary_mass.push_back(bm);
    if (!cfg.snapshot_dir.empty()) {
      char name[32];
      std::snprintf(name, sizeof name, "snap_%04zu.msq2", traj.times.size() - 1);
      std::string path = (std::filesystem::path(cfg.snapshot_dir) / name).string();
      write_snapshot(path, u);
      traj.snapshots.push_back(path);
    }
    for (const auto& cb : callbacks) cb(u, traj);
  };

  record();
  for (std::size_t c = 1; c < cfg.checkpoints.size(); ++c) {
    const double target = cfg.checkpoints[c];
    if (linear) {
      free_propagate_inplace(u, target - u.t, sym);
      ++traj.steps;
    } else {
      while (u.t < target) {
        double dt = std::min(cfg.dt0 * std::sqrt(u.t), cfg.dt_growth * u.t);
        bool last = u.t + dt >= target * (1 - 1e-13);
        if (last) dt = target - u.t;
        stepper.step(dt);
        ++traj.steps;
        if (last) break;
      }
      stepper.flush();
    }
    u.t = target;
    record();
  }
  return traj;
}

ComplexField integrate_fixed(const ComplexField& u0, double t_end, std::size_t n_steps, cplx lambda,
                             const DispersionSymbol2D& sym, bool dealias) {
  ComplexField u = u0;
  if (n_steps == 0) return u;
  double dt = (t_end - u0.t) / static_cast<double>(n_steps);
  SplitStepper s(u, sym, lambda, dealias);
  for (std::size_t i = 0; i < n_steps; ++i) s.step(dt);
  s.flush();
  u.t = t_end;
  return u;
}

MassReport mass_dissipation_check(const Trajectory& traj, cplx lambda) {
  if (traj.times.size() < 3) throw Error(ErrorKind::InsufficientData, "mass check needs >= 3 checkpoints");
  MassReport r;
  r.dissipative = lambda.imag() > 0;
  const auto& T = traj.times;
  const double m0 = traj.norms.front().l2;
  for (const auto& nb : traj.norms)
    if (m0 > 0) r.max_rel_drift = std::max(r.max_rel_drift, std::abs(nb.l2 - m0) / m0);
  if (!r.dissipative) return r;
  for (std::size_t i = 1; i + 1 < T.size(); ++i) {
    double h1 = T[i] - T[i - 1], h2 = T[i + 1] - T[i];
    double a = traj.norms[i - 1].l2, b = traj.norms[i].l2, c = traj.norms[i + 1].l2;
    double lhs = -h2 / (h1 * (h1 + h2)) * a * a + (h2 - h1) / (h1 * h2) * b * b + h1 / (h2 * (h1 + h2)) * c * c;
    double l3 = traj.norms[i].l3;
    double rhs = -2.0 * lambda.imag() * l3 * l3 * l3;
    r.t.push_back(T[i]);
    r.lhs.push_back(lhs);
    r.rhs.push_back(rhs);
    if (rhs != 0) r.max_rel_err = std::max(r.max_rel_err, std::abs(lhs - rhs) / std::abs(rhs));
  }
  return r;
}

RichardsonReport richardson_study(const ComplexField& u0, double t_end, std::size_t n_coarse, cplx lambda,
                                  const DispersionSymbol2D& sym) {
  RichardsonReport r;
  r.n_coarse = n_coarse;
  if (n_coarse == 0) return r;
  r.dt = (t_end - u0.t) / static_cast<double>(n_coarse);
  ComplexField a = integrate_fixed(u0, t_end, n_coarse, lambda, sym);
  ComplexField b = integrate_fixed(u0, t_end, 2 * n_coarse, lambda, sym);
  ComplexField c = integrate_fixed(u0, t_end, 4 * n_coarse, lambda, sym);
  for (std::size_t i = 0; i < a.data.size(); ++i) {
    a.data[i] -= b.data[i];
    b.data[i] -= c.data[i];
  }
  r.diff_coarse = l2_norm(a);
  r.diff_fine = l2_norm(b);
  r.ratio = r.diff_fine > 0 ? r.diff_coarse / r.diff_fine : 0.0;
  return r;
}

}  // namespace msq
