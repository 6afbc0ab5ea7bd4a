#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "msq/error.hpp"
#include "msq/grid.hpp"

namespace msq {

struct RunConfig {
  cplx lambda{1.0, 0.0};
  double eps = 0.1;
  double t_max = 30.0;
  double dt0 = 0.05;
  double dt_growth = 0.02;  // step <= dt_growth * t
  std::vector<double> checkpoints;  // increasing, first 1, last t_max
  double leak_tol = 1e-8;
  double frame_fraction = 0.1;
  bool dealias = true;
  bool weighted_norms = true;
  std::string snapshot_dir;  // empty: no snapshot files

  void validate() const;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<NormBundle> norms;
  std::vector<double> boundary_mass;
  std::vector<std::string> snapshots;
  std::map<std::string, std::vector<double>> payload;
  std::size_t steps = 0;
};

// Runs at every checkpoint on the stepping thread. The field is read-only.
using CheckpointCallback = std::function<void(const ComplexField&, Trajectory&)>;

// BoundaryLeak or NonFinite raised mid-run, carrying everything recorded up
// to the last good checkpoint.
class EvolutionAbort : public Error {
 public:
  EvolutionAbort(ErrorKind kind, const std::string& what, Trajectory partial)
      : Error(kind, what), partial_(std::move(partial)) {}
  const Trajectory& partial() const { return partial_; }

 private:
  Trajectory partial_;
};

// Exact flow of d/dt u = i lambda |u| u over tau.
ComplexField nonlinear_substep(const ComplexField& f, double tau, cplx lambda);
void nonlinear_substep_inplace(ComplexField& f, double tau, cplx lambda);

// Half linear step, full nonlinear step, half linear step, then 2/3
// dealiasing (skipped when lambda = 0 or dealias = false).
ComplexField strang_step(const ComplexField& f, double dt, cplx lambda, const DispersionSymbol2D& sym,
                         bool dealias = true);

// Checkpoints t_m = 2^{m/q}, q = round(per_decade * log10 2), ending at t_max.
// With octave-exact spacing 2t is a checkpoint (to rounding) whenever t is.
std::vector<double> log_checkpoints(double t_max, int per_decade);

// Rescales u0 so that datum_norm = 1, then multiplies by eps.
ComplexField prepare_datum(const ComplexField& u0, const DispersionSymbol2D& sym, double eps);

// Integrates from u0.t = 1 to cfg.t_max with dt_n = min(dt0 sqrt(t), dt_growth t),
// landing exactly on checkpoints. With lambda = 0 each checkpoint interval
// is a single exact propagation.
Trajectory evolve(const ComplexField& u0, const RunConfig& cfg, const DispersionSymbol2D& sym,
                  const std::vector<CheckpointCallback>& callbacks = {});

// Fixed-step integration of n_steps Strang steps to t_end (refinement studies).
ComplexField integrate_fixed(const ComplexField& u0, double t_end, std::size_t n_steps, cplx lambda,
                             const DispersionSymbol2D& sym, bool dealias = true);

struct MassReport {
  bool dissipative = false;
  double max_rel_drift = 0;            // Im lambda = 0
  std::vector<double> t, lhs, rhs;     // interior checkpoints, Im lambda > 0
  double max_rel_err = 0;
};

// Im lambda = 0: L^2 drift. Im lambda > 0: nonuniform centered difference of
// ||u||^2 against -2 Im lambda ||u||_{L^3}^3.
MassReport mass_dissipation_check(const Trajectory& traj, cplx lambda);

struct RichardsonReport {
  double dt = 0;
  std::size_t n_coarse = 0;
  double diff_coarse = 0, diff_fine = 0, ratio = 0;
};

// ||u_dt - u_dt/2|| / ||u_dt/2 - u_dt/4|| at t_end with n_coarse steps.
RichardsonReport richardson_study(const ComplexField& u0, double t_end, std::size_t n_coarse, cplx lambda,
                                  const DispersionSymbol2D& sym);

}  // namespace msq
