#pragma once

#include <string>
#include <vector>

#include "msq/aligned.hpp"
#include "msq/dispersion.hpp"
#include "msq/evolution.hpp"
#include "msq/fit.hpp"
#include "msq/grid.hpp"
#include "msq/weyl.hpp"

namespace msq {

// Fixed coarse grid for the slow variable y = x/t: n nodes per axis on
// [-Y, Y] including both end points.
struct DiagnosticGrid {
  std::size_t n = 128;
  double Y = 1.0;

  double spacing() const { return 2.0 * Y / static_cast<double>(n - 1); }
  double node(std::size_t j) const { return -Y + static_cast<double>(j) * spacing(); }
  std::vector<double> nodes() const;
  std::size_t size() const { return n * n; }
  // Trapezoid weight of node j on one axis.
  double weight(std::size_t j) const { return (j == 0 || j + 1 == n) ? 0.5 * spacing() : spacing(); }
};

// Y = factor * max |F_k'| over the band holding all but `tail` of the
// datum's spectral mass (per axis and side).
DiagnosticGrid diagnostic_grid_for(const ComplexField& u0, const DispersionSymbol2D& sym, std::size_t n,
                                   double tail = 1e-10, double factor = 1.0);

struct PhaseAccumulator {
  RVec phi;                       // on the diagnostic grid
  RVec last_abs;                  // |v_Lambda| at the last update
  double last_t = 1.0;
  std::string rule = "trapezoid-log";
  bool started = false;
};

// Phi += (|v(s_prev)| + |v(s_cur)|)/2 * log(s_cur / s_prev). The first call
// only records |v_Lambda(1)| (Phi(1) = 0).
void update_phase(PhaseAccumulator& acc, const RVec& abs_v, double s);

// Trigonometric interpolation of a native-grid field onto the diagnostic
// nodes (exact for band-limited data): W1 V W2^T.
CVec interpolate_to_diagnostic(const ComplexField& f, const DiagnosticGrid& dg);

// z = v_Lambda e^{-i w(y) t} e^{-i lambda Phi}. The fast phase is applied
// analytically at the nodes after exact band-limited interpolation.
CVec compute_z(const CVec& v_lambda_diag, double t, const DiagnosticGrid& dg, const PhaseTable& table,
               const RVec& phi, cplx lambda);

// Nyquist check for the fast phase on the native grid.
void check_phase_resolution(const ComplexField& u, const DiagnosticGrid& dg, const PhaseTable& table);

// Everything recorded per checkpoint by the tracker.
struct ScatteringSeries {
  DiagnosticGrid grid;
  cplx lambda;
  std::vector<double> times;
  std::vector<RVec> abs_v;  // |v_Lambda|
  std::vector<RVec> phi;    // Phi
  std::vector<CVec> z;
  std::vector<double> vlc_linf, vlc_l2, vl_l2, z_l2;
  bool alias_warning = false;
};

// Checkpoint callback: projection, diagnostic interpolation, phase update, z.
class ScatteringTracker {
 public:
  ScatteringTracker(const DispersionSymbol2D& sym, const PhaseTable& table, const CutoffProfile& cutoff,
                    const DiagnosticGrid& dg, cplx lambda);
  void operator()(const ComplexField& u, Trajectory& traj);
  const ScatteringSeries& series() const { return series_; }

 private:
  DispersionSymbol2D sym_;
  const PhaseTable* table_;
  CutoffProfile cutoff_;
  PhaseAccumulator acc_;
  ScatteringSeries series_;
};

struct CauchyReport {
  std::vector<double> t, d_inf, d_l2;  // ||z(2t) - z(t)||
  FitResult fit_inf, fit_l2;
  double constant_inf = 0;  // max d_inf(t) sqrt(t)
};

// Pairs (t, 2t) of checkpoints with t in [t_lo, t_hi].
CauchyReport z_cauchy(const ScatteringSeries& s, double t_lo, double t_hi);

struct ScatteringProfile {
  DiagnosticGrid grid;
  cplx lambda;
  CVec z_plus;
  RVec phi_plus;  // Im lambda = 0
  RVec psi_plus;  // Im lambda > 0
  double t_trunc = 1.0;
  double uncertainty = 0;  // ||z(t_max) - z(t_max/2)||_inf
  double tail_bound = 0;
  std::string provenance;

  // Real phase Theta(t, y) with u ~ t^{-1} e^{i t w} e^{i lambda Theta} z_plus:
  // phi_plus + |z_plus| log t, or S(t, y).
  RVec theta(double t) const;
  // 1 + Im lambda |z_plus| log t + psi_plus
  RVec positivity(double t) const;
};

struct ZPlusReport {
  CVec z_plus;
  CauchyReport cauchy;
  double uncertainty = 0;
};

// z_plus = z(t_max); NotConverged if the L^inf Cauchy slope exceeds -0.2.
ZPlusReport extract_z_plus(const ScatteringSeries& s, double t_lo, double min_span_ratio = 2.0);

struct PhiPlus {
  RVec phi_plus;
  double tail_bound = 0;
};

// Truncated log-s trapezoid of |v_Lambda| - |z_plus|; cauchy_constant is
// C in ||z(s) - z_plus|| <= C s^{-1/2} and gives the tail 2 C t_max^{-1/2}.
PhiPlus compute_phi_plus(const std::vector<double>& times, const std::vector<RVec>& abs_v, const CVec& z_plus,
                         cplx lambda, double cauchy_constant = 0.0);

struct PsiPlusReport {
  RVec psi_plus;
  double min_positivity = 0;        // over checkpoints
  std::vector<double> audit_t, audit_err;  // ||e^{Im Phi} - (1 + Im|z+|log t) - psi+||_inf
};

PsiPlusReport compute_psi_plus_and_S(const std::vector<double>& times, const std::vector<RVec>& abs_v,
                                     const std::vector<RVec>& phi, const CVec& z_plus, cplx lambda);

// S(t, y) = log(1 + Im lambda |z_plus| log t + psi_plus) / Im lambda.
RVec compute_S(const CVec& z_plus, const RVec& psi_plus, cplx lambda, double t);

// max |e^{i lambda S} - exp(i (Re/Im) log q) / q| over the diagnostic grid.
double t4d_identity_error(const CVec& z_plus, const RVec& psi_plus, cplx lambda, double t);

ScatteringProfile build_profile(const ScatteringSeries& s, double t_lo, double min_span_ratio = 2.0);

struct Residual {
  double linf = 0, l2 = 0;
};

// Model u ~ t^{-1} e^{i t w(x/t) + i lambda Theta(t, x/t)} z_plus(x/t) on the
// physical grid; cubic interpolation of the slow fields.
ComplexField profile_model(const Grid2D& g, double t, const ScatteringProfile& p, const PhaseTable& table);
Residual profile_residual(const ComplexField& u, const ScatteringProfile& p, const PhaseTable& table);

// Scattering state by direct quadrature over the diagnostic grid at the
// given coordinates (separable phase, so the sum is two small products).
CVec compute_u_plus(const ScatteringProfile& p, const PhaseTable& table, const std::vector<double>& x1,
                    const std::vector<double>& x2);
ComplexField compute_u_plus(const ScatteringProfile& p, const PhaseTable& table, const Grid2D& g);

// Same state from its Fourier side, u_plus^(xi) = -2 pi i sqrt(F1'' F2'') z_plus(-F'(xi)),
// propagated by e^{i F(D) t} (t = 0 gives u_plus itself).
ComplexField u_plus_spectral(const ScatteringProfile& p, const DispersionSymbol2D& sym, const Grid2D& g, double t);

// || u(t) - e^{i lambda Theta(t, x/t)} e^{i F(D) t} u_plus ||_2
double scattering_residual(const ComplexField& u, const ScatteringProfile& p, const DispersionSymbol2D& sym);

struct DissipativeSeries {
  std::vector<double> t, value;  // (t log t) ||u||_inf for t >= e
  double target = 0;             // 1 / Im lambda
  double last = 0;
  double trend_slope = 0;        // d value / d log t
};

DissipativeSeries dissipative_limit_series(const std::vector<double>& times, const std::vector<double>& linf,
                                           cplx lambda);

// Log-log least squares with at least 5 points spanning min_span_ratio.
FitResult fit_decay_rate(const std::vector<double>& t, const std::vector<double>& m, double min_span_ratio = 2.0);

// Windowed variant: points with t in [t_lo, t_hi].
FitResult fit_decay_rate(const std::vector<double>& t, const std::vector<double>& m, double t_lo, double t_hi,
                         double min_span_ratio = 2.0);

// Phi(t_end) from every stride-th checkpoint (quadrature audit).
RVec phase_from_series(const std::vector<double>& times, const std::vector<RVec>& abs_v, std::size_t stride);

}  // namespace msq
