#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

namespace msq {

// One axis of a separable elliptic dispersion symbol with analytic
// derivatives and convexity bounds c_low <= F'' <= d_high.
struct DispersionSymbol1D {
  std::function<double(double)> eval, d1, d2, d3;
  double c_low = 1.0;
  double d_high = 1.0;
  std::string name;
};

struct DispersionSymbol2D {
  DispersionSymbol1D fx, fy;

  const DispersionSymbol1D& axis(int k) const { return k == 0 ? fx : fy; }
  double eval(double xi1, double xi2) const { return fx.eval(xi1) + fy.eval(xi2); }
};

// a * xi^2
DispersionSymbol1D quadratic_symbol(double a = 1.0);
// xi^2 + sqrt(1 + xi^2); F'' = 2 + (1 + xi^2)^{-3/2} in (2, 3]
DispersionSymbol1D quadrel_symbol();

// Built-ins by name: "quadratic" {a}, "anisotropic" {a in [0.5, 2]}, "quadrel".
DispersionSymbol1D make_symbol(const std::string& name, const std::map<std::string, double>& coeffs = {});

struct EllipticityReport {
  double min_d2 = 0, max_d2 = 0;
  double fd_err_d1 = 0, fd_err_d2 = 0, fd_err_d3 = 0;  // worst scaled FD discrepancy
  bool within_bounds = false;                          // c_low <= d2 <= d_high on samples
  bool pass = false;
};

// Samples the band, checks F'' > 0 and the analytic derivatives against
// central differences (delta = 1e-5). Throws NonElliptic or
// DerivativeMismatch; pass additionally requires the configured bounds.
EllipticityReport validate_ellipticity(const DispersionSymbol1D& sym, double band_lo, double band_hi,
                                       int n_samples);

// Unique xi with x + F'(xi) = 0. Bracket by doubling from -x / (2 c_low),
// then Newton safeguarded by bisection. Throws BracketFailure beyond xi_max.
double stationary_phase_root(const DispersionSymbol1D& sym, double x, double xi_max = 1e6);

// w_k(x) = x * dphi(x) + F(dphi(x)) from a root.
inline double legendre_phase(const DispersionSymbol1D& sym, double x, double xi_star) {
  return x * xi_star + sym.eval(xi_star);
}

// Per-axis tabulation of dphi, d2phi = -1/F''(dphi), d3phi and w. Off-node
// queries use quintic Hermite interpolation (w' = dphi, w'' = d2phi supply
// the end derivatives, and likewise for dphi); queries outside the table
// fall back to a direct root solve.
class PhaseTable {
 public:
  PhaseTable() = default;
  PhaseTable(const DispersionSymbol2D& sym, std::vector<double> axis1, std::vector<double> axis2);

  // Uniform table on [-X, X] with the given spacing on both axes.
  static PhaseTable uniform(const DispersionSymbol2D& sym, double X, double spacing = 0.05);

  const std::vector<double>& samples(int k) const { return x_[k]; }
  const std::vector<double>& dphi_nodes(int k) const { return dphi_[k]; }
  const std::vector<double>& d2phi_nodes(int k) const { return d2phi_[k]; }
  const std::vector<double>& w_nodes(int k) const { return w_[k]; }

  double dphi(int k, double x) const;
  double d2phi(int k, double x) const;
  double w_axis(int k, double x) const;
  double w(double x1, double x2) const { return w_axis(0, x1) + w_axis(1, x2); }

  // F_k''(dphi_k(x)), used by the scattering-state quadrature.
  double curvature(int k, double x) const;

  const DispersionSymbol2D& symbol() const { return sym_; }

 private:
  DispersionSymbol2D sym_;
  std::vector<double> x_[2], dphi_[2], d2phi_[2], d3phi_[2], w_[2];

  int locate(int k, double x) const;
};

}  // namespace msq
