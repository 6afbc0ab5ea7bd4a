#pragma once

#include <functional>
#include <string>
#include <vector>

#include "msq/aligned.hpp"
#include "msq/dispersion.hpp"
#include "msq/grid.hpp"

namespace msq {

// Periodic 1D grid [-L, L) with n points; semiclassical modes h*pi*m/L.
struct Grid1D {
  std::size_t n = 0;
  double L = 0;

  double dx() const { return 2.0 * L / static_cast<double>(n); }
  double x(std::size_t i) const { return -L + static_cast<double>(i) * dx(); }
  // Semiclassical frequency of FFT slot j.
  double eta(std::size_t j, double h) const;
  std::vector<double> coords() const;
};

using Symbol = std::function<cplx(double x, double xi)>;

// Dense Weyl quantization on a grid: M_ij = (1/n) sum_m e^{2 pi i (i-j) m / n}
// a((x_i + x_j)/2, eta_m), the discrete form of the midpoint kernel with
// the y-quadrature weight folded in. Row-major.
struct WeylOperator1D {
  double h = 1.0;
  Grid1D grid;
  CVec kernel;
  std::string symbol_id;
  bool alias_warning = false;  // symbol not negligible at the Nyquist mode
  double nyquist_fraction = 0.0;

  std::size_t n() const { return grid.n; }
  cplx operator()(std::size_t i, std::size_t j) const { return kernel[i * grid.n + j]; }
  CVec apply(const CVec& v) const;
  CVec apply_adjoint(const CVec& v) const;
};

// One transform per midpoint index s = i + j (2n - 1 in total), run in
// parallel over s.
WeylOperator1D build_weyl_1d(const Symbol& a, const Grid1D& g, double h, std::string symbol_id = {});

// (h/i) times the spectral derivative (exact quantization of a = xi).
CVec semiclassical_derivative(const CVec& v, const Grid1D& g, double h);

// Axis-1 operator on every column index, axis-2 operator on every row index.
ComplexField weyl_apply_separable(const WeylOperator1D& op1, const WeylOperator1D& op2, const ComplexField& f);
// Same with the axis order reversed (used to confirm order independence).
ComplexField weyl_apply_separable_reversed(const WeylOperator1D& op1, const WeylOperator1D& op2,
                                           const ComplexField& f);

// Cutoff ---------------------------------------------------------------------

// gamma(s) = 1 for |s| <= r1, 0 for |s| >= r2, smooth step built from
// exp(-1/u) in between.
struct CutoffProfile {
  double r1 = 1.0, r2 = 2.0;
  double operator()(double s) const;
};

// gamma((x + F'(xi)) / sqrt(h)) for one axis.
Symbol projector_symbol(const CutoffProfile& c, const DispersionSymbol1D& f, double h);

// Semiclassical frame ---------------------------------------------------------

struct SemiclassicalFrame {
  double t = 1.0, h = 1.0;
  ComplexField v;           // t * u(t, t y) on the scaled grid [-L/t, L/t)
  ComplexField v_lambda;
  ComplexField v_lambda_c;  // v - v_lambda
  bool alias_warning = false;
};

SemiclassicalFrame make_frame(const ComplexField& u);

// The scaled frequency grid coincides with the physical one, so this is a
// standard Weyl kernel on each axis of the scaled grid.
void project_lambda(SemiclassicalFrame& frame, const CutoffProfile& cutoff, const PhaseTable& table);
void project_lambda(SemiclassicalFrame& frame, const CutoffProfile& cutoff, const DispersionSymbol2D& sym);

// Moyal product ---------------------------------------------------------------

struct SymbolJet {
  Symbol value, dx, dxi;
  // Optional split form a = ax(x) + axi(xi): its quantization is exactly
  // ax(x) + axi(hD), which is applied without a dense kernel.
  std::function<double(double)> split_x, split_xi;
  bool has_split() const { return static_cast<bool>(split_x) && static_cast<bool>(split_xi); }
};

// ab + (ih/2)(a_x b_xi - a_xi b_x)
Symbol moyal_leading(const SymbolJet& a, const SymbolJet& b, double h);

struct ScalingFit {
  std::vector<double> h, norms;
  double slope = 0, intercept = 0, stderr_slope = 0;
  double max_constant = 0, constant_spread = 0;  // norm / h^slope
  bool degenerate = false;
  bool alias_warning = false;
};

// Phase-space window for the remainder measurement. The discrete Weyl
// kernel on a periodic box has two artefacts that the continuum operator
// does not: pairs (x_i, x_j) straddling the seam get the wrong midpoint, and
// symbols that grow in xi jump at the Nyquist mode. Both are removed by
// measuring || W^* R W || with W = w_xi(hD) w_x(x), w(s) = exp(-(s/s0)^4).
struct MoyalWindow {
  double x_scale = 2.0;
  double xi_scale = 2.0;
};

// Grid used for a given h: [-L, L) with L = x_extent and enough points that
// the semiclassical band reaches xi_extent.
Grid1D moyal_grid(double h, double x_extent = 5.0, double xi_extent = 5.0);

double moyal_remainder_norm(const SymbolJet& a, const SymbolJet& b, double h, const Grid1D& g,
                            const MoyalWindow& w = {}, bool* alias = nullptr);

ScalingFit moyal_remainder_scaling(const SymbolJet& a, const SymbolJet& b, const std::vector<double>& hs,
                                   const std::function<Grid1D(double)>& grid_for, const MoyalWindow& w = {});

// Operator norms ----------------------------------------------------------------

double norm_l2_l2(const WeylOperator1D& op, int max_iter = 500, double tol = 1e-12);
// max_i ||M_i.||_2 / sqrt(dx): exact L^2 -> L^inf norm of the matrix operator.
double norm_l2_linf(const WeylOperator1D& op);

enum class NormPair { L2L2, L2Linf };

// Norm of the 2D tensor operator a1(h) (x) a2(h) built from two 1D kernels:
// both norms factor exactly over the tensor product.
ScalingFit operator_norm_scaling(const std::function<Symbol(double)>& axis1_family,
                                 const std::function<Symbol(double)>& axis2_family, const std::vector<double>& hs,
                                 const std::function<Grid1D(double)>& grid_for, NormPair pair);

// 1D variant.
ScalingFit operator_norm_scaling_1d(const std::function<Symbol(double)>& family, const std::vector<double>& hs,
                                    const std::function<Grid1D(double)>& grid_for, NormPair pair);

}  // namespace msq
