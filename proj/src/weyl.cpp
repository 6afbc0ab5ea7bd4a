#include "msq/weyl.hpp"

#include <cblas.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "msq/error.hpp"
#include "msq/fft.hpp"
#include "msq/fit.hpp"
#include "msq/parallel.hpp"

namespace msq {

namespace {

constexpr double kPi = 3.14159265358979323846;

long signed_mode(std::size_t j, std::size_t n) {
  return static_cast<long>(j) < static_cast<long>(n) / 2 ? static_cast<long>(j)
                                                          : static_cast<long>(j) - static_cast<long>(n);
}

void gemv(const CVec& m, std::size_t n, const cplx* v, cplx* out, bool adjoint) {
  const cplx one(1.0, 0.0), zero(0.0, 0.0);
  cblas_zgemv(CblasRowMajor, adjoint ? CblasConjTrans : CblasNoTrans, static_cast<int>(n), static_cast<int>(n), &one,
              m.data(), static_cast<int>(n), v, 1, &zero, out, 1);
}

void gemm(const cplx* a, const cplx* b, cplx* c, std::size_t m, std::size_t k, std::size_t n, bool trans_b) {
  const cplx one(1.0, 0.0), zero(0.0, 0.0);
  cblas_zgemm(CblasRowMajor, CblasNoTrans, trans_b ? CblasTrans : CblasNoTrans, static_cast<int>(m),
              static_cast<int>(n), static_cast<int>(k), &one, a, static_cast<int>(k), b,
              static_cast<int>(trans_b ? k : n), &zero, c, static_cast<int>(n));
}

double vnorm(const CVec& v) {
  double s = 0;
  for (const auto& z : v) s += std::norm(z);
  return std::sqrt(s);
}

// Largest singular value of a linear map given y = A x and y = A^* x.
double power_norm(std::size_t n, const std::function<CVec(const CVec&)>& A, const std::function<CVec(const CVec&)>& At,
                  int max_iter, double tol) {
  std::mt19937_64 rng(0x5eed);
  std::normal_distribution<double> N(0.0, 1.0);
  CVec x(n);
  for (auto& z : x) z = cplx(N(rng), N(rng));
  double nx = vnorm(x);
  for (auto& z : x) z /= nx;
  double sigma = 0;
  for (int it = 0; it < max_iter; ++it) {
    CVec y = At(A(x));
    double ny = vnorm(y);
    if (ny == 0) return 0.0;
    double s = std::sqrt(ny);
    for (std::size_t i = 0; i < n; ++i) x[i] = y[i] / ny;
    if (it > 3 && std::abs(s - sigma) <= tol * s) return s;
    sigma = s;
  }
  return sigma;
}

}  // namespace

double Grid1D::eta(std::size_t j, double h) const { return h * kPi * static_cast<double>(signed_mode(j, n)) / L; }

std::vector<double> Grid1D::coords() const {
  std::vector<double> c(n);
  for (std::size_t i = 0; i < n; ++i) c[i] = x(i);
  return c;
}

CVec WeylOperator1D::apply(const CVec& v) const {
  if (v.size() != grid.n) throw Error(ErrorKind::GridMismatch, "Weyl apply: vector length mismatch");
  CVec out(grid.n);
  gemv(kernel, grid.n, v.data(), out.data(), false);
  return out;
}

CVec WeylOperator1D::apply_adjoint(const CVec& v) const {
  if (v.size() != grid.n) throw Error(ErrorKind::GridMismatch, "Weyl apply: vector length mismatch");
  CVec out(grid.n);
  gemv(kernel, grid.n, v.data(), out.data(), true);
  return out;
}

WeylOperator1D build_weyl_1d(const Symbol& a, const Grid1D& g, double h, std::string symbol_id) {
  const std::size_t n = g.n;
  if (n < 2 || n % 2) throw Error(ErrorKind::Config, "Weyl grid needs an even number of points");
  WeylOperator1D op;
  op.h = h;
  op.grid = g;
  op.symbol_id = std::move(symbol_id);
  op.kernel.assign(n * n, cplx(0.0, 0.0));

  std::vector<double> eta(n);
  for (std::size_t j = 0; j < n; ++j) eta[j] = g.eta(j, h);
  const std::size_t S = 2 * n - 1;
  std::vector<double> sym_max(S, 0.0), nyq_max(S, 0.0);
  const double half = 0.5 * g.dx();
  const double inv_n = 1.0 / static_cast<double>(n);

  parallel_for(S, [&](std::size_t b, std::size_t e) {
    CVec c(n);
    for (std::size_t s = b; s < e; ++s) {
      const double X = -g.L + static_cast<double>(s) * half;
      double mx = 0;
      for (std::size_t j = 0; j < n; ++j) {
        c[j] = a(X, eta[j]);
        mx = std::max(mx, std::abs(c[j]));
      }
      sym_max[s] = mx;
      nyq_max[s] = std::abs(c[n / 2]);
      fft::backward1d(c.data(), n);
      const std::size_t i0 = s >= n ? s - n + 1 : 0, i1 = std::min(s, n - 1);
      for (std::size_t i = i0; i <= i1; ++i) {
        long d = 2 * static_cast<long>(i) - static_cast<long>(s);
        std::size_t idx = static_cast<std::size_t>(((d % static_cast<long>(n)) + static_cast<long>(n)) % static_cast<long>(n));
        op.kernel[i * n + (s - i)] = c[idx] * inv_n;
      }
    }
  });

  double smax = *std::max_element(sym_max.begin(), sym_max.end());
  double nmax = *std::max_element(nyq_max.begin(), nyq_max.end());
  op.nyquist_fraction = smax > 0 ? nmax / smax : 0.0;
  op.alias_warning = op.nyquist_fraction > 1e-8;
  return op;
}

CVec semiclassical_derivative(const CVec& v, const Grid1D& g, double h) {
  CVec w = v;
  fft::forward1d(w.data(), g.n);
  for (std::size_t j = 0; j < g.n; ++j) w[j] *= g.eta(j, h) / static_cast<double>(g.n);
  fft::backward1d(w.data(), g.n);
  return w;
}

ComplexField weyl_apply_separable(const WeylOperator1D& op1, const WeylOperator1D& op2, const ComplexField& f) {
  const auto& g = f.grid;
  if (op1.n() != g.n1 || op2.n() != g.n2) throw Error(ErrorKind::GridMismatch, "Weyl operators do not match the field grid");
  CVec tmp(g.size());
  ComplexField out(g, f.t);
  gemm(op1.kernel.data(), f.data.data(), tmp.data(), g.n1, g.n1, g.n2, false);
  gemm(tmp.data(), op2.kernel.data(), out.data.data(), g.n1, g.n2, g.n2, true);
  return out;
}

ComplexField weyl_apply_separable_reversed(const WeylOperator1D& op1, const WeylOperator1D& op2,
                                           const ComplexField& f) {
  const auto& g = f.grid;
  if (op1.n() != g.n1 || op2.n() != g.n2) throw Error(ErrorKind::GridMismatch, "Weyl operators do not match the field grid");
  CVec tmp(g.size());
  ComplexField out(g, f.t);
  gemm(f.data.data(), op2.kernel.data(), tmp.data(), g.n1, g.n2, g.n2, true);
  gemm(op1.kernel.data(), tmp.data(), out.data.data(), g.n1, g.n1, g.n2, false);
  return out;
}

double CutoffProfile::operator()(double s) const {
  double a = std::abs(s);
  if (a <= r1) return 1.0;
  if (a >= r2) return 0.0;
  auto psi = [](double u) { return u > 0 ? std::exp(-1.0 / u) : 0.0; };
  double u = (r2 - a) / (r2 - r1);
  double p = psi(u), q = psi(1.0 - u);
  return p / (p + q);
}

Symbol projector_symbol(const CutoffProfile& c, const DispersionSymbol1D& f, double h) {
  double inv = 1.0 / std::sqrt(h);
  auto d1 = f.d1;
  return [c, d1, inv](double x, double xi) { return cplx(c((x + d1(xi)) * inv), 0.0); };
}

SemiclassicalFrame make_frame(const ComplexField& u) {
  SemiclassicalFrame fr;
  fr.t = u.t;
  fr.h = 1.0 / u.t;
  Grid2D yg{u.grid.n1, u.grid.n2, u.grid.L1 / u.t, u.grid.L2 / u.t};
  fr.v = ComplexField(yg, u.t);
  for (std::size_t i = 0; i < u.data.size(); ++i) fr.v.data[i] = u.t * u.data[i];
  return fr;
}

void project_lambda(SemiclassicalFrame& frame, const CutoffProfile& cutoff, const DispersionSymbol2D& sym) {
  const auto& g = frame.v.grid;
  Grid1D g1{g.n1, g.L1}, g2{g.n2, g.L2};
  auto op1 = build_weyl_1d(projector_symbol(cutoff, sym.fx, frame.h), g1, frame.h, "gamma_1");
  auto op2 = build_weyl_1d(projector_symbol(cutoff, sym.fy, frame.h), g2, frame.h, "gamma_2");
  frame.alias_warning = op1.alias_warning || op2.alias_warning;
  frame.v_lambda = weyl_apply_separable(op1, op2, frame.v);
  frame.v_lambda_c = frame.v;
  for (std::size_t i = 0; i < frame.v.data.size(); ++i) frame.v_lambda_c.data[i] -= frame.v_lambda.data[i];
}

void project_lambda(SemiclassicalFrame& frame, const CutoffProfile& cutoff, const PhaseTable& table) {
  project_lambda(frame, cutoff, table.symbol());
}

Symbol moyal_leading(const SymbolJet& a, const SymbolJet& b, double h) {
  const cplx ih2(0.0, 0.5 * h);
  return [a, b, ih2](double x, double xi) {
    return a.value(x, xi) * b.value(x, xi) + ih2 * (a.dx(x, xi) * b.dxi(x, xi) - a.dxi(x, xi) * b.dx(x, xi));
  };
}

Grid1D moyal_grid(double h, double x_extent, double xi_extent) {
  std::size_t n = static_cast<std::size_t>(std::ceil(2.0 * x_extent * xi_extent / (kPi * h)));
  n = std::max<std::size_t>(64, (n + 7) / 8 * 8);
  return Grid1D{n, x_extent};
}

namespace {

// Quantization of a jet as a linear map (dense kernel or exact split form).
struct Quantized {
  WeylOperator1D dense;
  std::vector<double> fx;   // split: multiplication part
  std::vector<double> fxi;  // split: Fourier multiplier part, FFT order
  bool split = false;

  CVec apply(const CVec& v, bool adjoint) const {
    if (!split) return adjoint ? dense.apply_adjoint(v) : dense.apply(v);
    const std::size_t n = v.size();
    CVec w = v;
    fft::forward1d(w.data(), n);
    for (std::size_t j = 0; j < n; ++j) w[j] *= fxi[j] / static_cast<double>(n);
    fft::backward1d(w.data(), n);
    for (std::size_t i = 0; i < n; ++i) w[i] += fx[i] * v[i];
    return w;
  }
};

Quantized quantize(const SymbolJet& a, const Grid1D& g, double h) {
  Quantized q;
  if (a.has_split()) {
    q.split = true;
    q.fx.resize(g.n);
    q.fxi.resize(g.n);
    for (std::size_t i = 0; i < g.n; ++i) {
      q.fx[i] = a.split_x(g.x(i));
      q.fxi[i] = a.split_xi(g.eta(i, h));
    }
  } else {
    q.dense = build_weyl_1d(a.value, g, h);
  }
  return q;
}

}  // namespace

double moyal_remainder_norm(const SymbolJet& a, const SymbolJet& b, double h, const Grid1D& g, const MoyalWindow& w,
                            bool* alias) {
  const std::size_t n = g.n;
  Quantized Ga = quantize(a, g, h), Gb = quantize(b, g, h);
  WeylOperator1D Gc = build_weyl_1d(moyal_leading(a, b, h), g, h, "moyal_leading");
  if (alias) *alias = Gc.alias_warning || (!Ga.split && Ga.dense.alias_warning);

  std::vector<double> wx(n), wxi(n);
  for (std::size_t i = 0; i < n; ++i) {
    wx[i] = std::exp(-std::pow(g.x(i) / w.x_scale, 4));
    wxi[i] = std::exp(-std::pow(g.eta(i, h) / w.xi_scale, 4)) / static_cast<double>(n);
  }
  auto window_in = [&](CVec v) {  // W = w_xi(hD) w_x
    for (std::size_t i = 0; i < n; ++i) v[i] *= wx[i];
    fft::forward1d(v.data(), n);
    for (std::size_t j = 0; j < n; ++j) v[j] *= wxi[j];
    fft::backward1d(v.data(), n);
    return v;
  };
  auto window_out = [&](CVec v) {  // W^* = w_x w_xi(hD)
    fft::forward1d(v.data(), n);
    for (std::size_t j = 0; j < n; ++j) v[j] *= wxi[j];
    fft::backward1d(v.data(), n);
    for (std::size_t i = 0; i < n; ++i) v[i] *= wx[i];
    return v;
  };
  auto R = [&](const CVec& v) {
    CVec ab = Ga.apply(Gb.apply(v, false), false);
    CVec c = Gc.apply(v);
    for (std::size_t i = 0; i < n; ++i) ab[i] -= c[i];
    return ab;
  };
  auto Rt = [&](const CVec& v) {
    CVec ab = Gb.apply(Ga.apply(v, true), true);
    CVec c = Gc.apply_adjoint(v);
    for (std::size_t i = 0; i < n; ++i) ab[i] -= c[i];
    return ab;
  };
  auto A = [&](const CVec& v) { return window_out(R(window_in(v))); };
  auto At = [&](const CVec& v) { return window_out(Rt(window_in(v))); };
  return power_norm(n, A, At, 400, 1e-9);
}

ScalingFit moyal_remainder_scaling(const SymbolJet& a, const SymbolJet& b, const std::vector<double>& hs,
                                   const std::function<Grid1D(double)>& grid_for, const MoyalWindow& w) {
  ScalingFit r;
  for (double h : hs) {
    bool alias = false;
    r.h.push_back(h);
    r.norms.push_back(moyal_remainder_norm(a, b, h, grid_for(h), w, &alias));
    r.alias_warning = r.alias_warning || alias;
  }
  for (double v : r.norms)
    if (v < 1e-12) r.degenerate = true;
  if (r.degenerate || hs.size() < 2) {
    r.slope = NAN;
    return r;
  }
  auto f = loglog_fit(r.h, r.norms);
  r.slope = f.slope;
  r.intercept = f.intercept;
  r.stderr_slope = f.stderr_slope;
  return r;
}

double norm_l2_l2(const WeylOperator1D& op, int max_iter, double tol) {
  return power_norm(
      op.n(), [&](const CVec& v) { return op.apply(v); }, [&](const CVec& v) { return op.apply_adjoint(v); },
      max_iter, tol);
}

double norm_l2_linf(const WeylOperator1D& op) {
  const std::size_t n = op.n();
  double best = 0;
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0;
    for (std::size_t j = 0; j < n; ++j) s += std::norm(op.kernel[i * n + j]);
    best = std::max(best, s);
  }
  return std::sqrt(best / op.grid.dx());
}

namespace {

void finish_scaling(ScalingFit& r) {
  auto f = loglog_fit(r.h, r.norms);
  r.slope = f.slope;
  r.intercept = f.intercept;
  r.stderr_slope = f.stderr_slope;
  double lo = INFINITY, hi = 0;
  for (std::size_t i = 0; i < r.h.size(); ++i) {
    double c = r.norms[i] / std::pow(r.h[i], r.slope);
    lo = std::min(lo, c);
    hi = std::max(hi, c);
  }
  r.max_constant = hi;
  r.constant_spread = hi / lo;
}

double norm_of(const WeylOperator1D& op, NormPair pair) {
  return pair == NormPair::L2L2 ? norm_l2_l2(op) : norm_l2_linf(op);
}

}  // namespace

ScalingFit operator_norm_scaling(const std::function<Symbol(double)>& axis1_family,
                                 const std::function<Symbol(double)>& axis2_family, const std::vector<double>& hs,
                                 const std::function<Grid1D(double)>& grid_for, NormPair pair) {
  ScalingFit r;
  for (double h : hs) {
    Grid1D g = grid_for(h);
    auto op1 = build_weyl_1d(axis1_family(h), g, h);
    auto op2 = build_weyl_1d(axis2_family(h), g, h);
    r.alias_warning = r.alias_warning || op1.alias_warning || op2.alias_warning;
    r.h.push_back(h);
    r.norms.push_back(norm_of(op1, pair) * norm_of(op2, pair));
  }
  finish_scaling(r);
  return r;
}

ScalingFit operator_norm_scaling_1d(const std::function<Symbol(double)>& family, const std::vector<double>& hs,
                                    const std::function<Grid1D(double)>& grid_for, NormPair pair) {
  ScalingFit r;
  for (double h : hs) {
    auto op = build_weyl_1d(family(h), grid_for(h), h);
    r.alias_warning = r.alias_warning || op.alias_warning;
    r.h.push_back(h);
    r.norms.push_back(norm_of(op, pair));
  }
  finish_scaling(r);
  return r;
}

}  // namespace msq
