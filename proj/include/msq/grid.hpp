#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "msq/aligned.hpp"
#include "msq/dispersion.hpp"

namespace msq {

// Periodic box [-L1, L1) x [-L2, L2) with n1 x n2 points.
struct Grid2D {
  std::size_t n1 = 0, n2 = 0;
  double L1 = 0, L2 = 0;

  static Grid2D make(std::size_t n1, std::size_t n2, double L1, double L2);

  std::size_t n(int k) const { return k == 0 ? n1 : n2; }
  double L(int k) const { return k == 0 ? L1 : L2; }
  double dx(int k) const { return 2.0 * L(k) / static_cast<double>(n(k)); }
  double x(int k, std::size_t i) const { return -L(k) + static_cast<double>(i) * dx(k); }
  // Frequency of FFT slot j: pi * m / L with m in [-n/2, n/2).
  double xi(int k, std::size_t j) const {
    long nn = static_cast<long>(n(k));
    long m = static_cast<long>(j) < nn / 2 ? static_cast<long>(j) : static_cast<long>(j) - nn;
    return 3.14159265358979323846 * static_cast<double>(m) / L(k);
  }
  std::size_t size() const { return n1 * n2; }
  double cell_area() const { return dx(0) * dx(1); }
  std::vector<double> coords(int k) const;
  std::vector<double> modes(int k) const;  // FFT order

  bool operator==(const Grid2D& o) const { return n1 == o.n1 && n2 == o.n2 && L1 == o.L1 && L2 == o.L2; }
};

// Row-major samples (axis 1 is the slow index) plus the physical time.
struct ComplexField {
  Grid2D grid;
  CVec data;
  double t = 1.0;

  ComplexField() = default;
  explicit ComplexField(const Grid2D& g, double time = 1.0) : grid(g), data(g.size()), t(time) {}

  cplx& at(std::size_t i, std::size_t j) { return data[i * grid.n2 + j]; }
  const cplx& at(std::size_t i, std::size_t j) const { return data[i * grid.n2 + j]; }
};

struct NormBundle {
  double l2 = 0, linf = 0, l3 = 0, h2 = 0;
  std::array<double, 2> weighted{0, 0};
};

// Fourier multipliers ------------------------------------------------------

using ModeFunction = std::function<cplx(double, double)>;
using AxisFunction = std::function<cplx(double)>;

ComplexField apply_multiplier(const ComplexField& f, const ModeFunction& m);

// Values of an axis function on the FFT-ordered modes of axis k.
CVec axis_multiplier(const Grid2D& g, int k, const AxisFunction& m);

// In place: data <- IFFT(a (x) b . FFT(data)). Normalization is handled here.
void apply_separable_inplace(ComplexField& f, const CVec& a, const CVec& b);

// e^{i F(xi) dt}, timestamp advanced by dt.
ComplexField free_propagate(const ComplexField& f, double dt, const DispersionSymbol2D& sym);
void free_propagate_inplace(ComplexField& f, double dt, const DispersionSymbol2D& sym);

// 2/3-rule truncation mask per axis (1 kept, 0 removed), FFT order.
std::vector<double> dealias_mask(const Grid2D& g, int k);
void dealias_inplace(ComplexField& f);

// Weighted vector fields (x_k + t F_k'(D))^power ----------------------------

struct VectorFieldResult {
  ComplexField field;
  double boundary_mass = 0;
  bool boundary_contamination = false;  // warning, not an error
};

VectorFieldResult vector_field_apply(const ComplexField& f, int k, double t, int power,
                                     const DispersionSymbol2D& sym, double contamination_tol = 1e-8);

// Monitors -----------------------------------------------------------------

// ||u0||_{H^2} + sum_k ||(x_k + F_k'(D))^2 u0||_{L^2} at t = 1.
double datum_norm(const ComplexField& u0, const DispersionSymbol2D& sym);

double l2_norm(const ComplexField& f);
double l2_norm_fourier(const ComplexField& f);  // Parseval
double linf_norm(const ComplexField& f);
double l3_norm(const ComplexField& f);
double h2_norm(const ComplexField& f);

// Weighted norms use the field's own timestamp.
NormBundle norms(const ComplexField& f, const DispersionSymbol2D& sym, bool weighted = true);

// L^2 fraction of the field in the frame |x_k| >= (1 - frame_fraction) L_k.
double boundary_mass(const ComplexField& f, double frame_fraction = 0.1);

// Data ---------------------------------------------------------------------

// exp(-|x - c|^2 / sigma^2 + i p.x) at t = 1.
ComplexField gaussian_datum(const Grid2D& g, double sigma, std::array<double, 2> center = {0, 0},
                            std::array<double, 2> momentum = {0, 0});

// e^{i F(D)} applied to the Gaussian: the free wave that focuses at t = 0,
// so that decay in t is visible from the first checkpoints.
ComplexField focused_gaussian_datum(const Grid2D& g, const DispersionSymbol2D& sym, double sigma);

// Snapshot files: "MSQ2", u32 version = 1, u64 n1, u64 n2, f64 L1, f64 L2,
// f64 t, then n1*n2 (re, im) f64 pairs, little-endian, row-major.
void write_snapshot(const std::string& path, const ComplexField& f);
ComplexField read_snapshot(const std::string& path);

}  // namespace msq
