#include "msq/grid.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>

#include "msq/error.hpp"
#include "msq/fft.hpp"
#include "msq/simd.hpp"

namespace msq {

static_assert(std::endian::native == std::endian::little, "snapshot I/O assumes a little-endian host");

namespace {

bool is_pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

CVec ones(std::size_t n) { return CVec(n, cplx(1.0, 0.0)); }

// Multiply every row (k = 0) or column (k = 1) by a per-line real factor.
void multiply_coordinate(ComplexField& f, int k, const std::vector<double>& c) {
  const auto& g = f.grid;
  if (k == 0) {
    for (std::size_t i = 0; i < g.n1; ++i) simd::active().scale(f.data.data() + i * g.n2, c[i], g.n2);
  } else {
    for (std::size_t i = 0; i < g.n1; ++i) simd::active().rmul(f.data.data() + i * g.n2, c.data(), g.n2);
  }
}

std::vector<double> coordinate_power(const Grid2D& g, int k, int p) {
  std::vector<double> c = g.coords(k);
  for (auto& v : c) v = std::pow(v, p);
  return c;
}

// F_k'(D)^p on axis k as a separable (a, b) pair scaled by s.
std::pair<CVec, CVec> derivative_multiplier(const Grid2D& g, int k, const DispersionSymbol2D& sym, int p, double s) {
  const auto& f = sym.axis(k);
  CVec m = axis_multiplier(g, k, [&](double xi) { return cplx(s * std::pow(f.d1(xi), p), 0.0); });
  if (k == 0) return {std::move(m), ones(g.n2)};
  return {ones(g.n1), std::move(m)};
}

void axpy(ComplexField& y, cplx a, const ComplexField& x) {
  for (std::size_t i = 0; i < y.data.size(); ++i) y.data[i] += a * x.data[i];
}

}  // namespace

Grid2D Grid2D::make(std::size_t n1, std::size_t n2, double L1, double L2) {
  if (!is_pow2(n1) || !is_pow2(n2) || n1 < 8 || n2 < 8)
    throw Error(ErrorKind::Config, "grid sizes must be powers of two and at least 8");
  if (!(L1 > 0) || !(L2 > 0)) throw Error(ErrorKind::Config, "box half-lengths must be positive");
  return Grid2D{n1, n2, L1, L2};
}

std::vector<double> Grid2D::coords(int k) const {
  std::vector<double> c(n(k));
  for (std::size_t i = 0; i < c.size(); ++i) c[i] = x(k, i);
  return c;
}

std::vector<double> Grid2D::modes(int k) const {
  std::vector<double> c(n(k));
  for (std::size_t j = 0; j < c.size(); ++j) c[j] = xi(k, j);
  return c;
}

ComplexField apply_multiplier(const ComplexField& f, const ModeFunction& m) {
  ComplexField out = f;
  const auto& g = f.grid;
  fft::forward2d(out.data.data(), g.n1, g.n2);
  double inv = 1.0 / static_cast<double>(g.size());
  auto xi2 = g.modes(1);
  for (std::size_t i = 0; i < g.n1; ++i) {
    double xi1 = g.xi(0, i);
    for (std::size_t j = 0; j < g.n2; ++j) out.data[i * g.n2 + j] *= m(xi1, xi2[j]) * inv;
  }
  fft::backward2d(out.data.data(), g.n1, g.n2);
  return out;
}

CVec axis_multiplier(const Grid2D& g, int k, const AxisFunction& m) {
  CVec out(g.n(k));
  for (std::size_t j = 0; j < out.size(); ++j) out[j] = m(g.xi(k, j));
  return out;
}

void apply_separable_inplace(ComplexField& f, const CVec& a, const CVec& b) {
  const auto& g = f.grid;
  if (a.size() != g.n1 || b.size() != g.n2) throw Error(ErrorKind::GridMismatch, "multiplier size mismatch");
  CVec an(a);
  double inv = 1.0 / static_cast<double>(g.size());
  for (auto& v : an) v *= inv;
  fft::forward2d(f.data.data(), g.n1, g.n2);
  simd::active().cmul_outer(f.data.data(), an.data(), b.data(), g.n1, g.n2);
  fft::backward2d(f.data.data(), g.n1, g.n2);
}

void free_propagate_inplace(ComplexField& f, double dt, const DispersionSymbol2D& sym) {
  if (dt == 0.0) return;
  CVec a = axis_multiplier(f.grid, 0, [&](double xi) { return std::polar(1.0, sym.fx.eval(xi) * dt); });
  CVec b = axis_multiplier(f.grid, 1, [&](double xi) { return std::polar(1.0, sym.fy.eval(xi) * dt); });
  apply_separable_inplace(f, a, b);
  f.t += dt;
}

ComplexField free_propagate(const ComplexField& f, double dt, const DispersionSymbol2D& sym) {
  ComplexField out = f;
  free_propagate_inplace(out, dt, sym);
  return out;
}

std::vector<double> dealias_mask(const Grid2D& g, int k) {
  std::size_t n = g.n(k);
  std::vector<double> m(n);
  long cut = static_cast<long>(n) / 3;
  for (std::size_t j = 0; j < n; ++j) {
    long s = static_cast<long>(j) < static_cast<long>(n) / 2 ? static_cast<long>(j) : static_cast<long>(j) - static_cast<long>(n);
    m[j] = std::labs(s) <= cut ? 1.0 : 0.0;
  }
  return m;
}

void dealias_inplace(ComplexField& f) {
  auto m1 = dealias_mask(f.grid, 0), m2 = dealias_mask(f.grid, 1);
  CVec a(m1.begin(), m1.end()), b(m2.begin(), m2.end());
  apply_separable_inplace(f, a, b);
}

VectorFieldResult vector_field_apply(const ComplexField& f, int k, double t, int power, const DispersionSymbol2D& sym,
                                     double contamination_tol) {
  if (power != 1 && power != 2) throw Error(ErrorKind::Config, "vector_field_apply: power must be 1 or 2");
  const auto& g = f.grid;
  VectorFieldResult r;
  if (power == 1) {
    ComplexField a = f;
    auto [ma, mb] = derivative_multiplier(g, k, sym, 1, t);
    apply_separable_inplace(a, ma, mb);
    ComplexField xu = f;
    multiply_coordinate(xu, k, g.coords(k));
    axpy(a, 1.0, xu);
    r.field = std::move(a);
  } else {
    // x^2 u + t x F'(D) u + t F'(D)(x u) + t^2 F'(D)^2 u
    ComplexField res = f;
    multiply_coordinate(res, k, coordinate_power(g, k, 2));

    ComplexField a = f;
    auto [m1a, m1b] = derivative_multiplier(g, k, sym, 1, t);
    apply_separable_inplace(a, m1a, m1b);
    multiply_coordinate(a, k, g.coords(k));
    axpy(res, 1.0, a);

    ComplexField b = f;
    multiply_coordinate(b, k, g.coords(k));
    apply_separable_inplace(b, m1a, m1b);
    axpy(res, 1.0, b);

    ComplexField c = f;
    auto [m2a, m2b] = derivative_multiplier(g, k, sym, 2, t * t);
    apply_separable_inplace(c, m2a, m2b);
    axpy(res, 1.0, c);
    r.field = std::move(res);
  }
  r.field.t = f.t;
  r.boundary_mass = boundary_mass(r.field);
  r.boundary_contamination = r.boundary_mass > contamination_tol;
  return r;
}

double l2_norm(const ComplexField& f) {
  return std::sqrt(simd::active().sum_abs2(f.data.data(), f.data.size()) * f.grid.cell_area());
}

double l2_norm_fourier(const ComplexField& f) {
  CVec tmp = f.data;
  fft::forward2d(tmp.data(), f.grid.n1, f.grid.n2);
  double s = simd::active().sum_abs2(tmp.data(), tmp.size());
  return std::sqrt(s * f.grid.cell_area() / static_cast<double>(f.grid.size()));
}

double linf_norm(const ComplexField& f) { return simd::active().max_abs(f.data.data(), f.data.size()); }

double l3_norm(const ComplexField& f) {
  return std::cbrt(simd::active().sum_abs3(f.data.data(), f.data.size()) * f.grid.cell_area());
}

double h2_norm(const ComplexField& f) {
  const auto& g = f.grid;
  CVec tmp = f.data;
  fft::forward2d(tmp.data(), g.n1, g.n2);
  auto xi2 = g.modes(1);
  std::vector<double> w(g.n2);
  for (std::size_t i = 0; i < g.n1; ++i) {
    double a = 1.0 + g.xi(0, i) * g.xi(0, i);
    for (std::size_t j = 0; j < g.n2; ++j) w[j] = a + xi2[j] * xi2[j];
    simd::active().rmul(tmp.data() + i * g.n2, w.data(), g.n2);
  }
  double s = simd::active().sum_abs2(tmp.data(), tmp.size());
  return std::sqrt(s * g.cell_area() / static_cast<double>(g.size()));
}

double datum_norm(const ComplexField& u0, const DispersionSymbol2D& sym) {
  double v = h2_norm(u0);
  for (int k = 0; k < 2; ++k) v += l2_norm(vector_field_apply(u0, k, 1.0, 2, sym).field);
  return v;
}

NormBundle norms(const ComplexField& f, const DispersionSymbol2D& sym, bool weighted) {
  NormBundle b;
  b.l2 = l2_norm(f);
  b.linf = linf_norm(f);
  b.l3 = l3_norm(f);
  b.h2 = h2_norm(f);
  if (weighted)
    for (int k = 0; k < 2; ++k) b.weighted[k] = l2_norm(vector_field_apply(f, k, f.t, 2, sym).field);
  return b;
}

double boundary_mass(const ComplexField& f, double frame_fraction) {
  const auto& g = f.grid;
  const auto& K = simd::active();
  double total = K.sum_abs2(f.data.data(), f.data.size());
  if (total == 0.0) return 0.0;
  auto in_frame = [&](int k, std::size_t i) { return std::abs(g.x(k, i)) >= (1.0 - frame_fraction) * g.L(k); };
  std::size_t j_lo = 0, j_hi = g.n2;  // interior columns [j_lo, j_hi)
  while (j_lo < g.n2 && in_frame(1, j_lo)) ++j_lo;
  while (j_hi > j_lo && in_frame(1, j_hi - 1)) --j_hi;
  double frame = 0.0;
  for (std::size_t i = 0; i < g.n1; ++i) {
    const cplx* row = f.data.data() + i * g.n2;
    if (in_frame(0, i)) {
      frame += K.sum_abs2(row, g.n2);
    } else {
      frame += K.sum_abs2(row, j_lo);
      frame += K.sum_abs2(row + j_hi, g.n2 - j_hi);
    }
  }
  return frame / total;
}

ComplexField gaussian_datum(const Grid2D& g, double sigma, std::array<double, 2> c, std::array<double, 2> p) {
  ComplexField u(g, 1.0);
  for (std::size_t i = 0; i < g.n1; ++i) {
    double x1 = g.x(0, i);
    for (std::size_t j = 0; j < g.n2; ++j) {
      double x2 = g.x(1, j);
      double r2 = (x1 - c[0]) * (x1 - c[0]) + (x2 - c[1]) * (x2 - c[1]);
      u.at(i, j) = std::polar(std::exp(-r2 / (sigma * sigma)), p[0] * x1 + p[1] * x2);
    }
  }
  return u;
}

ComplexField focused_gaussian_datum(const Grid2D& g, const DispersionSymbol2D& sym, double sigma) {
  ComplexField u = gaussian_datum(g, sigma);
  free_propagate_inplace(u, 1.0, sym);
  u.t = 1.0;
  return u;
}

void write_snapshot(const std::string& path, const ComplexField& f) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw Error(ErrorKind::Io, "cannot open snapshot for writing: " + path);
  const char magic[4] = {'M', 'S', 'Q', '2'};
  std::uint32_t version = 1;
  std::uint64_t n1 = f.grid.n1, n2 = f.grid.n2;
  os.write(magic, 4);
  os.write(reinterpret_cast<const char*>(&version), 4);
  os.write(reinterpret_cast<const char*>(&n1), 8);
  os.write(reinterpret_cast<const char*>(&n2), 8);
  os.write(reinterpret_cast<const char*>(&f.grid.L1), 8);
  os.write(reinterpret_cast<const char*>(&f.grid.L2), 8);
  os.write(reinterpret_cast<const char*>(&f.t), 8);
  os.write(reinterpret_cast<const char*>(f.data.data()), static_cast<std::streamsize>(f.data.size() * 16));
  if (!os) throw Error(ErrorKind::Io, "short write: " + path);
}

ComplexField read_snapshot(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error(ErrorKind::Io, "cannot open snapshot: " + path);
  char magic[4];
  std::uint32_t version = 0;
  std::uint64_t n1 = 0, n2 = 0;
  double L1 = 0, L2 = 0, t = 0;
  is.read(magic, 4);
  is.read(reinterpret_cast<char*>(&version), 4);
  is.read(reinterpret_cast<char*>(&n1), 8);
  is.read(reinterpret_cast<char*>(&n2), 8);
  is.read(reinterpret_cast<char*>(&L1), 8);
  is.read(reinterpret_cast<char*>(&L2), 8);
  is.read(reinterpret_cast<char*>(&t), 8);
  if (!is || std::memcmp(magic, "MSQ2", 4) != 0 || version != 1)
    throw Error(ErrorKind::Io, "not an MSQ2 v1 snapshot: " + path);
  // Diagnostic-grid snapshots need not be powers of two, so bypass make().
  Grid2D g{static_cast<std::size_t>(n1), static_cast<std::size_t>(n2), L1, L2};
  ComplexField f(g, t);
  is.read(reinterpret_cast<char*>(f.data.data()), static_cast<std::streamsize>(f.data.size() * 16));
  if (!is) throw Error(ErrorKind::Io, "truncated snapshot: " + path);
  return f;
}

}  // namespace msq
