#include <algorithm>
#include <cmath>

#include "msq/simd.hpp"

namespace msq::simd::scalar {

// Raw re/im arithmetic: std::complex operator* goes through the C99 Annex G
// NaN recovery path, which is both slower and not what the vector code does.
void cmul(cplx* d, const cplx* m, std::size_t n) {
  double* p = reinterpret_cast<double*>(d);
  const double* q = reinterpret_cast<const double*>(m);
  for (std::size_t i = 0; i < n; ++i) {
    double ar = p[2 * i], ai = p[2 * i + 1], br = q[2 * i], bi = q[2 * i + 1];
    p[2 * i] = ar * br - ai * bi;
    p[2 * i + 1] = ai * br + ar * bi;
  }
}

void cmul_outer(cplx* d, const cplx* a, const cplx* b, std::size_t n1, std::size_t n2) {
  const double* pb = reinterpret_cast<const double*>(b);
  for (std::size_t i = 0; i < n1; ++i) {
    double ar = a[i].real(), ai = a[i].imag();
    double* row = reinterpret_cast<double*>(d + i * n2);
    for (std::size_t j = 0; j < n2; ++j) {
      double mr = ar * pb[2 * j] - ai * pb[2 * j + 1];
      double mi = ai * pb[2 * j] + ar * pb[2 * j + 1];
      double xr = row[2 * j], xi = row[2 * j + 1];
      row[2 * j] = xr * mr - xi * mi;
      row[2 * j + 1] = xi * mr + xr * mi;
    }
  }
}

void rmul(cplx* d, const double* r, std::size_t n) {
  double* p = reinterpret_cast<double*>(d);
  for (std::size_t i = 0; i < n; ++i) {
    p[2 * i] *= r[i];
    p[2 * i + 1] *= r[i];
  }
}

void scale(cplx* d, double s, std::size_t n) {
  double* p = reinterpret_cast<double*>(d);
  for (std::size_t i = 0; i < 2 * n; ++i) p[i] *= s;
}

// Reductions accumulate in four interleaved partial sums, the same lane
// layout the AVX2 variant uses, then combine them in a fixed order.
double sum_abs2(const cplx* d, std::size_t n) {
  const double* p = reinterpret_cast<const double*>(d);
  double acc[4] = {0, 0, 0, 0};
  std::size_t m = 2 * n;
  std::size_t i = 0;
  for (; i + 4 <= m; i += 4)
    for (int l = 0; l < 4; ++l) acc[l] += p[i + l] * p[i + l];
  for (int l = 0; i < m; ++i, ++l) acc[l] += p[i] * p[i];
  return (acc[0] + acc[2]) + (acc[1] + acc[3]);
}

double sum_abs3(const cplx* d, std::size_t n) {
  const double* p = reinterpret_cast<const double*>(d);
  double acc[2] = {0, 0};
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2)
    for (int l = 0; l < 2; ++l) {
      double a2 = p[2 * (i + l)] * p[2 * (i + l)] + p[2 * (i + l) + 1] * p[2 * (i + l) + 1];
      acc[l] += a2 * std::sqrt(a2);
    }
  if (i < n) {
    double a2 = p[2 * i] * p[2 * i] + p[2 * i + 1] * p[2 * i + 1];
    acc[0] += a2 * std::sqrt(a2);
  }
  return acc[0] + acc[1];
}

double max_abs(const cplx* d, std::size_t n) {
  const double* p = reinterpret_cast<const double*>(d);
  double m = 0.0;
  for (std::size_t i = 0; i < n; ++i) m = std::max(m, p[2 * i] * p[2 * i] + p[2 * i + 1] * p[2 * i + 1]);
  return std::sqrt(m);
}

}  // namespace msq::simd::scalar
