// AVX2 variants. Only raw pointers and intrinsics live here so that no
// inline library template gets instantiated with AVX2 code generation.
// Operation order mirrors the scalar kernels (no FMA), which makes the two
// paths bit-identical rather than merely close.
#if defined(__x86_64__)

#include <immintrin.h>

#include <cmath>

#include "msq/simd.hpp"

#define MSQ_AVX2 __attribute__((target("avx2")))

namespace msq::simd::avx2 {

namespace {

MSQ_AVX2 inline __m256d cmul2(__m256d x, __m256d m) {
  __m256d m_re = _mm256_movedup_pd(m);
  __m256d m_im = _mm256_permute_pd(m, 0xF);
  __m256d x_sw = _mm256_permute_pd(x, 0x5);
  return _mm256_addsub_pd(_mm256_mul_pd(x, m_re), _mm256_mul_pd(x_sw, m_im));
}

MSQ_AVX2 inline void cmul_tail(double* p, const double* q) {
  double ar = p[0], ai = p[1], br = q[0], bi = q[1];
  p[0] = ar * br - ai * bi;
  p[1] = ai * br + ar * bi;
}

}  // namespace

MSQ_AVX2 void cmul(cplx* d, const cplx* m, std::size_t n) {
  double* p = reinterpret_cast<double*>(d);
  const double* q = reinterpret_cast<const double*>(m);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    __m256d x = _mm256_loadu_pd(p + 2 * i);
    __m256d y = _mm256_loadu_pd(q + 2 * i);
    _mm256_storeu_pd(p + 2 * i, cmul2(x, y));
  }
  if (i < n) cmul_tail(p + 2 * i, q + 2 * i);
}

MSQ_AVX2 void cmul_outer(cplx* d, const cplx* a, const cplx* b, std::size_t n1, std::size_t n2) {
  const double* pb = reinterpret_cast<const double*>(b);
  const double* pa = reinterpret_cast<const double*>(a);
  for (std::size_t i = 0; i < n1; ++i) {
    __m256d av = _mm256_setr_pd(pa[2 * i], pa[2 * i + 1], pa[2 * i], pa[2 * i + 1]);
    double* row = reinterpret_cast<double*>(d + i * n2);
    std::size_t j = 0;
    for (; j + 2 <= n2; j += 2) {
      __m256d mv = cmul2(av, _mm256_loadu_pd(pb + 2 * j));
      __m256d x = _mm256_loadu_pd(row + 2 * j);
      _mm256_storeu_pd(row + 2 * j, cmul2(x, mv));
    }
    if (j < n2) {
      double m[2] = {pa[2 * i], pa[2 * i + 1]};
      cmul_tail(m, pb + 2 * j);
      cmul_tail(row + 2 * j, m);
    }
  }
}

MSQ_AVX2 void rmul(cplx* d, const double* r, std::size_t n) {
  double* p = reinterpret_cast<double*>(d);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    __m256d rv = _mm256_setr_pd(r[i], r[i], r[i + 1], r[i + 1]);
    _mm256_storeu_pd(p + 2 * i, _mm256_mul_pd(_mm256_loadu_pd(p + 2 * i), rv));
  }
  if (i < n) {
    p[2 * i] *= r[i];
    p[2 * i + 1] *= r[i];
  }
}

MSQ_AVX2 void scale(cplx* d, double s, std::size_t n) {
  double* p = reinterpret_cast<double*>(d);
  __m256d sv = _mm256_set1_pd(s);
  std::size_t m = 2 * n, i = 0;
  for (; i + 4 <= m; i += 4) _mm256_storeu_pd(p + i, _mm256_mul_pd(_mm256_loadu_pd(p + i), sv));
  for (; i < m; ++i) p[i] *= s;
}

MSQ_AVX2 double sum_abs2(const cplx* d, std::size_t n) {
  const double* p = reinterpret_cast<const double*>(d);
  __m256d acc = _mm256_setzero_pd();
  std::size_t m = 2 * n, i = 0;
  for (; i + 4 <= m; i += 4) {
    __m256d x = _mm256_loadu_pd(p + i);
    acc = _mm256_add_pd(acc, _mm256_mul_pd(x, x));
  }
  alignas(32) double a[4];
  _mm256_store_pd(a, acc);
  for (int l = 0; i < m; ++i, ++l) a[l] += p[i] * p[i];
  return (a[0] + a[2]) + (a[1] + a[3]);
}

MSQ_AVX2 double sum_abs3(const cplx* d, std::size_t n) {
  const double* p = reinterpret_cast<const double*>(d);
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    __m256d x = _mm256_loadu_pd(p + 2 * i);
    __m256d sq = _mm256_mul_pd(x, x);
    __m256d a2 = _mm256_hadd_pd(sq, sq);  // |z0|^2 |z0|^2 |z1|^2 |z1|^2
    acc = _mm256_add_pd(acc, _mm256_mul_pd(a2, _mm256_sqrt_pd(a2)));
  }
  alignas(32) double a[4];
  _mm256_store_pd(a, acc);
  double s0 = a[0], s1 = a[2];
  if (i < n) {
    double a2 = p[2 * i] * p[2 * i] + p[2 * i + 1] * p[2 * i + 1];
    s0 += a2 * std::sqrt(a2);
  }
  return s0 + s1;
}

MSQ_AVX2 double max_abs(const cplx* d, std::size_t n) {
  const double* p = reinterpret_cast<const double*>(d);
  __m256d mx = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    __m256d x = _mm256_loadu_pd(p + 2 * i);
    __m256d sq = _mm256_mul_pd(x, x);
    mx = _mm256_max_pd(mx, _mm256_hadd_pd(sq, sq));
  }
  alignas(32) double a[4];
  _mm256_store_pd(a, mx);
  double m = a[0] > a[2] ? a[0] : a[2];
  if (i < n) {
    double a2 = p[2 * i] * p[2 * i] + p[2 * i + 1] * p[2 * i + 1];
    m = a2 > m ? a2 : m;
  }
  return std::sqrt(m);
}

}  // namespace msq::simd::avx2

#endif
