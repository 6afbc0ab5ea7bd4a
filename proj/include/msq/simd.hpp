#pragma once

#include <cstddef>
#include <vector>

#include "msq/aligned.hpp"

namespace msq::simd {

enum class Isa { Scalar, Avx2 };

// Pointwise field kernels. Every variant must agree with the scalar
// reference to a few ulps; the reductions use a fixed lane order so results
// are deterministic for a given ISA.
struct Kernels {
  Isa isa;
  // d[i] *= m[i]
  void (*cmul)(cplx* d, const cplx* m, std::size_t n);
  // d[i*n2 + j] *= a[i] * b[j]
  void (*cmul_outer)(cplx* d, const cplx* a, const cplx* b, std::size_t n1, std::size_t n2);
  // d[i] *= r[i]
  void (*rmul)(cplx* d, const double* r, std::size_t n);
  // d[i] *= s
  void (*scale)(cplx* d, double s, std::size_t n);
  double (*sum_abs2)(const cplx* d, std::size_t n);
  double (*sum_abs3)(const cplx* d, std::size_t n);
  double (*max_abs)(const cplx* d, std::size_t n);
};

const char* name(Isa isa);
bool supported(Isa isa);
std::vector<Isa> supported_isas();

// Kernels for a given ISA (must be supported).
const Kernels& kernels(Isa isa);

// Active table: chosen once from MSQ_SIMD=scalar|avx2|auto (default auto),
// falling back to scalar when the CPU lacks the requested ISA.
const Kernels& active();

namespace scalar {
void cmul(cplx* d, const cplx* m, std::size_t n);
void cmul_outer(cplx* d, const cplx* a, const cplx* b, std::size_t n1, std::size_t n2);
void rmul(cplx* d, const double* r, std::size_t n);
void scale(cplx* d, double s, std::size_t n);
double sum_abs2(const cplx* d, std::size_t n);
double sum_abs3(const cplx* d, std::size_t n);
double max_abs(const cplx* d, std::size_t n);
}  // namespace scalar

#if defined(__x86_64__)
namespace avx2 {
void cmul(cplx* d, const cplx* m, std::size_t n);
void cmul_outer(cplx* d, const cplx* a, const cplx* b, std::size_t n1, std::size_t n2);
void rmul(cplx* d, const double* r, std::size_t n);
void scale(cplx* d, double s, std::size_t n);
double sum_abs2(const cplx* d, std::size_t n);
double sum_abs3(const cplx* d, std::size_t n);
double max_abs(const cplx* d, std::size_t n);
}  // namespace avx2
#endif

}  // namespace msq::simd
