#include <cstdlib>
#include <string>

#include "msq/error.hpp"
#include "msq/simd.hpp"

namespace msq::simd {

namespace {

const Kernels kScalar{Isa::Scalar,       scalar::cmul,     scalar::cmul_outer, scalar::rmul,
                      scalar::scale,     scalar::sum_abs2, scalar::sum_abs3,   scalar::max_abs};
#if defined(__x86_64__)
const Kernels kAvx2{Isa::Avx2,     avx2::cmul,     avx2::cmul_outer, avx2::rmul,
                    avx2::scale,   avx2::sum_abs2, avx2::sum_abs3,   avx2::max_abs};
#endif

const Kernels& select() {
  std::string want = "auto";
  if (const char* env = std::getenv("MSQ_SIMD")) want = env;
  if (want == "scalar") return kScalar;
  if (supported(Isa::Avx2)) return kernels(Isa::Avx2);
  return kScalar;
}

}  // namespace

const char* name(Isa isa) { return isa == Isa::Avx2 ? "avx2" : "scalar"; }

bool supported(Isa isa) {
  if (isa == Isa::Scalar) return true;
#if defined(__x86_64__)
  return __builtin_cpu_supports("avx2");
#else
  return false;
#endif
}

std::vector<Isa> supported_isas() {
  std::vector<Isa> out{Isa::Scalar};
  if (supported(Isa::Avx2)) out.push_back(Isa::Avx2);
  return out;
}

const Kernels& kernels(Isa isa) {
#if defined(__x86_64__)
  if (isa == Isa::Avx2) {
    if (!supported(isa)) throw Error(ErrorKind::Config, "AVX2 kernels requested on a CPU without AVX2");
    return kAvx2;
  }
#endif
  return kScalar;
}

const Kernels& active() {
  static const Kernels& k = select();
  return k;
}

}  // namespace msq::simd
