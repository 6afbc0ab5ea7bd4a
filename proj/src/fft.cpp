#include "msq/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <tuple>

#include "msq/parallel.hpp"

namespace msq::fft {

namespace {

std::mutex g_mutex;

fftw_plan get_plan(std::size_t n1, std::size_t n2, int sign) {
  static std::map<std::tuple<std::size_t, std::size_t, int>, fftw_plan> cache;
  static bool threads_ready = false;
  std::lock_guard<std::mutex> lock(g_mutex);
  auto key = std::make_tuple(n1, n2, sign);
  if (auto it = cache.find(key); it != cache.end()) return it->second;
  if (!threads_ready) {
    fftw_init_threads();
    threads_ready = true;
  }
  // Threading only pays off for 2D transforms; 1D kernels are batched by
  // the caller across workers instead.
  fftw_plan_with_nthreads(n1 > 1 ? thread_count() : 1);
  std::size_t total = n1 * n2;
  fftw_complex* buf = fftw_alloc_complex(total);
  fftw_plan p = n1 > 1 ? fftw_plan_dft_2d(static_cast<int>(n1), static_cast<int>(n2), buf, buf, sign, FFTW_ESTIMATE)
                       : fftw_plan_dft_1d(static_cast<int>(n2), buf, buf, sign, FFTW_ESTIMATE);
  fftw_free(buf);
  cache.emplace(key, p);
  return p;
}

void run(cplx* data, std::size_t n1, std::size_t n2, int sign) {
  fftw_plan p = get_plan(n1, n2, sign);
  auto* d = reinterpret_cast<fftw_complex*>(data);
  fftw_execute_dft(p, d, d);
}

}  // namespace

void forward2d(cplx* data, std::size_t n1, std::size_t n2) { run(data, n1, n2, FFTW_FORWARD); }
void backward2d(cplx* data, std::size_t n1, std::size_t n2) { run(data, n1, n2, FFTW_BACKWARD); }
void forward1d(cplx* data, std::size_t n) { run(data, 1, n, FFTW_FORWARD); }
void backward1d(cplx* data, std::size_t n) { run(data, 1, n, FFTW_BACKWARD); }

}  // namespace msq::fft
