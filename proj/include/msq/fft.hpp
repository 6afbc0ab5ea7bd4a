#pragma once

#include <cstddef>

#include "msq/aligned.hpp"

namespace msq::fft {

// In-place unnormalized transforms. Forward uses e^{-2 pi i jm/n}, backward
// e^{+2 pi i jm/n}. Plans are FFTW_ESTIMATE (deterministic) and cached per
// shape; data must be 64-byte aligned like every CVec.
void forward2d(cplx* data, std::size_t n1, std::size_t n2);
void backward2d(cplx* data, std::size_t n1, std::size_t n2);
void forward1d(cplx* data, std::size_t n);
void backward1d(cplx* data, std::size_t n);

}  // namespace msq::fft
