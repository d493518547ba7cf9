#pragma once

#include <complex>

namespace cmm::fft {

using cplx = std::complex<double>;

// In-place d-dimensional complex DFT over an N^d row-major array.
// forward: sum_x f(x) e^{-ik.x}; backward is unnormalized.
void forward(int d, int N, cplx* data);
void backward(int d, int N, cplx* data);

// Unnormalized DCT-II (FFTW REDFT10) and DCT-III (REDFT01) of length M, in place.
void dct2(int M, double* data);
void dct3(int M, double* data);

}  // namespace cmm::fft
