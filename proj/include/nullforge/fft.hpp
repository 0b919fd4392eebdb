#pragma once

#include <complex>
#include <vector>

namespace nullforge::fft {

using cd = std::complex<double>;

// In-place unnormalized DFT. sign = -1 computes sum a_k e^{-2 pi i jk/n}, sign = +1 the conjugate kernel.
void transform(std::vector<cd>& a, int sign);

std::size_t next_pow2(std::size_t n);

// Linear convolution of two coefficient vectors; switches to FFT above a size threshold.
std::vector<cd> convolve(const std::vector<cd>& a, const std::vector<cd>& b);

}  // namespace nullforge::fft
