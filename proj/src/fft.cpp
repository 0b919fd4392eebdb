#include "nullforge/fft.hpp"

#include <fftw3.h>

namespace nullforge::fft {

void transform(std::vector<cd>& a, int sign) {
  if (a.size() <= 1) return;
  auto* data = reinterpret_cast<fftw_complex*>(a.data());
  fftw_plan plan = fftw_plan_dft_1d(static_cast<int>(a.size()), data, data,
                                    sign < 0 ? FFTW_FORWARD : FFTW_BACKWARD, FFTW_ESTIMATE);
  fftw_execute(plan);
  fftw_destroy_plan(plan);
}

std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

std::vector<cd> convolve(const std::vector<cd>& a, const std::vector<cd>& b) {
  if (a.empty() || b.empty()) return {};
  const std::size_t out = a.size() + b.size() - 1;
  if (a.size() < 64 || b.size() < 64) {
    std::vector<cd> r(out, cd{});
    for (std::size_t i = 0; i < a.size(); ++i)
      for (std::size_t j = 0; j < b.size(); ++j) r[i + j] += a[i] * b[j];
    return r;
  }
  const std::size_t n = next_pow2(out);
  std::vector<cd> fa(n, cd{}), fb(n, cd{});
  std::copy(a.begin(), a.end(), fa.begin());
  std::copy(b.begin(), b.end(), fb.begin());
  transform(fa, -1);
  transform(fb, -1);
  for (std::size_t i = 0; i < n; ++i) fa[i] *= fb[i];
  transform(fa, +1);
  fa.resize(out);
  const double scale = 1.0 / static_cast<double>(n);
  for (auto& x : fa) x *= scale;
  return fa;
}

}  // namespace nullforge::fft
