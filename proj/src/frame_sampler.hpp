#pragma once

#include "nullforge/boost.hpp"
#include "nullforge/fft.hpp"

namespace nullforge::detail {

inline constexpr double kTwoPi = 2.0 * M_PI;

// Plain cross product; Eigen conjugates the result for complex vectors.
inline Eigen::Vector3cd cross(const Eigen::Vector3d& a, const Eigen::Vector3cd& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

// Projection onto the null line of w-perp selected by the orientation.
inline Eigen::Vector3cd null_projection(const Eigen::Vector3d& e, const Eigen::Vector3cd& x, int orientation) {
  const cd ex = e[0] * x[0] + e[1] * x[1] + e[2] * x[2];
  return 0.5 * ((x - e.cast<cd>() * ex) - cd(0.0, orientation) * cross(e, x));
}

// F', F - Y on the unit circle, served from an FFT grid when zeta is one of its nodes.
class BoundarySampler {
 public:
  BoundarySampler(const ImmersionDisc& F, const BoundaryMap& Y)
      : BoundarySampler(F.phi, F, Y) {}
  // phase replaces F' in the returned phi
  BoundarySampler(const VectorLaurent& phase, const ImmersionDisc& F, const BoundaryMap& Y)
      : phi_(phase), prim_(antiderivative_from_zero(F.phi).poly), base_(F.base), Y_(Y) {}

  // w = F(zeta) - Y(zeta)
  void at(cd z, CVec& phi, RVec& w) {
    double th = std::arg(z);
    if (th < 0) th += kTwoPi;
    for (int M = 16; M <= (1 << 20); M *= 2) {
      const double x = th / kTwoPi * M;
      if (std::abs(x - std::round(x)) > 1e-6) continue;
      if (M > M_ || M_ % M != 0) build(std::max(M, M_));
      const int k = static_cast<int>(std::lround(x)) % M * (M_ / M);
      phi = phiv_.row(k).transpose();
      w = wv_.row(k).transpose();
      return;
    }
    phi = eval_poly(phi_, z);
    w = base_ + eval_poly(prim_, z).real() - Y_.eval(z);
  }

 private:
  void build(int M) {
    M_ = M;
    phiv_ = eval_circle(phi_, 1.0, M);
    wv_ = eval_circle(prim_, 1.0, M).real() - eval_circle(Y_.fourier, 1.0, M).real();
    wv_.rowwise() += base_.transpose();
  }

  VectorLaurent phi_, prim_;
  RVec base_;
  BoundaryMap Y_;
  int M_ = 0;
  Eigen::MatrixXcd phiv_;
  Eigen::MatrixXd wv_;
};

// Sampling grids for boundary data built from a surface of the given degree; coarser grids alias its frame.
inline RhOptions widened_for(RhOptions opt, int degree) {
  const int deg = std::max(0, degree);
  opt.rat.max_window = std::max(opt.rat.max_window, 4 * (deg + 1) + 256);
  opt.rat.m0 = std::max(opt.rat.m0, 4 * (deg + 1));
  opt.track_samples =
      std::max(opt.track_samples, static_cast<int>(fft::next_pow2(static_cast<std::size_t>(8 * (deg + 1)))));
  return opt;
}

}  // namespace nullforge::detail
