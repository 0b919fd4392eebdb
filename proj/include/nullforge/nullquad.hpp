#pragma once

#include <array>
#include <optional>

#include "nullforge/series.hpp"

namespace nullforge {

using Spinor = Eigen::Vector2cd;

cd theta_form(const CVec& z, const CVec& w);
bool is_null(const CVec& z, double rel_tol = 1e-10);

CVec spinor_pi(cd u, cd v);
inline CVec spinor_pi(const Spinor& s) { return spinor_pi(s[0], s[1]); }
// Symmetric bilinear form with spinor_pi(x + y) = spinor_pi(x) + spinor_pi(y) + 2 spinor_polar(x, y).
CVec spinor_polar(const Spinor& x, const Spinor& y);
// One of the two preimages of a point of the quadric in C^3; the one nearest to `near` when given.
Spinor spinor_preimage(const CVec& f, const std::optional<Spinor>& near = std::nullopt);

// Square root chosen continuously along a sampled path (principal on first use).
cd continuous_sqrt(cd x, const std::optional<cd>& previous);

class BranchTracker {
 public:
  enum Channel { SqrtA = 0, SqrtHalfIOverB = 1, SqrtC = 2, SqrtR = 3 };
  cd sqrt(Channel ch, cd x);
  std::optional<cd> last(Channel ch) const { return last_[ch]; }
  void set(Channel ch, cd value) { last_[ch] = value; }

 private:
  std::array<std::optional<cd>, 4> last_{};
};

struct FrameTriple {
  CVec u, v, w;
  cd a, b, c;  // a = theta(v, w), b = theta(u, w), c = theta(u, v)
  static FrameTriple make(const CVec& u, const CVec& v, const CVec& w);
};

struct FrameMatrices {
  Eigen::Matrix3cd A;
  Eigen::Matrix2cd B;
};

FrameMatrices frame_matrices(const FrameTriple& t, BranchTracker& br);
CVec psi_param(const FrameTriple& t, const FrameMatrices& m, cd s, cd tpar);
CVec psi_param(const FrameTriple& t, BranchTracker& br, cd s, cd tpar);

struct LiftOptions {
  int samples = 256;  // minimum angular samples per circle
  int radii = 8;      // concentric verification circles
  double residual_rel = 1e-6;
  int max_samples = 1 << 17;
};

struct SpinorLift {
  VectorLaurent h;  // two components
  double residual = 0.0;
};

SpinorLift spinor_lift_disc(const VectorLaurent& f, const LiftOptions& opt = {});

struct PsiLift {
  VectorLaurent h;      // frame coordinates with psi_{f}(h) = f
  VectorLaurent cross;  // polarization of psi between e1 and h, so psi(h + g e1) = f + g^2 u + 2 g cross
  double residual = 0.0;
  cd theta_uv;
};

PsiLift lift_via_psi(const VectorLaurent& f, const CVec& u, const CVec& v, const LiftOptions& opt = {});

}  // namespace nullforge
