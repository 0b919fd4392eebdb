#include "nullforge/nullquad.hpp"

#include <cmath>

#include "nullforge/errors.hpp"
#include "nullforge/fft.hpp"

namespace nullforge {

namespace {

const cd I{0.0, 1.0};

int samples_for(const VectorLaurent& f, const LiftOptions& opt) {
  const int need = std::max(opt.samples, 4 * (std::max(f.jmax(), 0) - std::min(f.jmin(), 0) + 1));
  return static_cast<int>(fft::next_pow2(static_cast<std::size_t>(std::max(need, 16))));
}

// Fourier fit of circle samples; rejects lifts that do not extend holomorphically.
LaurentPoly holomorphic_fit(const std::vector<cd>& samples, double scale) {
  const int M = static_cast<int>(samples.size());
  LaurentPoly p = fit_circle(samples, M / 2 - 1);
  double neg = 0.0;
  for (int j = p.jmin; j < 0; ++j) neg += std::abs(p.coeff(j));
  if (neg > 1e-7 * std::max(scale, 1e-300)) throw LiftError("boundary lift has no holomorphic extension to the disc");
  std::vector<cd> c;
  for (int j = 0; j <= p.jmax(); ++j) c.push_back(p.coeff(j));
  return LaurentPoly{0, std::move(c)}.trimmed(1e-17 * scale);
}

bool tracking_step_ok(cd chosen, cd previous) {
  return std::abs(chosen - previous) < 0.7 * std::abs(chosen + previous);
}

}  // namespace

cd theta_form(const CVec& z, const CVec& w) {
  if (z.size() != w.size()) throw DimensionError("theta_form: dimension mismatch");
  return (z.array() * w.array()).sum();
}

bool is_null(const CVec& z, double rel_tol) { return std::abs(theta_form(z, z)) <= rel_tol * z.squaredNorm(); }

CVec spinor_pi(cd u, cd v) {
  CVec r(3);
  r << u * u - v * v, 2.0 * u * v, -I * (u * u + v * v);
  return r;
}

CVec spinor_polar(const Spinor& x, const Spinor& y) {
  CVec r(3);
  r << x[0] * y[0] - x[1] * y[1], x[0] * y[1] + x[1] * y[0], -I * (x[0] * y[0] + x[1] * y[1]);
  return r;
}

Spinor spinor_preimage(const CVec& f, const std::optional<Spinor>& near) {
  if (f.size() != 3) throw DimensionError("spinor preimage needs a point of C^3");
  const cd uu = 0.5 * (f[0] + I * f[2]);
  const cd vv = 0.5 * (I * f[2] - f[0]);
  Spinor s;
  if (std::abs(uu) >= std::abs(vv)) {
    s[0] = std::sqrt(uu);
    s[1] = s[0] == cd{} ? cd{} : 0.5 * f[1] / s[0];
  } else {
    s[1] = std::sqrt(vv);
    s[0] = 0.5 * f[1] / s[1];
  }
  if (near && (s - *near).norm() > (s + *near).norm()) s = -s;
  return s;
}

cd continuous_sqrt(cd x, const std::optional<cd>& previous) {
  cd r = std::sqrt(x);
  if (previous && std::abs(r - *previous) > std::abs(r + *previous)) r = -r;
  return r;
}

cd BranchTracker::sqrt(Channel ch, cd x) {
  const cd r = continuous_sqrt(x, last_[ch]);
  last_[ch] = r;
  return r;
}

FrameTriple FrameTriple::make(const CVec& u, const CVec& v, const CVec& w) {
  if (u.size() != v.size() || u.size() != w.size() || u.size() < 3) throw DimensionError("frame legs must share a dimension >= 3");
  return {u, v, w, theta_form(v, w), theta_form(u, w), theta_form(u, v)};
}

FrameMatrices frame_matrices(const FrameTriple& t, BranchTracker& br) {
  const double sa = t.v.norm() * t.w.norm(), sb = t.u.norm() * t.w.norm(), sc = t.u.norm() * t.v.norm();
  if (std::abs(t.a) < 1e-8 * sa || std::abs(t.b) < 1e-8 * sb || std::abs(t.c) < 1e-8 * sc)
    throw DegenerateFrameError("frame has a vanishing pairing theta(v,w), theta(u,w) or theta(u,v)");
  FrameMatrices m;
  m.A << 1.0 / t.a, 0.0, -I / t.a, -I / t.b, 1.0 / t.b, 0.0, 0.0, -I / t.c, 1.0 / t.c;
  const cd ra = br.sqrt(BranchTracker::SqrtA, t.a);
  const cd beta = br.sqrt(BranchTracker::SqrtHalfIOverB, I / (2.0 * t.b));
  m.B << 1.0 / ra, 0.0, I * beta, -beta;
  return m;
}

CVec psi_param(const FrameTriple& t, const FrameMatrices& m, cd s, cd tpar) {
  const Spinor x(s * m.B(0, 0) + tpar * m.B(1, 0), s * m.B(0, 1) + tpar * m.B(1, 1));
  const Eigen::Vector3cd q = spinor_pi(x);
  const Eigen::Vector3cd coords = m.A.transpose().partialPivLu().solve(q);
  return coords[0] * t.u + coords[1] * t.v + coords[2] * t.w;
}

CVec psi_param(const FrameTriple& t, BranchTracker& br, cd s, cd tpar) {
  return psi_param(t, frame_matrices(t, br), s, tpar);
}

SpinorLift spinor_lift_disc(const VectorLaurent& f, const LiftOptions& opt) {
  if (f.dim() != 3) throw DimensionError("spinor lift needs a map into C^3");
  for (int M = samples_for(f, opt); M <= opt.max_samples; M *= 2) {
    const Eigen::MatrixXcd outer = eval_circle(f, 1.0, M);
    double sup = 0.0;
    for (int k = 0; k < M; ++k) sup = std::max(sup, outer.row(k).norm());
    if (sup == 0.0) throw LiftError("map is identically zero");
    std::vector<Eigen::MatrixXcd> circles;
    for (int r = 1; r <= opt.radii; ++r) {
      circles.push_back(eval_circle(f, static_cast<double>(r) / opt.radii, M));
      for (int k = 0; k < M; ++k)
        if (circles.back().row(k).norm() <= 1e-6 * sup) throw LiftError("map approaches the branch point of the spinor map");
    }
    std::vector<cd> h0(static_cast<std::size_t>(M)), h1(static_cast<std::size_t>(M));
    std::optional<Spinor> prev;
    bool coarse = false;
    for (int k = 0; k <= M && !coarse; ++k) {
      const Spinor s = spinor_preimage(outer.row(k % M).transpose(), prev);
      if (prev && !((s - *prev).norm() < 0.7 * (s + *prev).norm()))
        coarse = true;
      if (k == M) {
        if ((s - Spinor(h0[0], h1[0])).norm() > (s + Spinor(h0[0], h1[0])).norm())
          throw LiftError("no continuous spinor lift along the boundary circle");
        break;
      }
      h0[static_cast<std::size_t>(k)] = s[0];
      h1[static_cast<std::size_t>(k)] = s[1];
      prev = s;
    }
    if (coarse) continue;
    const double hscale = std::sqrt(sup);
    SpinorLift out;
    out.h = VectorLaurent(std::vector<LaurentPoly>{holomorphic_fit(h0, hscale), holomorphic_fit(h1, hscale)});
    double res = 0.0;
    for (int r = 1; r <= opt.radii; ++r) {
      const double rho = static_cast<double>(r) / opt.radii;
      const Eigen::MatrixXcd hv = eval_circle(out.h, rho, M);
      for (int k = 0; k < M; ++k)
        res = std::max(res, (spinor_pi(hv(k, 0), hv(k, 1)) - circles[static_cast<std::size_t>(r - 1)].row(k).transpose()).norm());
    }
    out.residual = res / sup;
    if (out.residual <= opt.residual_rel) return out;
  }
  throw FitError("spinor lift residual target not reached at the maximal sample count");
}

PsiLift lift_via_psi(const VectorLaurent& f, const CVec& u, const CVec& v, const LiftOptions& opt) {
  const auto n = static_cast<Eigen::Index>(f.dim());
  if (u.size() != n || v.size() != n || n < 3) throw DimensionError("frame legs and map must share a dimension >= 3");
  const cd c = theta_form(u, v);
  if (std::abs(c) < 1e-8 * u.norm() * v.norm()) throw DegenerateFrameError("theta(u, v) vanishes");
  const cd p = std::sqrt(I / (2.0 * c));

  for (int M = samples_for(f, opt); M <= opt.max_samples; M *= 2) {
    const Eigen::MatrixXcd outer = eval_circle(f, 1.0, M);
    double sup = 0.0;
    for (int k = 0; k < M; ++k) sup = std::max(sup, outer.row(k).norm());
    const double gate = 1e-6 * sup * std::max(u.norm(), v.norm());
    std::vector<Eigen::MatrixXcd> circles;
    for (int r = 1; r <= opt.radii; ++r) {
      circles.push_back(eval_circle(f, static_cast<double>(r) / opt.radii, M));
      const auto& C = circles.back();
      for (int k = 0; k < M; ++k) {
        const CVec w = C.row(k).transpose();
        if (std::abs(theta_form(u, w)) <= gate || std::abs(theta_form(v, w)) <= gate)
          throw NondegeneracyError("theta(u, f) or theta(v, f) vanishes on the disc");
      }
    }

    std::vector<cd> hs(static_cast<std::size_t>(M)), ht(static_cast<std::size_t>(M));
    std::vector<std::vector<cd>> xs(static_cast<std::size_t>(n), std::vector<cd>(static_cast<std::size_t>(M)));
    BranchTracker br;
    std::optional<cd> first_a, first_b;
    bool coarse = false;
    const Eigen::RowVector3cd probe(1.0, -1.0, -I);
    for (int k = 0; k <= M; ++k) {
      const CVec w = outer.row(k % M).transpose();
      const FrameTriple t = FrameTriple::make(u, v, w);
      const auto prev_a = br.last(BranchTracker::SqrtA), prev_b = br.last(BranchTracker::SqrtHalfIOverB);
      const FrameMatrices m = frame_matrices(t, br);
      const cd ra = br.last(BranchTracker::SqrtA).value(), beta = br.last(BranchTracker::SqrtHalfIOverB).value();
      if (prev_a && (!tracking_step_ok(ra, *prev_a) || !tracking_step_ok(beta, *prev_b))) {
        coarse = true;
        break;
      }
      if (k == M) {
        if (std::abs(ra - *first_a) > std::abs(ra + *first_a) || std::abs(beta - *first_b) > std::abs(beta + *first_b))
          throw LiftError("frame square roots do not close up along the boundary circle");
        break;
      }
      if (k == 0) {
        first_a = ra;
        first_b = beta;
      }
      hs[static_cast<std::size_t>(k)] = ra * p * (1.0 - I);
      ht[static_cast<std::size_t>(k)] = p / beta;
      const Eigen::Vector3cd y = m.A.transpose().partialPivLu().solve(probe.transpose());
      const CVec x = (p / ra) * (y[0] * u + y[1] * v + y[2] * w);
      for (Eigen::Index q = 0; q < n; ++q) xs[static_cast<std::size_t>(q)][static_cast<std::size_t>(k)] = x[q];
    }
    if (coarse) continue;

    PsiLift out;
    out.theta_uv = c;
    double hscale = 0.0;
    for (int k = 0; k < M; ++k) hscale = std::max(hscale, std::abs(hs[k]) + std::abs(ht[k]));
    out.h = VectorLaurent(std::vector<LaurentPoly>{holomorphic_fit(hs, hscale), holomorphic_fit(ht, hscale)});
    out.cross = VectorLaurent(static_cast<std::size_t>(n));
    double xscale = 0.0;
    for (const auto& col : xs)
      for (const auto& x : col) xscale = std::max(xscale, std::abs(x));
    for (Eigen::Index q = 0; q < n; ++q) out.cross.comp[static_cast<std::size_t>(q)] = holomorphic_fit(xs[static_cast<std::size_t>(q)], xscale);

    // Forward check with branches continued radially inward and then around each circle.
    double res = 0.0;
    BranchTracker radial;
    (void)frame_matrices(FrameTriple::make(u, v, outer.row(0).transpose()), radial);
    double rho_prev = 1.0;
    for (int r = opt.radii; r >= 1; --r) {
      const double rho = static_cast<double>(r) / opt.radii;
      const int sub = 32;
      for (int s = 1; rho < rho_prev && s <= sub; ++s) {
        const double rr = rho_prev + (rho - rho_prev) * s / sub;
        (void)frame_matrices(FrameTriple::make(u, v, eval_poly(f, cd(rr))), radial);
      }
      rho_prev = rho;
      BranchTracker around = radial;
      const Eigen::MatrixXcd hv = eval_circle(out.h, rho, M);
      const auto& C = circles[static_cast<std::size_t>(r - 1)];
      for (int k = 0; k < M; ++k) {
        const CVec w = C.row(k).transpose();
        const FrameTriple t = FrameTriple::make(u, v, w);
        const FrameMatrices m = frame_matrices(t, around);
        res = std::max(res, (psi_param(t, m, hv(k, 0), hv(k, 1)) - w).norm());
      }
    }
    out.residual = res / sup;
    if (out.residual <= opt.residual_rel) return out;
  }
  throw FitError("frame lift residual target not reached at the maximal sample count");
}

}  // namespace nullforge
