#include "nullforge/rhsolver.hpp"

#include <chrono>
#include <cstdio>
#include <limits>
#include <ostream>

#include "nullforge/errors.hpp"
#include "nullforge/fft.hpp"

namespace nullforge {

namespace {

constexpr double kTwoPi = 2.0 * M_PI;
const cd kI{0.0, 1.0};

double wrap(double a) { return std::remainder(a, kTwoPi); }

// Columns of P(x, .) as a linear map C^2 -> C^3.
Eigen::Matrix<cd, 3, 2> polar_matrix(const Spinor& x) {
  Eigen::Matrix<cd, 3, 2> m;
  m << x[0], -x[1], x[1], x[0], -kI * x[0], -kI * x[1];
  return m;
}

// Power series s with pi(s) = q, given s_0.
std::vector<Spinor> spinor_series(const std::vector<CVec>& q, const Spinor& s0, int D) {
  std::vector<Spinor> s(D + 1, Spinor::Zero());
  s[0] = s0;
  if (D == 0) return s;
  const Eigen::Matrix<cd, 3, 2> M = 2.0 * polar_matrix(s0);
  const auto solver = M.colPivHouseholderQr();
  for (int n = 1; n <= D; ++n) {
    CVec rhs = n < static_cast<int>(q.size()) ? q[n] : CVec::Zero(3);
    for (int i = 1; i < n; ++i) rhs -= spinor_polar(s[i], s[n - i]);
    s[n] = solver.solve(rhs);
  }
  return s;
}

std::vector<cd> scalar_series(const std::vector<cd>& q, cd s0, int D) {
  std::vector<cd> s(D + 1, 0.0);
  s[0] = s0;
  for (int n = 1; n <= D; ++n) {
    cd rhs = n < static_cast<int>(q.size()) ? q[n] : 0.0;
    for (int i = 1; i < n; ++i) rhs -= s[i] * s[n - i];
    s[n] = rhs / (2.0 * s0);
  }
  return s;
}

// Coefficients of d sigma / d xi at zeta, after the optional twist xi -> zeta xi.
Eigen::MatrixXcd sigma2_coeffs(const DiscFamily& fam, cd zeta, bool twisted) {
  const Eigen::MatrixXcd t = fam.taylor(zeta);
  if (t.rows() < 2) throw PreconditionError("attached disc family needs a linear xi term");
  Eigen::MatrixXcd q(t.rows() - 1, t.cols());
  cd tw = 1.0;
  for (Eigen::Index k = 1; k < t.rows(); ++k) {
    if (twisted) tw *= zeta;
    q.row(k - 1) = double(k) * tw * t.row(k);
  }
  return q;
}

struct LiftTable {
  bool twisted = false;
  int winding = 0;
  int m = 0;
  std::vector<Spinor> s0;  // second entry unused for scalar families
};

// Continuous choice of the root of sigma_2(zeta, 0) around the circle.
LiftTable track_roots(const RhProblem& p, const RhOptions& opt) {
  const bool spin = p.mode == RhMode::Spinor3;
  for (int attempt = 0; attempt < 2; ++attempt) {
    const bool twisted = attempt == 1;
    for (int m = opt.track_samples; m <= std::max(1 << 18, opt.track_samples); m *= 2) {
      std::vector<double> rv(m);
      std::vector<CVec> q0(m);
      for (int k = 0; k < m; ++k) {
        const cd z = std::polar(1.0, kTwoPi * k / m);
        rv[k] = p.r(z);
        q0[k] = sigma2_coeffs(p.sigma, z, twisted).row(0).transpose();
      }
      // Start inside the longest run where r vanishes, so that any sign change is hidden there.
      int start = 0, best_len = 0;
      for (int k = 0; k < m; ++k) {
        if (rv[k] > 0.0 || rv[(k + m - 1) % m] <= 0.0) continue;
        int len = 0;
        while (len < m && rv[(k + len) % m] <= 0.0) ++len;
        if (len > best_len) best_len = len, start = (k + len / 2) % m;
      }
      LiftTable t;
      t.twisted = twisted;
      t.m = m;
      t.s0.assign(m, Spinor::Zero());
      bool coarse = false;
      std::optional<Spinor> prev;
      double turn = 0.0;
      for (int i = 0; i <= m && !coarse; ++i) {
        const int k = (start + i) % m;
        Spinor s;
        if (spin) {
          s = spinor_preimage(q0[k], prev);
        } else {
          s << continuous_sqrt(q0[k][0], prev ? std::optional<cd>((*prev)[0]) : std::nullopt), 0.0;
          if (i > 0) turn += std::arg(q0[k][0] / q0[(k + m - 1) % m][0]);
        }
        if (prev && !((s - *prev).norm() < 0.7 * (s + *prev).norm())) coarse = true;
        if (i == m) {
          const bool closes = (s - t.s0[k]).norm() < (s + t.s0[k]).norm();
          t.winding = static_cast<int>(std::lround(turn / kTwoPi));
          if (!coarse && (closes || rv[start] <= 0.0)) return t;
          break;
        }
        t.s0[k] = s;
        prev = s;
      }
      if (!coarse) break;  // closure failed at adequate resolution
    }
    if (!opt.allow_twist) break;
  }
  throw NoLiftError("attached disc derivatives admit no continuous lift around the circle");
}

// Taylor coefficients in xi of eta(zeta, xi) = sqrt(r) * lift(zeta, r xi).
Eigen::MatrixXcd eta_coeffs(const RhProblem& p, const LiftTable& t, int D, cd zeta) {
  const bool spin = p.mode == RhMode::Spinor3;
  const int cols = spin ? 2 : 1;
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(D + 1, cols);
  const double r = p.r(zeta);
  if (!(r > 0.0)) return out;
  double th = std::arg(zeta);
  if (th < 0) th += kTwoPi;
  const int idx = static_cast<int>(std::lround(th / kTwoPi * t.m)) % t.m;
  const Eigen::MatrixXcd q = sigma2_coeffs(p.sigma, zeta, t.twisted);
  const double sr = std::sqrt(r);
  double rk = 1.0;
  if (spin) {
    std::vector<CVec> qs;
    for (Eigen::Index k = 0; k < q.rows(); ++k) qs.push_back(q.row(k).transpose());
    const Spinor s0 = spinor_preimage(qs[0], t.s0[idx]);
    const auto s = spinor_series(qs, s0, D);
    for (int k = 0; k <= D; ++k, rk *= r) out.row(k) = (sr * rk * s[k]).transpose();
  } else {
    std::vector<cd> qs;
    for (Eigen::Index k = 0; k < q.rows(); ++k) qs.push_back(q(k, 0));
    const auto s = scalar_series(qs, continuous_sqrt(qs[0], t.s0[idx][0]), D);
    for (int k = 0; k <= D; ++k, rk *= r) out(k, 0) = sr * rk * s[k];
  }
  return out;
}

int compute_n0(const std::vector<VectorLaurent>& B) {
  int n0 = 0;
  for (std::size_t j = 0; j < B.size(); ++j)
    for (const auto& c : B[j].comp) {
      if (c.is_zero()) continue;
      // N + jmin + j (2N + 1) >= 0
      const int lo = c.jmin + static_cast<int>(j);
      if (lo < 0) n0 = std::max(n0, static_cast<int>(std::ceil(double(-lo) / double(2 * j + 1))));
    }
  return n0;
}

int max_degree(const VectorLaurent& p) {
  int d = 0;
  for (const auto& c : p.comp)
    if (!c.is_zero()) d = std::max({d, c.jmax(), -c.jmin});
  return d;
}

int circle_samples(int degree, int minimum) {
  return std::max(minimum, static_cast<int>(fft::next_pow2(static_cast<std::size_t>(4 * (degree + 2)))));
}

Eigen::MatrixXcd circle_values(const VectorLaurent& prim, const CVec& base, double rho, int M, double theta0 = 0.0) {
  Eigen::MatrixXcd v = eval_circle(prim, rho, M, theta0);
  v.rowwise() += base.transpose();
  return v;
}

// Attached discs sampled at the M-th roots of unity.
class DiscSamples {
 public:
  DiscSamples(const RhProblem& p, int M, int xi_samples) : p_(p), M_(M) {
    const NullDisc& F = p.F;
    centers_ = circle_values(F.primitive(), F.base, 1.0, M);
    const int n = static_cast<int>(F.dim());
    linear_ = p.sigma.linear;
    if (linear_) dirs_.resize(M, n);
    for (int k = 0; k < M; ++k) {
      const cd z = std::polar(1.0, kTwoPi * k / M);
      const double r = p.r(z);
      if (linear_) {
        if (!(r > 0.0)) {
          dirs_.row(k).setZero();
          continue;
        }
        const Eigen::MatrixXcd t = p.sigma.taylor(z);
        dirs_.row(k) = p.mode == RhMode::Spinor3 ? Eigen::RowVectorXcd(r * t.row(1))
                                                  : Eigen::RowVectorXcd(r * t(1, 0) * p.u.transpose());
        continue;
      }
      rim_.emplace_back();
      cloud_.emplace_back();
      const Eigen::MatrixXcd t = r > 0.0 ? p.sigma.taylor(z) : Eigen::MatrixXcd::Zero(2, 1);
      auto point = [&](cd xi) {
        CVec s = CVec::Zero(n);
        cd pw = 1.0;
        for (Eigen::Index j = 1; j < t.rows(); ++j) {
          pw *= r * xi;
          if (p.mode == RhMode::Spinor3)
            s += pw * t.row(j).transpose();
          else
            s += pw * t(j, 0) * p.u;
        }
        return CVec(centers_.row(k).transpose() + s);
      };
      for (int s = 0; s < xi_samples; ++s) rim_.back().push_back(point(std::polar(1.0, kTwoPi * s / xi_samples)));
      cloud_.back().push_back(point(0.0));
      for (int ring = 1; ring <= 8; ++ring)
        for (int s = 0; s < xi_samples; ++s)
          cloud_.back().push_back(point(std::polar(ring / 8.0, kTwoPi * s / xi_samples)));
    }
  }

  double to_circle(int k, const CVec& x) const { return distance(k, x, true); }
  double to_disc(int k, const CVec& x) const { return distance(k, x, false); }

 private:
  double distance(int k, const CVec& x, bool rim) const {
    if (linear_) return linear_distance(k, x, rim);
    if (p_.real_form) {
      const RVec y = x.real();
      double best = INFINITY;
      if (rim) {
        const auto& pts = rim_[k];
        for (std::size_t s = 0; s < pts.size(); ++s) {
          const RVec a = pts[s].real(), b = pts[(s + 1) % pts.size()].real();
          const RVec d = b - a;
          const double len2 = d.squaredNorm();
          const double t = len2 > 0 ? std::clamp((y - a).dot(d) / len2, 0.0, 1.0) : 0.0;
          best = std::min(best, (y - a - t * d).norm());
        }
      } else {
        for (const auto& q : cloud_[k]) best = std::min(best, (y - q.real()).norm());
      }
      return best;
    }
    double best = INFINITY;
    if (rim) {
      const auto& pts = rim_[k];
      for (std::size_t s = 0; s < pts.size(); ++s) {
        const CVec& a = pts[s];
        const CVec d = pts[(s + 1) % pts.size()] - a;
        const double len2 = d.squaredNorm();
        const double t = len2 > 0 ? std::clamp(d.dot(x - a).real() / len2, 0.0, 1.0) : 0.0;
        best = std::min(best, (x - a - t * d).norm());
      }
    } else {
      for (const auto& q : cloud_[k]) best = std::min(best, (x - q).norm());
    }
    return best;
  }

  double linear_distance(int k, const CVec& x, bool rim) const {
    const CVec a = dirs_.row(k).transpose();
    const CVec center = centers_.row(k).transpose();
    if (p_.real_form) {
      // Re(xi a) sweeps a round disc of radius |a|/sqrt 2 in span{Re a, Im a} when a is null.
      const RVec y = (x - center).real();
      const double R = a.norm() / std::sqrt(2.0);
      if (R == 0.0) return y.norm();
      const RVec e1 = a.real() / a.real().norm(), e2 = a.imag() / a.imag().norm();
      const double p1 = y.dot(e1), p2 = y.dot(e2);
      const double rad = std::hypot(p1, p2);
      const double perp2 = std::max(0.0, y.squaredNorm() - rad * rad);
      const double gap = rim ? rad - R : std::max(0.0, rad - R);
      return std::sqrt(perp2 + gap * gap);
    }
    const CVec y = x - center;
    const double a2 = a.squaredNorm();
    if (a2 == 0.0) return y.norm();
    const double proj = std::abs(a.dot(y));
    if (!rim && proj <= a2) return std::sqrt(std::max(0.0, y.squaredNorm() - proj * proj / a2));
    return std::sqrt(std::max(0.0, y.squaredNorm() - 2.0 * proj + a2));
  }

  const RhProblem& p_;
  int M_;
  bool linear_ = false;
  Eigen::MatrixXcd centers_;
  Eigen::MatrixXcd dirs_;
  std::vector<std::vector<CVec>> rim_, cloud_;
};

int verification_samples(const NullDisc& G, const RhProblem& p, const RhOptions& opt) {
  return circle_samples(std::max(max_degree(G.phi), max_degree(p.F.phi)) + 1, opt.boundary_min);
}

double spinor_gate(const VectorLaurent& h, int M) {
  double lo = INFINITY, hi = 0.0;
  for (int k = 0; k <= 8; ++k) {
    const Eigen::MatrixXcd v = eval_circle(h, k / 8.0, M);
    for (Eigen::Index i = 0; i < v.rows(); ++i) {
      lo = std::min(lo, v.row(i).norm());
      hi = std::max(hi, v.row(i).norm());
    }
  }
  return hi > 0.0 ? lo / hi : 0.0;
}

RhSolution solve(const RhProblem& p, const RhOptions& opt) {
  const RhWorkspace ws = prepare_rh(p, opt);
  double best = INFINITY;
  std::vector<DiagRow> rows;
  for (int N = std::max(ws.N0, opt.n_start); N <= opt.n_cap; N *= 2) {
    bool any_valid = false;
    for (int ci = 0; ci < opt.c_grid; ++ci) {
      const auto t0 = std::chrono::steady_clock::now();
      const cd c = std::polar(1.0, kTwoPi * ci / opt.c_grid);
      Candidate cand = assemble_candidate(ws, N, c);
      const int M = circle_samples(max_degree(cand.h), 256);
      if (spinor_gate(cand.h, M) < opt.gate) continue;
      any_valid = true;
      DiagRow row;
      row.N = N;
      row.c_index = ci;
      row.s1 = boundary_condition(cand.G, p, opt);
      best = std::min(best, row.s1);
      ConditionReport rep;
      if (row.s1 < p.eps) {
        rep = verify_rh_conditions(cand.G, p, -1.0, opt);
        row.s2 = rep.s2;
        row.s3 = rep.s3;
        row.rho_prime = rep.rho_prime;
      }
      row.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
      rows.push_back(row);
      if (row.s1 < p.eps && rep.pass(p.eps)) {
        RhSolution s;
        s.G = std::move(cand.G);
        s.h = std::move(cand.h);
        s.rho_prime = rep.rho_prime;
        s.N = N;
        s.c_index = ci;
        s.c = c;
        s.report = rep;
        s.rational_error = ws.rational_error;
        s.N0 = ws.N0;
        s.twisted = ws.twisted;
        s.winding = ws.winding;
        s.diagnostics = std::move(rows);
        return s;
      }
    }
    if (!any_valid) throw GeneralPositionError("every candidate spinor vanishes somewhere on the disc");
  }
  throw BudgetExhausted("no (N, c) on the schedule met the tolerance", best);
}

}  // namespace

SizeFn smooth_bump(double center, double half_width, double rmax) {
  return [=](cd z) {
    const double x = wrap(std::arg(z) - center) / half_width;
    if (std::abs(x) >= 1.0) return 0.0;
    const double b = std::exp(1.0 - 1.0 / (1.0 - x * x));
    return rmax * b * b;
  };
}

bool Neighborhood::contains(cd z) const {
  return std::abs(wrap(std::arg(z) - center)) <= half_width && std::abs(z) >= rho_min;
}

RhWorkspace prepare_rh(const RhProblem& p, const RhOptions& opt) {
  RhWorkspace ws;
  ws.mode = p.mode;
  ws.F = p.F;
  const int n = static_cast<int>(p.F.dim());
  if (p.mode == RhMode::Spinor3 && n != 3) throw DimensionError("the spinor construction needs n = 3");
  if (!(p.eps > 0.0)) throw PreconditionError("eps must be positive");
  if (!(p.rho0 > 0.0 && p.rho0 < 1.0)) throw PreconditionError("rho0 must lie in (0,1)");
  if (p.mode == RhMode::ConstantDirection) {
    if (p.u.size() != n || p.v.size() != n) throw DimensionError("frame legs must match the ambient dimension");
    if (std::abs(theta_form(p.u, p.v)) < 1e-12 * p.u.norm() * p.v.norm())
      throw NondegeneracyError("Theta(u, v) vanishes");
    ws.u = p.u;
  }

  const LiftTable table = track_roots(p, opt);
  ws.twisted = table.twisted;
  ws.winding = table.winding;
  const int D = p.sigma.linear ? 0 : opt.xi_degree;
  if (D > 0) {
    for (int k = 0; k < table.m; k += std::max(1, table.m / 512)) {
      const auto e = eta_coeffs(p, table, D, std::polar(1.0, kTwoPi * k / table.m));
      if (e.row(D).norm() + e.row(D - 1).norm() > opt.rat.tol)
        throw ApproximationError("attached disc lift needs more xi terms");
    }
  }
  const auto rat = rationalize_boundary_map([&](cd z) { return eta_coeffs(p, table, D, z); }, opt.rat);
  ws.B = rat.B;
  ws.rational_error = rat.sup_error;
  ws.N0 = compute_n0(ws.B);

  if (p.mode == RhMode::Spinor3) {
    ws.h = p.lift ? *p.lift : spinor_lift_disc(p.F.phi).h;
  } else {
    const auto lift = lift_via_psi(p.F.phi, p.u, p.v);
    ws.h = lift.h;
    ws.cross = lift.cross;
  }
  return ws;
}

Candidate assemble_candidate(const RhWorkspace& ws, int N, cd c) {
  if (N < ws.N0) throw PreconditionError("N below N0 leaves a pole at the base point");
  double phase = std::arg(c);
  if (phase < 0) phase += kTwoPi;
  const cd sc = std::polar(1.0, 0.5 * phase);
  const double amp = std::sqrt(2.0 * N + 1.0);
  const std::size_t k = ws.B.empty() ? (ws.mode == RhMode::Spinor3 ? 2 : 1) : ws.B.front().dim();
  VectorLaurent g(k);
  cd cj = 1.0;
  for (std::size_t j = 0; j < ws.B.size(); ++j, cj *= c)
    g = g + (sc * cj * amp) * shift(ws.B[j], N + static_cast<int>(j) * (2 * N + 1));

  Candidate out;
  VectorLaurent phi(ws.F.dim());
  if (ws.mode == RhMode::Spinor3) {
    out.h = ws.h + g;
    const LaurentPoly a2 = mul(out.h[0], out.h[0]), b2 = mul(out.h[1], out.h[1]), ab = mul(out.h[0], out.h[1]);
    phi[0] = a2 - b2;
    phi[1] = cd(2.0) * ab;
    phi[2] = cd(-kI) * (a2 + b2);
  } else {
    out.h = ws.h;
    out.h[0] = out.h[0] + g[0];
    const LaurentPoly g2 = mul(g[0], g[0]);
    for (std::size_t i = 0; i < ws.F.dim(); ++i)
      phi[i] = ws.F.phi[i] + ws.u[static_cast<Eigen::Index>(i)] * g2 + cd(2.0) * mul(g[0], ws.cross[i]);
  }
  for (auto& c_ : phi.comp) c_ = c_.trimmed();
  out.G = NullDisc{phi, ws.F.base};
  if (out.G.phi.jmin() < 0) throw PreconditionError("assembled derivative has a pole at the base point");
  return out;
}

double boundary_condition(const NullDisc& G, const RhProblem& p, const RhOptions& opt) {
  const int M = verification_samples(G, p, opt);
  const DiscSamples discs(p, M, opt.xi_samples);
  const Eigen::MatrixXcd g = circle_values(G.primitive(), G.base, 1.0, M);
  double s1 = 0.0;
  for (int k = 0; k < M; ++k) s1 = std::max(s1, discs.to_circle(k, g.row(k).transpose()));
  return s1;
}

ConditionReport verify_rh_conditions(const NullDisc& G, const RhProblem& p, double rho_prime, const RhOptions& opt) {
  const int M = verification_samples(G, p, opt);
  const DiscSamples discs(p, M, opt.xi_samples);
  const VectorLaurent prim = G.primitive();
  ConditionReport rep;

  const Eigen::MatrixXcd g1 = circle_values(prim, G.base, 1.0, M);
  for (int k = 0; k < M; ++k) rep.s1 = std::max(rep.s1, discs.to_circle(k, g1.row(k).transpose()));

  std::vector<double> grid;
  for (int k = 0; k < opt.radii; ++k) grid.push_back(p.rho0 + (1.0 - p.rho0) * k / opt.radii);
  std::vector<double> radii = grid;
  for (int k = 1; k <= 20; ++k) radii.push_back(1.0 - (1.0 - p.rho0) * std::ldexp(1.0, -k) / opt.radii);
  if (rho_prime >= 0.0) radii.push_back(rho_prime);
  std::sort(radii.begin(), radii.end());
  std::vector<double> d(radii.size(), 0.0);
  for (std::size_t i = 0; i < radii.size(); ++i) {
    const Eigen::MatrixXcd g = circle_values(prim, G.base, radii[i], M);
    for (int k = 0; k < M; ++k) d[i] = std::max(d[i], discs.to_disc(k, g.row(k).transpose()));
  }
  auto sup_from = [&](double rho) {
    double s = 0.0;
    for (std::size_t i = 0; i < radii.size(); ++i)
      if (radii[i] >= rho) s = std::max(s, d[i]);
    return s;
  };
  if (rho_prime < 0.0) {
    rho_prime = grid.back();
    for (double rc : grid)
      if (sup_from(rc) < p.eps) {
        rho_prime = rc;
        break;
      }
  }
  rep.rho_prime = rho_prime;
  rep.s2 = sup_from(rho_prime);

  // C^1 deviation on rho' D together with the part of the disc outside U.
  const VectorLaurent diff = G.phi - p.F.phi;
  const VectorLaurent dprim = antiderivative_from_zero(diff).poly;
  rep.s3 = eval_poly(diff, 0.0).norm();
  std::vector<double> s3_radii;
  for (int k = 1; k <= 32; ++k) s3_radii.push_back(rho_prime * k / 32.0);
  if (p.U)
    for (int k = 1; k <= opt.radii; ++k) s3_radii.push_back(double(k) / opt.radii);
  const double h = opt.fd_step;
  for (double rho : s3_radii) {
    const Eigen::MatrixXcd v = eval_circle(dprim, rho, M);
    const Eigen::MatrixXcd vp = eval_circle(dprim, rho, M, h), vm = eval_circle(dprim, rho, M, -h);
    for (int k = 0; k < M; ++k) {
      const cd z = std::polar(rho, kTwoPi * k / M);
      if (!(rho <= rho_prime || (p.U && !p.U->contains(z)))) continue;
      const double c0 = p.real_form ? v.row(k).real().norm() : v.row(k).norm();
      const double c1 = ((vp.row(k) - vm.row(k)) / (z * (std::polar(1.0, h) - std::polar(1.0, -h)))).norm();
      rep.s3 = std::max({rep.s3, c0, c1});
    }
  }
  return rep;
}

RhSolution solve_rh3(const RhProblem& p, const RhOptions& opt) {
  if (p.mode != RhMode::Spinor3) throw PreconditionError("solve_rh3 expects a spinor problem");
  return solve(p, opt);
}

RhSolution solve_rhn(const RhProblem& p, const RhOptions& opt) {
  if (p.mode != RhMode::ConstantDirection) throw PreconditionError("solve_rhn expects a constant-direction problem");
  return solve(p, opt);
}

AverageSelection select_c_by_average(const std::vector<NullDisc>& candidates, const RhProblem& p,
                                     const std::function<double(const CVec&)>& phi, double t0, double t1,
                                     double eps, int samples) {
  if (candidates.empty()) throw PreconditionError("no candidates to select from");
  const double dt = (t1 - t0) / (samples - 1);
  auto weight = [&](int i) { return (i == 0 || i == samples - 1 ? 0.5 : 1.0) * dt / kTwoPi; };
  const VectorLaurent fprim = p.F.primitive();
  AverageSelection sel;
  for (int i = 0; i < samples; ++i) {
    const cd z = std::polar(1.0, t0 + i * dt);
    const CVec center = p.F.base + eval_poly(fprim, z);
    const double r = p.r(z);
    const Eigen::MatrixXcd t = p.sigma.taylor(z);
    double mean = 0.0;
    for (int s = 0; s < samples; ++s) {
      const cd xi = std::polar(r, kTwoPi * s / samples);
      CVec pt = center;
      cd pw = 1.0;
      for (Eigen::Index j = 1; j < t.rows(); ++j) {
        pw *= xi;
        pt += p.mode == RhMode::Spinor3 ? CVec(pw * t.row(j).transpose()) : CVec(pw * t(j, 0) * p.u);
      }
      mean += phi(pt);
    }
    sel.double_average += weight(i) * mean / samples;
  }
  double best = INFINITY;
  for (std::size_t ci = 0; ci < candidates.size(); ++ci) {
    const VectorLaurent gp = candidates[ci].primitive();
    double avg = 0.0;
    for (int i = 0; i < samples; ++i)
      avg += weight(i) * phi(candidates[ci].base + eval_poly(gp, std::polar(1.0, t0 + i * dt)));
    sel.single_averages.push_back(avg);
    if (!sel.passed && avg <= sel.double_average + eps) {
      sel.passed = true;
      sel.index = static_cast<int>(ci);
    }
    if (!sel.passed && avg < best) {
      best = avg;
      sel.index = static_cast<int>(ci);
    }
  }
  return sel;
}

int lemma_n0(const std::vector<VectorLaurent>& A) {
  int n0 = 0;
  for (const auto& a : A)
    for (const auto& c : a.comp)
      if (!c.is_zero()) n0 = std::max(n0, 1 - c.jmin);
  return n0;
}

double lemma_error(const std::vector<VectorLaurent>& A, int N, int grid) {
  if (N < lemma_n0(A)) throw PreconditionError("N below the pole-free threshold");
  const int n = A.empty() ? 0 : static_cast<int>(A.front().dim());
  // E_k(z) = -sum_j j a_{kj} z^{j + kN} / (j + kN).
  std::vector<Eigen::MatrixXcd> Ek;
  for (std::size_t k1 = 0; k1 < A.size(); ++k1) {
    const int k = static_cast<int>(k1) + 1;
    Eigen::MatrixXcd vals = Eigen::MatrixXcd::Zero(grid, n);
    for (int i = 0; i < n; ++i) {
      const LaurentPoly& a = A[k1][i];
      if (a.is_zero()) continue;
      LaurentPoly e{a.jmin + k * N, {}};
      for (int j = a.jmin; j <= a.jmax(); ++j) e.c.push_back(-double(j) * a.coeff(j) / double(j + k * N));
      const auto v = eval_circle(e, 1.0, grid);
      for (int s = 0; s < grid; ++s) vals(s, i) = v[s];
    }
    Ek.push_back(vals);
  }
  double sup = 0.0;
  for (int b = 0; b < grid; ++b) {
    const cd c = std::polar(1.0, kTwoPi * b / grid);
    Eigen::MatrixXcd tot = Eigen::MatrixXcd::Zero(grid, n);
    cd ck = 1.0;
    for (const auto& e : Ek) {
      ck *= c;
      tot += ck * e;
    }
    for (int s = 0; s < grid; ++s) sup = std::max(sup, tot.row(s).norm());
  }
  return sup;
}

void write_diagnostics_csv(std::ostream& os, const std::vector<DiagRow>& rows, bool with_time) {
  os << "N,c_index,s1,s2,s3,rho_prime" << (with_time ? ",wall_ms" : "") << '\n';
  char buf[256];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%d,%d,%.10g,%.10g,%.10g,%.10g", r.N, r.c_index, r.s1, r.s2, r.s3, r.rho_prime);
    os << buf;
    if (with_time) {
      std::snprintf(buf, sizeof buf, ",%.3f", r.wall_ms);
      os << buf;
    }
    os << '\n';
  }
}

nlohmann::json to_json(const RhSolution& s) {
  nlohmann::json j;
  j["G"]["phi"] = to_json(s.G.phi);
  for (Eigen::Index i = 0; i < s.G.base.size(); ++i) j["G"]["base"].push_back({s.G.base[i].real(), s.G.base[i].imag()});
  j["rho_prime"] = s.rho_prime;
  j["N"] = s.N;
  j["N0"] = s.N0;
  j["c_index"] = s.c_index;
  j["c"] = {s.c.real(), s.c.imag()};
  j["s1"] = s.report.s1;
  j["s2"] = s.report.s2;
  j["s3"] = s.report.s3;
  j["rational_error"] = s.rational_error;
  j["twisted"] = s.twisted;
  j["winding"] = s.winding;
  return j;
}

}  // namespace nullforge
