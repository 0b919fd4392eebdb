#include "nullforge/convexshell.hpp"

#include <cstdio>
#include <memory>
#include <ostream>

#include "frame_sampler.hpp"

namespace nullforge {

namespace {

// Closest point on the ellipsoid sum (y_i / a_i)^2 = 1 to x, both relative to the center.
RVec ellipsoid_foot(const RVec& a, RVec x) {
  Eigen::Index imin = 0;
  a.minCoeff(&imin);
  if (std::abs(x[imin]) < 1e-12 * a[imin]) x[imin] = 1e-12 * a[imin];
  auto f = [&](double t) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < a.size(); ++i) s += std::pow(a[i] * x[i] / (t + a[i] * a[i]), 2);
    return s - 1.0;
  };
  const double amin2 = a[imin] * a[imin];
  double lo = -amin2, hi = std::max(0.0, x.norm() * a.maxCoeff());
  while (f(hi) > 0.0) hi = 2.0 * hi + 1.0;
  for (int it = 0; it < 200 && hi - lo > 1e-16 * (1.0 + std::abs(hi)); ++it) {
    const double mid = 0.5 * (lo + hi);
    (f(mid) > 0.0 ? lo : hi) = mid;
  }
  const double t = 0.5 * (lo + hi);
  RVec y(a.size());
  for (Eigen::Index i = 0; i < a.size(); ++i) y[i] = a[i] * a[i] * x[i] / (t + a[i] * a[i]);
  return y;
}

bool is_ball(const ConvexDomain& D) { return D.kind == ConvexDomain::Kind::Ball; }

VectorLaurent low_pass(const VectorLaurent& p, int degree) {
  VectorLaurent out(p.dim());
  for (std::size_t i = 0; i < p.dim(); ++i) {
    const LaurentPoly& c = p[i];
    if (c.is_zero()) continue;
    const int lo = std::max(c.jmin, -degree), hi = std::min(c.jmax(), degree);
    if (lo > hi) continue;
    std::vector<cd> v;
    for (int j = lo; j <= hi; ++j) v.push_back(c.coeff(j));
    out[i] = LaurentPoly{lo, std::move(v)};
  }
  return out;
}

int pow2_above(int n) { return static_cast<int>(fft::next_pow2(static_cast<std::size_t>(std::max(1, n)))); }

double boundary_drift(const ImmersionDisc& A, const ImmersionDisc& B, int m) {
  const Eigen::MatrixXd a = eval_immersion_circle(A, 1.0, m), b = eval_immersion_circle(B, 1.0, m);
  return (a - b).rowwise().norm().maxCoeff();
}

int sample_count(const ImmersionDisc& F, int minimum) {
  return std::max(minimum, pow2_above(4 * (std::max(0, F.phi.jmax()) + 2)));
}

}  // namespace

ConvexDomain ConvexDomain::ball(const RVec& center, double radius) {
  if (!(radius > 0.0)) throw CurvatureError("ball radius must be positive");
  ConvexDomain D;
  D.center = center;
  D.radius = radius;
  D.kappa_min = D.kappa_max = 1.0 / radius;
  return D;
}

ConvexDomain ConvexDomain::ellipsoid(const RVec& center, const RVec& axes) {
  if (center.size() != axes.size()) throw DimensionError("center and semi-axes differ in dimension");
  if (!(axes.minCoeff() > 0.0)) throw CurvatureError("semi-axes must be positive");
  ConvexDomain D;
  D.kind = Kind::Ellipsoid;
  D.center = center;
  D.axes = axes;
  const double a = axes.maxCoeff(), c = axes.minCoeff();
  D.kappa_max = a / (c * c);
  D.kappa_min = c / (a * a);
  return D;
}

double ConvexDomain::depth(const RVec& x) const {
  const RVec y = x - center;
  if (is_ball(*this)) return radius - y.norm();
  const double d = (y - ellipsoid_foot(axes, y)).norm();
  double s = 0.0;
  for (Eigen::Index i = 0; i < y.size(); ++i) s += std::pow(y[i] / axes[i], 2);
  return (s <= 1.0 ? d : -d) - offset;
}

RVec ConvexDomain::inner_normal(const RVec& x) const {
  const RVec y = x - center;
  if (is_ball(*this)) {
    if (y.norm() == 0.0) throw GeometryError("the inner normal is undefined at the center");
    return -y / y.norm();
  }
  const RVec f = ellipsoid_foot(axes, y);
  RVec g(f.size());
  for (Eigen::Index i = 0; i < f.size(); ++i) g[i] = -f[i] / (axes[i] * axes[i]);
  return g / g.norm();
}

ConvexDomain parallel_domain(const ConvexDomain& D, double t) {
  if (t >= 1.0 / D.kappa_max) throw CurvatureError("parallel offset reaches the focal distance 1 / kappa_max");
  if (is_ball(D)) return ConvexDomain::ball(D.center, D.radius - t);
  ConvexDomain E = D;
  E.offset = D.offset + t;
  E.kappa_max = 1.0 / (1.0 / D.kappa_max - t);
  E.kappa_min = 1.0 / (1.0 / D.kappa_min - t);
  return E;
}

ShellSchedule ShellSchedule::make(std::vector<double> delta, double kappa_min, double budget) {
  if (delta.empty()) throw PreconditionError("shell schedule is empty");
  if (!(kappa_min > 0.0)) throw CurvatureError("kappa_min must be positive");
  for (std::size_t j = 0; j < delta.size(); ++j) {
    if (!(delta[j] > 0.0)) throw PreconditionError("shell widths must be positive");
    if (j > 0 && !(delta[j] < delta[j - 1])) throw PreconditionError("shell widths must decrease strictly");
  }
  ShellSchedule s;
  s.delta = std::move(delta);
  s.kappa_min = kappa_min;
  s.budget = budget;
  if (!(s.total() < budget)) throw PreconditionError("shell schedule exceeds its sup-norm budget");
  return s;
}

ShellSchedule ShellSchedule::geometric(double delta1, double ratio, int steps, double kappa_min, double budget) {
  if (!(ratio > 0.0 && ratio < 1.0)) throw PreconditionError("shell ratio must lie in (0,1)");
  std::vector<double> d;
  for (int j = 0; j < steps; ++j) d.push_back(delta1 * std::pow(ratio, j));
  return make(std::move(d), kappa_min, budget);
}

double ShellSchedule::drift_bound(int j) const {
  const double d = delta.at(static_cast<std::size_t>(j - 1));
  return std::sqrt(2.0 * d * d + 2.0 * d / kappa_min);
}

double ShellSchedule::total() const {
  double s = 0.0;
  for (int j = 1; j <= steps(); ++j) s += drift_bound(j);
  return s;
}

PushResult push_step(const ImmersionDisc& F, const ConvexDomain& L, const ConvexDomain& D, double eta, double delta,
                     const PushConfig& cfg, const std::optional<VectorLaurent>& lift) {
  if (F.domain != DomainKind::Disc) throw PreconditionError("push_step works on the disc");
  if (F.dim() != 3 || D.dim() != 3 || L.dim() != 3) throw DimensionError("push_step pushes through spinors and needs n = 3");
  if (!is_ball(D) || !is_ball(L)) throw GeometryError("push discs are closed form only for balls");
  if ((D.center - L.center).norm() > 1e-12 * D.radius) throw GeometryError("L and D must be concentric");
  if (!(eta > 0.0)) throw PreconditionError("eta must be positive");
  if (D.radius > L.radius + eta + 1e-12 * D.radius) throw PreconditionError("D is not inside the eta-enlargement of L");
  if (!(delta > 0.0 && delta < 1.0 / D.kappa_max)) throw PreconditionError("delta must lie in (0, 1/kappa_max(D))");
  if (!(cfg.rho_K >= 0.0 && cfg.rho_K < 1.0)) throw PreconditionError("rho_K must lie in [0,1)");

  const int m = sample_count(F, cfg.samples);
  for (int i = 0; i <= cfg.rings; ++i) {
    const double rho = cfg.rho_K + (1.0 - cfg.rho_K) * i / cfg.rings;
    const Eigen::MatrixXd x = eval_immersion_circle(F, rho, m);
    for (Eigen::Index k = 0; k < x.rows(); ++k) {
      const RVec p = x.row(k).transpose();
      if (!(D.depth(p) > 0.0) || !(L.depth(p) < 0.0))
        throw PreconditionError("F of the annulus outside K is not inside D minus closed L");
    }
  }

  PushReport rep;
  rep.eta = eta;
  rep.delta = delta;
  rep.rh_eps = cfg.tol_fraction * delta;
  rep.bound = std::sqrt(2.0 * eta * eta + 2.0 * eta / L.kappa_min);

  const BoundaryMap centre{[&] {
    VectorLaurent c(3);
    for (int i = 0; i < 3; ++i) c[i] = LaurentPoly::constant(D.center[i]);
    return c;
  }()};
  const VectorLaurent phase = low_pass(F.phi, cfg.phase_degree);
  auto sampler = std::make_shared<detail::BoundarySampler>(phase, F, centre);
  const double target = D.radius - 0.5 * delta;

  int orientation = 1;
  {
    double best = -1.0;
    const Eigen::MatrixXcd ph = eval_circle(phase, 1.0, m);
    const Eigen::MatrixXd x = eval_immersion_circle(F, 1.0, m);
    for (int s : {1, -1}) {
      double worst = INFINITY;
      for (int k = 0; k < m; ++k) {
        const RVec w = x.row(k).transpose() - D.center;
        const Eigen::Vector3cd phi = ph.row(k).transpose();
        worst = std::min(worst, detail::null_projection(w / w.norm(), phi, s).norm() / phi.norm());
      }
      if (worst > best) best = worst, orientation = s;
    }
  }

  RhProblem p;
  p.mode = RhMode::Spinor3;
  p.F = NullDisc{F.phi, F.base.cast<cd>()};
  p.lift = lift;
  p.r = [sampler, target](cd z) {
    CVec phi;
    RVec w;
    sampler->at(z, phi, w);
    return std::sqrt(std::max(0.0, target * target - w.squaredNorm()));
  };
  p.sigma.linear = true;
  p.sigma.taylor = [sampler, orientation](cd z) {
    CVec phi;
    RVec w;
    sampler->at(z, phi, w);
    Eigen::MatrixXcd t = Eigen::MatrixXcd::Zero(2, 3);
    t.row(1) = push_direction(phi, w, orientation).transpose();
    return t;
  };
  p.eps = rep.rh_eps;
  p.rho0 = cfg.rho0;
  p.real_form = true;
  const RhSolution sol = solve_rh3(p, detail::widened_for(cfg.rh, F.phi.jmax()));

  PushResult out;
  out.F = ImmersionDisc::disc(sol.G.phi, F.base);
  out.lift = sol.h;
  rep.N = sol.N;
  rep.c_index = sol.c_index;
  rep.twisted = sol.twisted;
  rep.rh = sol.report;

  const int M = sample_count(out.F, cfg.samples);
  rep.sup_dev = boundary_drift(out.F, F, M);
  const Eigen::MatrixXd xb = eval_immersion_circle(out.F, 1.0, M);
  rep.min_gap = INFINITY;
  rep.max_gap = -INFINITY;
  for (Eigen::Index k = 0; k < xb.rows(); ++k) {
    const double g = D.depth(xb.row(k).transpose());
    rep.min_gap = std::min(rep.min_gap, g);
    rep.max_gap = std::max(rep.max_gap, g);
  }
  rep.min_depth = rep.min_gap;
  rep.max_depth_L = -INFINITY;
  const int R = 4 * cfg.rings;
  for (int i = 0; i < R; ++i) {
    const double rho = double(i) / R;
    const Eigen::MatrixXd x = eval_immersion_circle(out.F, rho, i == 0 ? 1 : M);
    for (Eigen::Index k = 0; k < x.rows(); ++k) {
      const RVec q = x.row(k).transpose();
      rep.min_depth = std::min(rep.min_depth, D.depth(q));
      if (rho >= cfg.rho_K) rep.max_depth_L = std::max(rep.max_depth_L, L.depth(q));
    }
  }
  rep.flux_delta = (flux_loop(out.F, 0.5).value - flux_loop(F, 0.5).value).norm();
  out.report = rep;
  return out;
}

ProperResult proper_iterate(const ImmersionDisc& F, const ConvexDomain& D, const ShellSchedule& schedule,
                            const ProperConfig& cfg) {
  if (!is_ball(D)) throw GeometryError("proper_iterate pushes into balls");
  const DiscMesh mesh = triangulate_disc(cfg.boost.mesh_rings, cfg.boost.mesh_angles, cfg.boost.mesh_grading);
  int src = 0;
  for (std::size_t v = 0; v < mesh.vertices.size(); ++v)
    if (std::abs(mesh.vertices[v] - cfg.p0) < std::abs(mesh.vertices[src] - cfg.p0) && std::abs(mesh.vertices[v]) < 1.0)
      src = static_cast<int>(v);

  ProperResult res;
  res.G = F;
  {
    ProperStep s0;
    s0.dist = intrinsic_distance(F, mesh, src).distance;
    const Eigen::MatrixXd x = eval_immersion_circle(F, 1.0, sample_count(F, cfg.push.samples));
    s0.min_gap = INFINITY;
    s0.max_gap = -INFINITY;
    for (Eigen::Index k = 0; k < x.rows(); ++k) {
      const double g = D.depth(x.row(k).transpose());
      s0.min_gap = std::min(s0.min_gap, g);
      s0.max_gap = std::max(s0.max_gap, g);
    }
    res.trace.push_back(s0);
  }

  std::optional<VectorLaurent> lift;
  for (int j = 1; j <= schedule.steps(); ++j) {
    ProperStep st;
    st.j = j;
    st.delta = schedule.delta[static_cast<std::size_t>(j - 1)];
    st.boost_eta = cfg.boost_eta / j;
    const ImmersionDisc before = res.G;
    try {
      BoostConfig bc = cfg.boost;
      bc.rh_eps = cfg.boost_tol * st.boost_eta;
      const BoundaryMap Y = BoundaryMap::from_immersion(res.G);
      const double d = res.trace.back().dist;
      const BoostResult b = boost_step(res.G, Y, 1e-9, st.boost_eta, cfg.p0, d, bc, lift);
      st.N_boost = b.report.N;

      // L just inside the image of the annulus outside K
      double rmin = INFINITY;
      const int m = sample_count(b.F, cfg.push.samples);
      for (int i = 0; i <= cfg.push.rings; ++i) {
        const double rho = cfg.push.rho_K + (1.0 - cfg.push.rho_K) * i / cfg.push.rings;
        const Eigen::MatrixXd x = eval_immersion_circle(b.F, rho, m);
        for (Eigen::Index k = 0; k < x.rows(); ++k) rmin = std::min(rmin, (x.row(k).transpose() - D.center).norm());
      }
      const ConvexDomain L = ConvexDomain::ball(D.center, rmin - cfg.l_margin);
      st.eta = D.radius - L.radius;
      const PushResult p = push_step(b.F, L, D, st.eta, st.delta, cfg.push, b.lift);
      st.N_push = p.report.N;
      res.G = p.F;
      lift = p.lift;
      st.min_gap = p.report.min_gap;
      st.max_gap = p.report.max_gap;
      st.bound = schedule.drift_bound(j) + b.report.bound_a + p.report.rh_eps;
    } catch (const BudgetExhausted& e) {
      throw ProperBudgetExhausted(std::string("step ") + std::to_string(j) + ": " + e.what(), e.best_achieved,
                                  res.trace);
    }
    const int m = sample_count(res.G, cfg.push.samples);
    st.drift = boundary_drift(res.G, before, m);
    st.total_drift = boundary_drift(res.G, F, m);
    st.dist = intrinsic_distance(res.G, mesh, src).distance;
    res.trace.push_back(st);
  }
  return res;
}

void write_proper_trace_csv(std::ostream& os, const std::vector<ProperStep>& trace) {
  os << "step,delta,eta,boost_eta,min_gap,max_gap,dist,drift,bound,total_drift,N_boost,N_push\n";
  char buf[320];
  for (const auto& s : trace) {
    std::snprintf(buf, sizeof buf, "%d,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%d,%d\n", s.j, s.delta,
                  s.eta, s.boost_eta, s.min_gap, s.max_gap, s.dist, s.drift, s.bound, s.total_drift, s.N_boost,
                  s.N_push);
    os << buf;
  }
}

}  // namespace nullforge
