#include "nullforge/boost.hpp"

#include <cstdio>
#include <memory>
#include <ostream>

#include "frame_sampler.hpp"
#include "nullforge/fft.hpp"

namespace nullforge {

namespace {

constexpr double kTwoPi = 2.0 * M_PI;

Eigen::MatrixXd sample_surface(const ImmersionDisc& F, int m) { return eval_immersion_circle(F, 1.0, m); }

double diameter_with(const std::vector<RVec>& pts, const RVec& x) {
  double d = 0.0;
  for (const auto& p : pts) d = std::max(d, (p - x).norm());
  return d;
}


}  // namespace

BoundaryMap BoundaryMap::from_samples(const Eigen::MatrixXd& samples) {
  BoundaryMap Y;
  const int m = static_cast<int>(samples.rows());
  Y.fourier = VectorLaurent(static_cast<std::size_t>(samples.cols()));
  for (Eigen::Index i = 0; i < samples.cols(); ++i) {
    std::vector<cd> col(m);
    for (int k = 0; k < m; ++k) col[k] = samples(k, i);
    Y.fourier[i] = fit_circle(col, (m - 1) / 2);
  }
  return Y;
}

BoundaryMap BoundaryMap::from_immersion(const ImmersionDisc& F) {
  if (F.domain != DomainKind::Disc) throw PreconditionError("boundary maps are taken from disc immersions");
  const VectorLaurent P = antiderivative_from_zero(F.phi).poly;
  BoundaryMap Y;
  Y.fourier = VectorLaurent(F.dim());
  for (std::size_t i = 0; i < F.dim(); ++i) {
    const int K = std::max(0, P[i].jmax());
    std::vector<cd> c(2 * K + 1, 0.0);
    for (int j = 1; j <= K; ++j) {
      c[K + j] = 0.5 * P[i].coeff(j);
      c[K - j] = 0.5 * std::conj(P[i].coeff(j));
    }
    c[K] = F.base[static_cast<Eigen::Index>(i)] + P[i].coeff(0).real();
    Y.fourier[i] = LaurentPoly{-K, std::move(c)};
  }
  return Y;
}

BoundaryMap BoundaryMap::translated(const RVec& v) const {
  BoundaryMap Y = *this;
  for (std::size_t i = 0; i < dim(); ++i)
    Y.fourier[i] = Y.fourier[i] + LaurentPoly::constant(v[static_cast<Eigen::Index>(i)]);
  return Y;
}

Eigen::MatrixXd BoundaryMap::sample(int m) const { return eval_circle(fourier, 1.0, m).real(); }

BoundaryTiling tile_boundary(const ImmersionDisc& F, const BoundaryMap& Y, double eps0, double delta, int samples) {
  if (!(eps0 > 0.0)) throw PreconditionError("eps0 must be positive");
  const int m = samples;
  const Eigen::MatrixXd fs = sample_surface(F, m), ys = Y.sample(m);
  double sup = 0.0, inf = INFINITY, scale = 0.0;
  for (int k = 0; k < m; ++k) {
    const double d = (fs.row(k) - ys.row(k)).norm();
    sup = std::max(sup, d);
    inf = std::min(inf, d);
    scale = std::max(scale, fs.row(k).norm());
  }
  if (!(sup < delta)) throw PreconditionError("sup |F - Y| on the circle is not below delta");
  if (inf <= 1e-12 * (1.0 + scale)) throw PreconditionError("F - Y vanishes on the circle");
  for (int k = 0; k < m; ++k) {
    const int k1 = (k + 1) % m;
    if ((fs.row(k) - fs.row(k1)).norm() >= eps0 || (ys.row(k) - ys.row(k1)).norm() >= eps0)
      throw OscillationError("eps0 is below the oscillation resolvable on the sampling grid");
  }

  auto yat = [&](double t) { return Y.eval(std::polar(1.0, t)); };
  auto fat = [&](double t) { return eval_immersion(F, std::polar(1.0, t)); };
  const double h = kTwoPi / m;

  std::vector<double> starts;
  double t = 0.0;
  while (t < kTwoPi - 1e-12) {
    std::vector<RVec> py{yat(t)}, pf{fat(t)};
    int k = static_cast<int>(std::floor(t / h + 1e-9)) + 1;
    double end = kTwoPi;
    for (; k <= m; ++k) {
      const int ks = k % m;
      const RVec y = ys.row(ks).transpose(), f = fs.row(ks).transpose();
      if (diameter_with(py, y) < eps0 && diameter_with(pf, f) < eps0) {
        py.push_back(y);
        pf.push_back(f);
        continue;
      }
      double lo = std::max(t, (k - 1) * h), hi = k * h;
      for (int it = 0; it < 60; ++it) {
        const double mid = 0.5 * (lo + hi);
        (diameter_with(py, yat(mid)) < eps0 && diameter_with(pf, fat(mid)) < eps0 ? lo : hi) = mid;
      }
      end = lo;
      break;
    }
    if (end <= t + 1e-12) throw OscillationError("arc sweep made no progress");
    starts.push_back(t);
    t = end;
  }
  while (starts.size() < 3) {
    std::size_t best = 0;
    double len = -1.0;
    for (std::size_t j = 0; j < starts.size(); ++j) {
      const double e = j + 1 < starts.size() ? starts[j + 1] : kTwoPi;
      if (e - starts[j] > len) len = e - starts[j], best = j;
    }
    starts.insert(starts.begin() + static_cast<long>(best) + 1, starts[best] + 0.5 * len);
  }

  BoundaryTiling tl;
  tl.l = static_cast<int>(starts.size());
  tl.corners = starts;
  tl.eps0 = eps0;
  for (double c : starts) tl.points.push_back(std::polar(1.0, c));
  for (int j = 0; j < tl.l; ++j) {
    const double a = starts[j], b = j + 1 < tl.l ? starts[j + 1] : kTwoPi;
    std::vector<RVec> py{yat(a), yat(b)}, pf{fat(a), fat(b)};
    for (int k = static_cast<int>(std::ceil(a / h)); k * h < b; ++k) {
      py.push_back(ys.row(k % m).transpose());
      pf.push_back(fs.row(k % m).transpose());
    }
    for (std::size_t p = 0; p < py.size(); ++p)
      for (std::size_t q = 0; q < py.size(); ++q) {
        tl.target_oscillation = std::max(tl.target_oscillation, (py[p] - py[q]).norm());
        tl.surface_oscillation = std::max(tl.surface_oscillation, (pf[p] - pf[q]).norm());
        tl.cross_deviation = std::max(tl.cross_deviation, (pf[p] - py[q]).norm());
      }
  }
  return tl;
}

BoostSchedule BoostSchedule::make(double d0, double delta0, double eps, int steps) {
  if (!(delta0 >= 0.0 && delta0 < eps)) throw PreconditionError("the schedule needs 0 <= delta0 < eps");
  BoostSchedule s;
  s.d0 = d0;
  s.delta0 = delta0;
  s.eps = eps;
  s.c = std::sqrt(6.0 * (eps * eps - delta0 * delta0)) / M_PI;
  s.d = {d0};
  s.delta = {delta0};
  for (int j = 1; j <= steps; ++j) {
    s.d.push_back(s.d.back() + s.c / j);
    s.delta.push_back(std::sqrt(s.delta.back() * s.delta.back() + s.c * s.c / (double(j) * j)));
  }
  return s;
}

CVec push_direction(const CVec& phi, const RVec& w, int orientation) {
  if (phi.size() != 3 || w.size() != 3) throw DimensionError("push directions are defined in R^3");
  const double wn = w.norm();
  if (wn == 0.0) return std::sqrt(2.0) * phi / phi.norm();
  const Eigen::Vector3cd p = detail::null_projection(w / wn, phi, orientation);
  const double pn = p.norm();
  if (pn < 1e-14 * phi.norm()) throw DegenerateFrameError("tangent null vector is orthogonal to the push plane");
  return std::sqrt(2.0) * CVec(p) / pn;
}

BoostResult boost_step(const ImmersionDisc& F, const BoundaryMap& Y, double delta, double eta, cd p0, double d,
                       const BoostConfig& cfg, const std::optional<VectorLaurent>& lift) {
  if (F.domain != DomainKind::Disc) throw PreconditionError("boost_step works on the disc");
  if (F.dim() != 3) throw DimensionError("boost_step pushes through spinors and needs n = 3");
  if (!(eta >= 0.0)) throw PreconditionError("eta must be nonnegative");
  const int m = cfg.boundary_samples;

  BoostReport rep;
  rep.delta = delta;
  rep.eta = eta;
  rep.d = d;
  rep.bound_a = std::sqrt(delta * delta + eta * eta) + 2.0 * cfg.rh_eps;

  const Eigen::MatrixXd fs = sample_surface(F, m), ys = Y.sample(m);
  double sup = 0.0, scale = 0.0;
  for (int k = 0; k < m; ++k) {
    sup = std::max(sup, (fs.row(k) - ys.row(k)).norm());
    scale = std::max(scale, fs.row(k).norm());
  }
  if (!(sup < delta)) throw PreconditionError("sup |F - Y| on the circle is not below delta");
  rep.normal_fallback = sup <= 1e-12 * (1.0 + scale);
  if (!rep.normal_fallback) rep.arcs = tile_boundary(F, Y, cfg.eps0, delta, m).l;

  const DiscMesh mesh = triangulate_disc(cfg.mesh_rings, cfg.mesh_angles, cfg.mesh_grading);
  int src = 0;
  for (std::size_t v = 0; v < mesh.vertices.size(); ++v)
    if (std::abs(mesh.vertices[v] - p0) < std::abs(mesh.vertices[src] - p0) && std::abs(mesh.vertices[v]) < 1.0)
      src = static_cast<int>(v);
  rep.dist_before = intrinsic_distance(F, mesh, src).distance;
  if (d > rep.dist_before + 1e-12) throw PreconditionError("d must not exceed the current distance to the boundary");

  BoostResult out;
  if (eta == 0.0) {
    out.F = F;
    out.lift = lift ? *lift : spinor_lift_disc(F.phi).h;
    rep.sup_dev = sup;
    rep.dist_after = rep.dist_before;
    rep.gain = rep.dist_after - d;
    out.report = rep;
    return out;
  }

  auto sampler = std::make_shared<detail::BoundarySampler>(F, Y);
  int orientation = 1;
  if (!rep.normal_fallback) {
    double best = -1.0;
    const Eigen::MatrixXcd ph = eval_circle(F.phi, 1.0, m);
    for (int s : {1, -1}) {
      double worst = INFINITY;
      for (int k = 0; k < m; ++k) {
        const RVec w = (fs.row(k) - ys.row(k)).transpose();
        const Eigen::Vector3cd x = ph.row(k).transpose();
        worst = std::min(worst, detail::null_projection(w / w.norm(), x, s).norm() / x.norm());
      }
      if (worst > best) best = worst, orientation = s;
    }
  }

  RhProblem p;
  p.mode = RhMode::Spinor3;
  p.F = NullDisc{F.phi, F.base.cast<cd>()};
  p.lift = lift;
  p.r = [eta](cd) { return eta; };
  p.sigma.linear = true;
  const bool fallback = rep.normal_fallback;
  p.sigma.taylor = [sampler, orientation, fallback](cd z) {
    CVec phi;
    RVec w;
    sampler->at(z, phi, w);
    Eigen::MatrixXcd t = Eigen::MatrixXcd::Zero(2, 3);
    t.row(1) = push_direction(phi, fallback ? RVec(RVec::Zero(3)) : w, orientation).transpose();
    return t;
  };
  p.eps = cfg.rh_eps;
  p.rho0 = cfg.rho0;
  p.real_form = true;

  const RhSolution sol = solve_rh3(p, detail::widened_for(cfg.rh, F.phi.jmax()));

  out.F = ImmersionDisc::disc(sol.G.phi, F.base);
  out.lift = sol.h;
  rep.N = sol.N;
  rep.c_index = sol.c_index;
  rep.twisted = sol.twisted;
  rep.rh = sol.report;

  const int M = std::max(m, static_cast<int>(fft::next_pow2(static_cast<std::size_t>(4 * (out.F.phi.jmax() + 2)))));
  const Eigen::MatrixXd fh = sample_surface(out.F, M), yh = Y.sample(M);
  for (int k = 0; k < M; ++k) rep.sup_dev = std::max(rep.sup_dev, (fh.row(k) - yh.row(k)).norm());

  const auto after = intrinsic_distance(out.F, mesh, src);
  rep.dist_after = after.distance;
  rep.gain = rep.dist_after - d;
  rep.flux_delta = (flux_loop(out.F, 0.5).value - flux_loop(F, 0.5).value).norm();
  out.report = rep;

  if (cfg.enforce_gain && rep.gain < cfg.gain_floor * eta) {
    const cd exit = mesh.vertices[after.path.back()];
    char buf[256];
    std::snprintf(buf, sizeof buf,
                  "distance gain %.6g below %.3g * eta = %.6g; escape path of %zu vertices leaves at angle %.4f",
                  rep.gain, cfg.gain_floor, cfg.gain_floor * eta, after.path.size(), std::arg(exit));
    throw GainShortfall(buf);
  }
  return out;
}

JordanResult jordan_iterate(const ImmersionDisc& G, const JordanConfig& cfg) {
  const double delta0 = cfg.delta0 < 0.0 ? 0.5 * cfg.eps : cfg.delta0;
  const BoundaryMap Y = BoundaryMap::from_immersion(G);
  const DiscMesh mesh = triangulate_disc(cfg.boost.mesh_rings, cfg.boost.mesh_angles, cfg.boost.mesh_grading);
  int src = 0;
  for (std::size_t v = 0; v < mesh.vertices.size(); ++v)
    if (std::abs(mesh.vertices[v] - cfg.p0) < std::abs(mesh.vertices[src] - cfg.p0) && std::abs(mesh.vertices[v]) < 1.0)
      src = static_cast<int>(v);
  const double dist0 = intrinsic_distance(G, mesh, src).distance;

  JordanResult res;
  res.G = G;
  res.schedule = BoostSchedule::make(dist0, delta0, cfg.eps, cfg.max_steps);
  res.trace.push_back({0, 0.0, dist0, delta0, dist0, 0.0, 0});
  std::optional<VectorLaurent> lift;
  double dist = dist0, dev = 0.0;
  for (int j = 1; dist <= cfg.lambda; ++j) {
    if (j > cfg.max_steps)
      throw JordanBudgetExhausted("distance target not reached within max_steps", dist, res.trace);
    const double eta = res.schedule.eta(j);
    const double delta = std::min(res.schedule.delta[j - 1], dev * (1.0 + 1e-6) + 1e-12);
    BoostResult b;
    try {
      b = boost_step(res.G, Y, delta, eta, cfg.p0, dist, cfg.boost, lift);
    } catch (const JordanBudgetExhausted&) {
      throw;
    } catch (const BudgetExhausted& e) {
      throw JordanBudgetExhausted(std::string("step ") + std::to_string(j) + ": " + e.what(), e.best_achieved, res.trace);
    }
    res.G = b.F;
    lift = b.lift;
    dist = b.report.dist_after;
    dev = b.report.sup_dev;
    res.trace.push_back({j, eta, res.schedule.d[j], res.schedule.delta[j], dist, dev, b.report.N});
  }
  return res;
}

void write_trace_csv(std::ostream& os, const std::vector<JordanStep>& trace) {
  os << "step,eta,d,delta,measured_dist,measured_sup_dev,N\n";
  char buf[256];
  for (const auto& s : trace) {
    std::snprintf(buf, sizeof buf, "%d,%.12g,%.12g,%.12g,%.12g,%.12g,%d\n", s.j, s.eta, s.d, s.delta, s.measured_dist,
                  s.sup_dev, s.N);
    os << buf;
  }
}

}  // namespace nullforge
