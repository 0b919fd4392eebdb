// One line per acceptance criterion. Exit status is 0 when every criterion ran; --strict also requires all to pass.
#include <chrono>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>

#include "nullforge/convexshell.hpp"
#include "nullforge/errors.hpp"
#include "nullforge/geometry.hpp"
#include "nullforge/nullquad.hpp"
#include "nullforge/pipeline.hpp"
#include "nullforge/rhsolver.hpp"

using namespace nullforge;

namespace {

const cd I{0.0, 1.0};

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... xs) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, xs...);
  return buf;
}

CVec random_null(std::mt19937& rng, int n) {
  std::normal_distribution<double> g;
  CVec z(n);
  for (int i = 0; i < n; ++i) z[i] = {g(rng), g(rng)};
  cd rest = 0.0;
  for (int i = 0; i < n - 1; ++i) rest += z[i] * z[i];
  z[n - 1] = std::sqrt(-rest);
  return z;
}

VectorLaurent plane_phi(double scale, int n = 3) {
  VectorLaurent phi(static_cast<std::size_t>(n));
  phi[0] = LaurentPoly::constant(scale);
  phi[1] = LaurentPoly::constant(-scale * I);
  return phi;
}

RhProblem spinor_problem() {
  RhProblem p;
  p.F = NullDisc{plane_phi(1.0), CVec::Zero(3)};
  p.F.phi[1] = LaurentPoly::constant(I);
  p.r = smooth_bump(0.0, M_PI / 4, 0.5);
  p.sigma.linear = true;
  p.sigma.taylor = [](cd) {
    Eigen::MatrixXcd t = Eigen::MatrixXcd::Zero(2, 3);
    t(1, 0) = 1.0;
    t(1, 1) = -I;
    return t;
  };
  p.U = Neighborhood{0.0, M_PI / 3, 0.85};
  return p;
}

RhProblem direction_problem(const CVec& u, const CVec& v, double eps) {
  RhProblem p = spinor_problem();
  const int n = static_cast<int>(u.size());
  p.mode = RhMode::ConstantDirection;
  VectorLaurent phi(static_cast<std::size_t>(n));
  phi[0] = LaurentPoly::constant(1.0);
  phi[1] = LaurentPoly::constant(I);
  p.F = NullDisc{phi, CVec::Zero(n)};
  p.u = u;
  p.v = v;
  p.eps = eps;
  p.sigma.taylor = [](cd) {
    Eigen::MatrixXcd t = Eigen::MatrixXcd::Zero(2, 1);
    t(1, 0) = 1.0;
    return t;
  };
  return p;
}

ImmersionDisc as_immersion(const NullDisc& G) { return ImmersionDisc::disc(G.phi, G.base.real()); }

Outcome null_cone() {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> U(-1, 1);
  double theta = 0.0, theta_rel = 0.0;
  for (int t = 0; t < 10000; ++t) {
    cd u, v;
    do {
      u = {U(rng), U(rng)};
      v = {U(rng), U(rng)};
    } while (std::norm(u) + std::norm(v) > 1.0);
    const CVec p = spinor_pi(u, v), q = spinor_pi(10.0 * u, 10.0 * v);
    theta = std::max(theta, std::abs(theta_form(p, p)));
    theta_rel = std::max(theta_rel, std::abs(theta_form(q, q)) / q.squaredNorm());
  }
  std::mt19937 r2(6);
  double psi = 0.0;
  for (int t = 0; t < 1000; ++t) {
    const int n = 3 + t % 3;
    const CVec u = random_null(r2, n), v = random_null(r2, n), w = random_null(r2, n);
    const auto tr = FrameTriple::make(u, v, w);
    BranchTracker br;
    const auto m = frame_matrices(tr, br);
    const double res = (psi_param(tr, m, 1.0, 0.0) - u).norm() + (psi_param(tr, m, 0.0, 1.0) - v).norm();
    psi = std::max(psi, res / (u.norm() + v.norm()));
  }
  return {theta < 1e-12 && theta_rel < 1e-15 && psi < 1e-9,
          fmt("max |Theta(pi)| %.2e on the unit ball, %.2e relative at radius 10, psi residual %.2e over 1e3 frames", theta,
              theta_rel, psi)};
}

std::vector<VectorLaurent> random_mu(std::mt19937& rng) {
  std::normal_distribution<double> g;
  std::vector<VectorLaurent> A(5, VectorLaurent(3));
  for (auto& a : A)
    for (std::size_t i = 0; i < 3; ++i) {
      a[i] = LaurentPoly{-3, std::vector<cd>(7)};
      for (auto& x : a[i].c) x = cd(g(rng), g(rng));
    }
  return A;
}

Outcome decay() {
  std::mt19937 rng(11);
  bool ok = true;
  double worst_ratio = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const auto A = random_mu(rng);
    const int n0 = lemma_n0(A);
    const double e20 = lemma_error(A, 20), e40 = lemma_error(A, 40), e80 = lemma_error(A, 80);
    ok = ok && e80 < e40 && e40 < e20;
    const double C = e20 * (20 - n0 + 1) / std::sqrt(41.0);
    for (int N : {40, 80}) {
      const double r = lemma_error(A, N) / (C * std::sqrt(2.0 * N + 1) / (N - n0 + 1));
      worst_ratio = std::max(worst_ratio, r);
    }
  }
  std::vector<VectorLaurent> xi(1, VectorLaurent(1));
  xi[0][0] = LaurentPoly::constant(1.0);
  double exact = 0.0;
  for (int N : {20, 40, 80}) exact = std::max(exact, lemma_error(xi, N));
  ok = ok && worst_ratio <= 1.0 && exact < 1e-12;
  return {ok, fmt("20 random mu monotone %s, max err/bound %.3f, mu = xi err %.1e", ok ? "yes" : "no", worst_ratio, exact)};
}

Outcome rh3() {
  const auto p = spinor_problem();
  const auto s = solve_rh3(p);
  const double hopf = hopf_residual(as_immersion(s.G));
  const bool ok = s.report.pass(p.eps) && hopf < 1e-8 && s.N == 3032 && s.c_index == 0;
  return {ok, fmt("s1 %.4f s2 %.4f s3 %.2e hopf %.1e, N %d c_index %d (pinned 3032, 0)", s.report.s1, s.report.s2,
                  s.report.s3, hopf, s.N, s.c_index)};
}

Outcome rhn() {
  CVec u(4), v(4);
  u << 1.0, 0.0, I, 0.0;
  v << 1.0, 0.0, 0.0, I;
  const auto p = direction_problem(u, v, 0.1);
  const CVec fp = eval_poly(p.F.phi, 0.0);
  const auto s = solve_rhn(p);
  const double hopf = hopf_residual(as_immersion(s.G));

  CVec u3(3), v3(3);
  u3 << 1.0, -I, 0.0;
  v3 << 0.0, 1.0, I;
  const auto a = solve_rhn(direction_problem(u3, v3, 0.05));
  const auto b = solve_rh3(spinor_problem());
  const Eigen::MatrixXcd ga = eval_circle(a.G.primitive(), 1.0, 4096), gb = eval_circle(b.G.primitive(), 1.0, 4096);
  double track = 0.0;
  for (Eigen::Index k = 0; k < ga.rows(); ++k) track = std::max(track, (ga.row(k) - gb.row(k)).norm());
  const bool ok = s.report.pass(0.1) && hopf < 1e-8 && track < 2 * 0.05;
  return {ok, fmt("n=4 s1 %.4f s2 %.4f s3 %.2e, |Theta(u,F')| %.3f |Theta(v,F')| %.3f, n=3 track distance %.4f < 0.1",
                  s.report.s1, s.report.s2, s.report.s3, std::abs(theta_form(u, fp)), std::abs(theta_form(v, fp)), track)};
}

Outcome boost() {
  const auto F = ImmersionDisc::disc(plane_phi(1.0), RVec::Zero(3));
  RVec shift = RVec::Zero(3);
  shift[2] = 0.005;
  const auto Y = BoundaryMap::from_immersion(F).translated(shift);
  BoostConfig cfg;
  cfg.rh_eps = 0.02;
  const auto r = boost_step(F, Y, 0.01, 0.1, 0.0, 1.0, cfg).report;
  const double bound = std::hypot(0.01, 0.1) + 2 * cfg.rh_eps;
  const bool ok = r.sup_dev < bound && r.gain >= 0.5 * 0.1 && r.flux_delta < 1e-10;
  return {ok, fmt("sup %.4f < %.4f, gain %.4f >= 0.05, flux delta %.1e, N %d", r.sup_dev, bound, r.gain, r.flux_delta, r.N)};
}

Outcome jordan() {
  JordanConfig cfg;
  cfg.eps = 0.2;
  cfg.max_steps = 4;
  cfg.boost.rh_eps = 0.01;
  cfg.boost.enforce_gain = false;
  const auto F = ImmersionDisc::disc(plane_phi(0.1), RVec::Zero(3));
  cfg.lambda = 2.0 * intrinsic_distance(F, triangulate_disc(cfg.boost.mesh_rings, cfg.boost.mesh_angles)).distance;
  const auto res = jordan_iterate(F, cfg);
  const auto& s = res.schedule;
  double id = 0.0;
  for (int j = 1; j <= 4; ++j) {
    id = std::max(id, std::abs(s.d[j] - s.d[j - 1] - s.c / j));
    id = std::max(id, std::abs(s.delta[j] * s.delta[j] - s.delta[j - 1] * s.delta[j - 1] - s.c * s.c / (double(j) * j)));
  }
  const auto& tr = res.trace;
  bool mono = true;
  for (std::size_t i = 1; i < tr.size(); ++i) mono = mono && tr[i].measured_dist > tr[i - 1].measured_dist;
  const bool ok = id < 1e-15 && tr.back().measured_dist > 2 * tr.front().measured_dist && tr.back().sup_dev < cfg.eps && mono;
  return {ok, fmt("identities %.1e, dist %.4f -> %.4f in %d of 4 steps, sup drift %.4f < 0.2, monotone %s", id,
                  tr.front().measured_dist, tr.back().measured_dist, int(tr.size()) - 1, tr.back().sup_dev, mono ? "yes" : "no")};
}

Outcome shell() {
  const auto D = ConvexDomain::ball(RVec::Zero(3), 1.0);
  double par = 0.0;
  for (double t : {-0.5, 0.1, 0.3, 0.9}) par = std::max(par, std::abs(1.0 / parallel_domain(D, t).kappa_max - (1.0 - t)));
  RVec base = RVec::Zero(3);
  base[2] = 0.93;
  const auto F = ImmersionDisc::disc(plane_phi(0.1), base);
  const auto schedule = ShellSchedule::geometric(0.1, 0.5, 4, D.kappa_min, 2.0);
  std::vector<ProperStep> trace;
  std::string why;
  try {
    trace = proper_iterate(F, D, schedule).trace;
  } catch (const ProperBudgetExhausted& e) {
    trace = e.trace;
    why = e.what();
  }
  bool ok = par < 1e-12 && static_cast<int>(trace.size()) == 5;
  std::ostringstream os;
  os << fmt("parallel-domain identity %.1e; %d of 4 steps", par, int(trace.size()) - 1);
  for (std::size_t j = 1; j < trace.size(); ++j) {
    const auto& s = trace[j];
    ok = ok && s.max_gap < s.delta && s.min_gap > 0.0 && s.drift < s.bound && s.dist > trace[j - 1].dist;
    os << fmt("; step %d gap [%.4f, %.4f] delta %.4f drift %.4f bound %.4f dist %.4f", s.j, s.min_gap, s.max_gap, s.delta,
              s.drift, s.bound, s.dist);
  }
  if (!why.empty()) os << "; stopped: " << why;
  return {ok, os.str()};
}

Outcome metric() {
  std::mt19937 rng(25);
  std::normal_distribution<double> g;
  LaurentPoly a, b;
  a.c.resize(5);
  b.c.resize(5);
  for (int j = 0; j <= 4; ++j) {
    a.c[j] = cd(g(rng), g(rng)) / double(j + 1);
    b.c[j] = cd(g(rng), g(rng)) / double(j + 1);
  }
  a.c[0] += 3.0;
  VectorLaurent phi(3);
  phi[0] = mul(a, a) - mul(b, b);
  phi[1] = cd(2.0) * mul(a, b);
  phi[2] = cd(-I) * (mul(a, a) + mul(b, b));
  const auto imm = ImmersionDisc::disc(phi, RVec::Zero(3));
  std::uniform_real_distribution<double> U(-0.7, 0.7);
  const double h = 1e-5;
  double worst = 0.0;
  for (int t = 0; t < 100; ++t) {
    const cd z(U(rng), U(rng));
    const double lam = conformal_factor(imm, z);
    const RVec f0 = integrate_real_part(imm, z);
    worst = std::max(worst, std::abs(lam - (integrate_real_part(imm, z + h) - f0).norm() / h) / lam);
    worst = std::max(worst, std::abs(lam - (integrate_real_part(imm, z + I * h) - f0).norm() / h) / lam);
  }

  // Flat preset of scale 0.7: the distance from the center is 0.7.
  const auto flat = ImmersionDisc::disc(plane_phi(0.7), RVec::Zero(3));
  std::vector<double> err;
  for (int k = 0; k < 4; ++k) err.push_back(std::abs(intrinsic_distance(flat, triangulate_disc(4 << k, 16 << k)).distance - 0.7));
  const double floor = 1e-12;
  bool halving = true;
  for (std::size_t k = 1; k < err.size(); ++k) {
    const bool at_floor = err[k] < floor && err[k - 1] < floor;
    const double ratio = err[k - 1] / err[k];
    halving = halving && (at_floor || (ratio >= 1.5 && ratio <= 2.5));
  }
  std::ostringstream os;
  os << fmt("conformal factor vs finite differences %.1e relative; flat distance errors", worst);
  for (double e : err) os << fmt(" %.1e", e);
  os << (halving ? " (halving or at round-off)" : " (not halving)");
  return {worst < 1e-3 && halving, os.str()};
}

Outcome flux() {
  VectorLaurent phi(3);
  phi[0] = LaurentPoly{-2, {0.5, 0.0, -0.5}};
  phi[1] = LaurentPoly{-2, {0.5 * I, 0.0, 0.5 * I}};
  phi[2] = LaurentPoly::monomial(-1);
  const auto cat = ImmersionDisc::annulus(phi, RVec::Zero(3), 0.2);
  const RVec expected = 2 * M_PI * RVec::Unit(3, 2);
  const double e1 = (flux_loop(cat, 0.3).value - expected).norm(), e2 = (flux_loop(cat, 0.8).value - expected).norm();
  return {e1 < 1e-10 && e2 < 1e-10, fmt("|flux - (0,0,2pi)| %.1e at radius 0.3, %.1e at radius 0.8", e1, e2)};
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

Outcome determinism() {
  const auto root = std::filesystem::temp_directory_path() / "nullforge_acceptance";
  std::filesystem::remove_all(root);
  const char* configs[] = {
      R"({"experiment": "rh3", "seed": 3, "immersion": {"preset": "spinor-disc"}, "mesh": {"rings": 8, "angles": 32}})",
      R"({"experiment": "rhn", "seed": 4, "immersion": {"preset": "plane", "dim": 4}, "mesh": {"rings": 8, "angles": 32}})",
      R"({"experiment": "jordan", "seed": 5, "immersion": {"preset": "plane", "scale": 0.1}, "mesh": {"rings": 16, "angles": 64}})"};
  bool ok = true;
  int k = 0;
  for (const char* c : configs) {
    const auto cfg = nlohmann::json::parse(c);
    const auto a = root / (std::to_string(k) + "a"), b = root / (std::to_string(k) + "b");
    run_pipeline(cfg, {a.string()});
    run_pipeline(cfg, {b.string()});
    ok = ok && slurp(a / "report.json") == slurp(b / "report.json") && !slurp(a / "report.json").empty();
    ++k;
  }
  std::filesystem::remove_all(root);
  return {ok, fmt("report.json bitwise identical across reruns for rh3, rhn, jordan: %s", ok ? "yes" : "no")};
}

}  // namespace

int main(int argc, char** argv) {
  bool strict = false;
  int only = 0;
  for (int i = 1; i < argc; ++i) {
    if (!std::strcmp(argv[i], "--strict")) strict = true;
    else only = std::atoi(argv[i]);
  }
  struct Criterion {
    const char* name;
    double budget_s;
    std::function<Outcome()> run;
  };
  const Criterion criteria[] = {
      {"null-cone algebra", 5, null_cone},     {"shift-error decay", 30, decay},     {"RH in n = 3", 120, rh3},
      {"RH in n = 4", 180, rhn},               {"boost step", 180, boost},     {"Jordan iteration", 600, jordan},
      {"convex shell", 600, shell},            {"metric fidelity", 600, metric}, {"flux", 60, flux},
      {"determinism", 600, determinism}};
  int passed = 0, ran = 0;
  for (int i = 0; i < 10; ++i) {
    if (only && only != i + 1) continue;
    ++ran;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].run();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (secs > criteria[i].budget_s) {
      o.pass = false;
      o.detail += fmt("; over the %.0f s budget", criteria[i].budget_s);
    }
    passed += o.pass;
    std::printf("criterion %2d %s  %s: %s [%.1f s]\n", i + 1, o.pass ? "PASS" : "FAIL", criteria[i].name, o.detail.c_str(), secs);
    std::fflush(stdout);
  }
  std::printf("%d of %d criteria pass\n", passed, ran);
  return strict && passed != ran ? 1 : 0;
}
