#include "nullforge/pipeline.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "nullforge/convexshell.hpp"
#include "nullforge/errors.hpp"
#include "nullforge/geometry.hpp"
#include "nullforge/nullquad.hpp"

namespace nullforge {

using nlohmann::json;

namespace {

const cd kI{0.0, 1.0};

// ---- config access; every error names the dotted field ----

[[noreturn]] void bad(const std::string& field, const std::string& msg) { throw ConfigError(field + ": " + msg); }

const json* member(const json& obj, const std::string& key) {
  if (!obj.is_object()) return nullptr;
  auto it = obj.find(key);
  return it == obj.end() || it->is_null() ? nullptr : &*it;
}

double number(const json& obj, const std::string& path, const std::string& key, double def) {
  const json* v = member(obj, key);
  if (!v) return def;
  if (!v->is_number()) bad(path + key, "expected a number");
  return v->get<double>();
}

int integer(const json& obj, const std::string& path, const std::string& key, int def) {
  const json* v = member(obj, key);
  if (!v) return def;
  if (!v->is_number_integer()) bad(path + key, "expected an integer");
  return v->get<int>();
}

bool boolean(const json& obj, const std::string& path, const std::string& key, bool def) {
  const json* v = member(obj, key);
  if (!v) return def;
  if (!v->is_boolean()) bad(path + key, "expected true or false");
  return v->get<bool>();
}

const json& object(const json& obj, const std::string& path, const std::string& key) {
  static const json empty = json::object();
  const json* v = member(obj, key);
  if (!v) return empty;
  if (!v->is_object()) bad(path + key, "expected an object");
  return *v;
}

void positive(double x, const std::string& field) {
  if (!(x > 0.0)) bad(field, "must be positive, got " + json(x).dump());
}

void open_unit(double x, const std::string& field) {
  if (!(x > 0.0 && x < 1.0)) bad(field, "must lie in (0,1), got " + json(x).dump());
}

// Entries are numbers or [re, im] pairs.
CVec cvec(const json& obj, const std::string& path, const std::string& key, const CVec& def) {
  const json* v = member(obj, key);
  if (!v) return def;
  if (!v->is_array()) bad(path + key, "expected an array of complex entries");
  CVec out(static_cast<Eigen::Index>(v->size()));
  for (std::size_t i = 0; i < v->size(); ++i) {
    const json& e = (*v)[i];
    if (e.is_number()) {
      out[static_cast<Eigen::Index>(i)] = e.get<double>();
    } else if (e.is_array() && e.size() == 2 && e[0].is_number() && e[1].is_number()) {
      out[static_cast<Eigen::Index>(i)] = cd(e[0].get<double>(), e[1].get<double>());
    } else {
      bad(path + key + "[" + std::to_string(i) + "]", "expected a number or [re, im]");
    }
  }
  return out;
}

RVec rvec(const json& obj, const std::string& path, const std::string& key, const RVec& def) {
  const json* v = member(obj, key);
  if (!v) return def;
  if (!v->is_array()) bad(path + key, "expected an array of numbers");
  RVec out(static_cast<Eigen::Index>(v->size()));
  for (std::size_t i = 0; i < v->size(); ++i) {
    if (!(*v)[i].is_number()) bad(path + key + "[" + std::to_string(i) + "]", "expected a number");
    out[static_cast<Eigen::Index>(i)] = (*v)[i].get<double>();
  }
  return out;
}

json to_json(const CVec& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back({v[i].real(), v[i].imag()});
  return a;
}

json to_json(const RVec& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

// ---- report ----

struct Report {
  json checks = json::array();
  std::string first_failed;

  void add(const std::string& name, double value, const std::string& op, double bound, std::vector<std::string> inputs) {
    bool pass = false;
    if (op == "<") pass = value < bound;
    else if (op == "<=") pass = value <= bound;
    else if (op == ">") pass = value > bound;
    else if (op == ">=") pass = value >= bound;
    checks.push_back({{"name", name}, {"value", value}, {"op", op}, {"bound", bound}, {"pass", pass}, {"inputs", inputs}});
    if (!pass && first_failed.empty()) first_failed = name;
  }
  void fail(const std::string& name, const std::string& message) {
    checks.push_back({{"name", name}, {"value", nullptr}, {"op", "ran"}, {"bound", nullptr}, {"pass", false},
                      {"message", message}, {"inputs", json::array()}});
    if (first_failed.empty()) first_failed = name;
  }
};

// max |Theta(phi, phi)| / |phi|^2 at seeded points of the unit disc
double nullity_sample(const VectorLaurent& phi, std::uint64_t seed, int count = 200) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0.0;
  for (int k = 0; k < count; ++k) {
    const cd z = std::polar(std::sqrt(u(rng)), 2.0 * M_PI * u(rng));
    const CVec f = eval_poly(phi, z);
    const double n2 = f.squaredNorm();
    if (n2 > 0.0) worst = std::max(worst, std::abs(theta_form(f, f)) / n2);
  }
  return worst;
}

struct MeshSpec {
  int rings = 32, angles = 128;
  double grading = 1.0;
};

struct Run {
  std::filesystem::path dir;
  std::vector<std::string> artifacts;
  std::ostream* log = nullptr;

  void note(const std::string& s) const {
    if (log) *log << s << std::endl;
  }
  std::ofstream open(const std::string& name) {
    std::ofstream f(dir / name, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open " + (dir / name).string() + " for writing");
    artifacts.push_back(name);
    return f;
  }
  void surfaces(const ImmersionDisc& initial, const ImmersionDisc& final_, const MeshSpec& ms) {
    const DiscMesh mesh = triangulate_disc(ms.rings, ms.angles, ms.grading);
    {
      auto f = open("surface_initial.obj");
      write_obj(f, image_vertices(initial, mesh), mesh);
    }
    const Eigen::MatrixXd img = image_vertices(final_, mesh);
    {
      auto f = open("surface_final.obj");
      write_obj(f, img, mesh);
    }
    auto f = open("coords.csv");
    f << "vertex";
    for (Eigen::Index i = 0; i < img.cols(); ++i) f << ",x" << i + 1;
    f << "\n";
    char buf[64];
    for (Eigen::Index v = 0; v < img.rows(); ++v) {
      f << v;
      for (Eigen::Index i = 0; i < img.cols(); ++i) {
        std::snprintf(buf, sizeof buf, ",%.12g", img(v, i));
        f << buf;
      }
      f << "\n";
    }
  }
};

// ---- problem builders ----

SizeFn size_function(const json& params, const std::string& path, json& eff) {
  const json& b = object(params, path, "bump");
  const std::string bp = path + "bump.";
  const double center = number(b, bp, "center", 0.0);
  const double hw = number(b, bp, "half_width", M_PI / 4);
  const double rmax = number(b, bp, "rmax", 0.5);
  positive(hw, bp + "half_width");
  if (!(rmax >= 0.0)) bad(bp + "rmax", "must be nonnegative");
  eff["bump"] = {{"center", center}, {"half_width", hw}, {"rmax", rmax}};
  if (rmax == 0.0) return [](cd) { return 0.0; };
  return smooth_bump(center, hw, rmax);
}

std::optional<Neighborhood> neighborhood(const json& params, const std::string& path, json& eff) {
  if (params.is_object() && params.contains("U") && params["U"].is_null()) {
    eff["U"] = nullptr;
    return std::nullopt;
  }
  const json& u = object(params, path, "U");
  const std::string up = path + "U.";
  Neighborhood n{number(u, up, "center", 0.0), number(u, up, "half_width", M_PI / 3), number(u, up, "rho_min", 0.85)};
  positive(n.half_width, up + "half_width");
  open_unit(n.rho_min, up + "rho_min");
  eff["U"] = {{"center", n.center}, {"half_width", n.half_width}, {"rho_min", n.rho_min}};
  return n;
}

RhOptions rh_options(const json& params, const std::string& path, json& eff) {
  RhOptions o;
  o.n_cap = integer(params, path, "n_cap", o.n_cap);
  o.c_grid = integer(params, path, "c_grid", o.c_grid);
  if (o.n_cap < 1) bad(path + "n_cap", "must be at least 1");
  if (o.c_grid < 1) bad(path + "c_grid", "must be at least 1");
  eff["n_cap"] = o.n_cap;
  eff["c_grid"] = o.c_grid;
  return o;
}

void rh_checks(Report& rep, const RhSolution& s, const RhProblem& p, std::uint64_t seed) {
  const ImmersionDisc G = ImmersionDisc::disc(s.G.phi, s.G.base.real());
  rep.add("s1", s.report.s1, "<", p.eps, {"params.eps"});
  rep.add("s2", s.report.s2, "<", p.eps, {"params.eps", "params.rho0"});
  rep.add("s3", s.report.s3, "<", p.eps, {"params.eps", "params.U"});
  rep.add("hopf_residual", hopf_residual(G), "<", 1e-8, {});
  rep.add("base_point_drift", (s.G.eval(0.0) - p.F.eval(0.0)).norm(), "<", 1e-10, {"immersion"});
  rep.add("nullity_at_random_points", nullity_sample(s.G.phi, seed), "<", 1e-10, {"seed"});
}

json rh_results(const RhSolution& s) {
  return {{"N", s.N},
          {"N0", s.N0},
          {"c_index", s.c_index},
          {"rho_prime", s.rho_prime},
          {"s1", s.report.s1},
          {"s2", s.report.s2},
          {"s3", s.report.s3},
          {"rational_error", s.rational_error},
          {"twisted", s.twisted},
          {"winding", s.winding},
          {"candidates_tried", s.diagnostics.size()}};
}

void require_disc(const ImmersionDisc& F, const std::string& experiment) {
  if (F.domain != DomainKind::Disc) bad("immersion", "experiment " + experiment + " needs a disc immersion");
}

// ---- experiments ----

void run_rh(bool spinor, const ImmersionDisc& F, const json& params, std::uint64_t seed, const MeshSpec& ms, Run& run,
            json& out, Report& rep) {
  const std::string path = "params.";
  require_disc(F, spinor ? "rh3" : "rhn");
  const int n = static_cast<int>(F.dim());
  if (spinor && n != 3) bad("immersion", "experiment rh3 needs n = 3");
  json eff;
  RhProblem p;
  p.mode = spinor ? RhMode::Spinor3 : RhMode::ConstantDirection;
  p.F = NullDisc{F.phi, F.base.cast<cd>()};
  p.eps = number(params, path, "eps", spinor ? 0.05 : 0.1);
  p.rho0 = number(params, path, "rho0", 0.9);
  positive(p.eps, path + "eps");
  open_unit(p.rho0, path + "rho0");
  p.real_form = boolean(params, path, "real_form", false);
  eff["eps"] = p.eps;
  eff["rho0"] = p.rho0;
  eff["real_form"] = p.real_form;
  p.r = size_function(params, path, eff);
  p.U = neighborhood(params, path, eff);
  p.sigma.linear = true;
  if (spinor) {
    CVec a0(3);
    a0 << 1.0, -kI, 0.0;
    const CVec a = cvec(params, path, "sigma", a0);
    if (a.size() != 3) bad(path + "sigma", "expected 3 entries");
    if (std::abs(theta_form(a, a)) > 1e-12 * a.squaredNorm()) bad(path + "sigma", "must be a null vector");
    eff["sigma"] = to_json(a);
    p.sigma.taylor = [a](cd) {
      Eigen::MatrixXcd t = Eigen::MatrixXcd::Zero(2, 3);
      t.row(1) = a.transpose();
      return t;
    };
  } else {
    CVec u0 = CVec::Zero(n), v0 = CVec::Zero(n);
    if (n == 4) {
      u0 << 1.0, 0.0, kI, 0.0;
      v0 << 1.0, 0.0, 0.0, kI;
    } else if (n == 3) {
      u0 << 1.0, -kI, 0.0;
      v0 << 0.0, 1.0, kI;
    }
    p.u = cvec(params, path, "u", u0);
    p.v = cvec(params, path, "v", v0);
    if (p.u.size() != n) bad(path + "u", "expected " + std::to_string(n) + " entries");
    if (p.v.size() != n) bad(path + "v", "expected " + std::to_string(n) + " entries");
    eff["u"] = to_json(p.u);
    eff["v"] = to_json(p.v);
    p.sigma.taylor = [](cd) {
      Eigen::MatrixXcd t = Eigen::MatrixXcd::Zero(2, 1);
      t(1, 0) = 1.0;
      return t;
    };
    const CVec fp = eval_poly(F.phi, 0.0);
    out["nondegeneracy"] = {{"theta_u_v", std::abs(theta_form(p.u, p.v))},
                            {"theta_u_Fprime0", std::abs(theta_form(p.u, fp))},
                            {"theta_v_Fprime0", std::abs(theta_form(p.v, fp))}};
  }
  const RhOptions opt = rh_options(params, path, eff);
  out["params"] = eff;

  run.note(std::string("solving ") + (spinor ? "rh3" : "rhn"));
  ImmersionDisc final_ = F;
  try {
    const RhSolution s = spinor ? solve_rh3(p, opt) : solve_rhn(p, opt);
    out["results"] = rh_results(s);
    rh_checks(rep, s, p, seed);
    final_ = ImmersionDisc::disc(s.G.phi, s.G.base.real());
    auto f = run.open("trace.csv");
    write_diagnostics_csv(f, s.diagnostics);
  } catch (const BudgetExhausted& e) {
    out["results"] = {{"best_s1", e.best_achieved}};
    rep.fail("solver", e.what());
  } catch (const Error& e) {
    rep.fail("solver", e.what());
  }
  run.surfaces(F, final_, ms);
}

void run_jordan(const ImmersionDisc& F, const json& params, const MeshSpec& ms, Run& run, json& out, Report& rep) {
  const std::string path = "params.";
  require_disc(F, "jordan");
  json eff;
  JordanConfig cfg;
  cfg.eps = number(params, path, "eps", 0.2);
  positive(cfg.eps, path + "eps");
  cfg.delta0 = number(params, path, "delta0", 0.5 * cfg.eps);
  if (!(cfg.delta0 >= 0.0 && cfg.delta0 < cfg.eps)) bad(path + "delta0", "must lie in [0, eps)");
  cfg.max_steps = integer(params, path, "max_steps", 4);
  if (cfg.max_steps < 0) bad(path + "max_steps", "must be nonnegative");
  cfg.boost.rh_eps = number(params, path, "rh_eps", 0.01);
  positive(cfg.boost.rh_eps, path + "rh_eps");
  cfg.boost.rho0 = number(params, path, "rho0", 0.9);
  open_unit(cfg.boost.rho0, path + "rho0");
  cfg.boost.enforce_gain = boolean(params, path, "enforce_gain", false);
  cfg.boost.mesh_rings = ms.rings;
  cfg.boost.mesh_angles = ms.angles;
  cfg.boost.mesh_grading = ms.grading;
  cfg.boost.rh = rh_options(params, path, eff);

  const DiscMesh mesh = triangulate_disc(ms.rings, ms.angles, ms.grading);
  const double d0 = intrinsic_distance(F, mesh, 0).distance;
  const double factor = number(params, path, "lambda_factor", 2.0);
  cfg.lambda = number(params, path, "lambda", factor * d0);
  positive(cfg.lambda, path + "lambda");
  eff["eps"] = cfg.eps;
  eff["delta0"] = cfg.delta0;
  eff["max_steps"] = cfg.max_steps;
  eff["rh_eps"] = cfg.boost.rh_eps;
  eff["rho0"] = cfg.boost.rho0;
  eff["enforce_gain"] = cfg.boost.enforce_gain;
  eff["lambda"] = cfg.lambda;
  out["params"] = eff;

  std::vector<JordanStep> trace;
  BoostSchedule schedule = BoostSchedule::make(d0, cfg.delta0, cfg.eps, cfg.max_steps);
  ImmersionDisc final_ = F;
  run.note("running the Jordan iteration");
  try {
    const JordanResult r = jordan_iterate(F, cfg);
    trace = r.trace;
    final_ = r.G;
  } catch (const JordanBudgetExhausted& e) {
    trace = e.trace;
    rep.fail("solver", e.what());
  } catch (const Error& e) {
    rep.fail("solver", e.what());
  }

  double id_d = 0.0, id_delta = 0.0;
  for (int j = 1; j <= cfg.max_steps; ++j) {
    id_d = std::max(id_d, std::abs(schedule.d[j] - schedule.d[j - 1] - schedule.c / j));
    id_delta = std::max(id_delta, std::abs(schedule.delta[j] * schedule.delta[j] -
                                           schedule.delta[j - 1] * schedule.delta[j - 1] - schedule.c * schedule.c / (double(j) * j)));
  }
  json tr = json::array();
  for (const auto& s : trace)
    tr.push_back({{"step", s.j}, {"eta", s.eta}, {"d", s.d}, {"delta", s.delta}, {"measured_dist", s.measured_dist},
                  {"measured_sup_dev", s.sup_dev}, {"N", s.N}});
  out["trace"] = tr;
  out["results"] = {{"steps", static_cast<int>(trace.size()) - 1},
                    {"initial_dist", d0},
                    {"final_dist", trace.empty() ? d0 : trace.back().measured_dist},
                    {"c", schedule.c}};
  rep.add("schedule_d_identity", id_d, "<", 1e-14, {"params.eps", "params.delta0"});
  rep.add("schedule_delta_identity", id_delta, "<", 1e-14, {"params.eps", "params.delta0"});
  if (!trace.empty()) {
    rep.add("final_dist_exceeds_lambda", trace.back().measured_dist, ">", cfg.lambda, {"params.lambda"});
    rep.add("total_sup_drift", trace.back().sup_dev, "<", cfg.eps, {"params.eps"});
    double inc = INFINITY;
    for (std::size_t i = 1; i < trace.size(); ++i) inc = std::min(inc, trace[i].measured_dist - trace[i - 1].measured_dist);
    if (trace.size() > 1) rep.add("min_distance_increment", inc, ">", 0.0, {});
  }
  auto f = run.open("trace.csv");
  write_trace_csv(f, trace);
  run.surfaces(F, final_, ms);
}

void run_proper(const ImmersionDisc& F, const json& params, const MeshSpec& ms, Run& run, json& out, Report& rep) {
  const std::string path = "params.";
  require_disc(F, "proper");
  json eff;
  const json& ball = object(params, path, "ball");
  const RVec center = rvec(ball, path + "ball.", "center", RVec::Zero(static_cast<Eigen::Index>(F.dim())));
  const double radius = number(ball, path + "ball.", "radius", 1.0);
  positive(radius, path + "ball.radius");
  if (center.size() != static_cast<Eigen::Index>(F.dim())) bad(path + "ball.center", "dimension mismatch");
  const ConvexDomain D = ConvexDomain::ball(center, radius);

  const json& sch = object(params, path, "schedule");
  const std::string sp = path + "schedule.";
  const double d1 = number(sch, sp, "delta1", 0.1), ratio = number(sch, sp, "ratio", 0.5);
  const int steps = integer(sch, sp, "steps", 4);
  const double budget = number(sch, sp, "budget", 2.0);
  positive(d1, sp + "delta1");
  open_unit(ratio, sp + "ratio");
  if (steps < 1) bad(sp + "steps", "must be at least 1");
  ShellSchedule schedule;
  try {
    schedule = ShellSchedule::geometric(d1, ratio, steps, D.kappa_min, budget);
  } catch (const Error& e) {
    bad(sp.substr(0, sp.size() - 1), e.what());
  }

  ProperConfig cfg;
  cfg.boost_eta = number(params, path, "boost_eta", cfg.boost_eta);
  positive(cfg.boost_eta, path + "boost_eta");
  cfg.boost.mesh_rings = ms.rings;
  cfg.boost.mesh_angles = ms.angles;
  cfg.boost.mesh_grading = ms.grading;
  cfg.boost.rh = rh_options(params, path, eff);
  cfg.push.rh = cfg.boost.rh;
  eff["ball"] = {{"center", to_json(center)}, {"radius", radius}};
  eff["schedule"] = {{"delta1", d1}, {"ratio", ratio}, {"steps", steps}, {"budget", budget}};
  eff["boost_eta"] = cfg.boost_eta;
  out["params"] = eff;

  std::vector<ProperStep> trace;
  ImmersionDisc final_ = F;
  run.note("running the shell iteration");
  try {
    const ProperResult r = proper_iterate(F, D, schedule, cfg);
    trace = r.trace;
    final_ = r.G;
  } catch (const ProperBudgetExhausted& e) {
    trace = e.trace;
    rep.fail("solver", e.what());
  } catch (const Error& e) {
    rep.fail("solver", e.what());
  }
  json tr = json::array();
  for (const auto& s : trace)
    tr.push_back({{"step", s.j}, {"delta", s.delta}, {"eta", s.eta}, {"boost_eta", s.boost_eta}, {"min_gap", s.min_gap},
                  {"max_gap", s.max_gap}, {"dist", s.dist}, {"drift", s.drift}, {"bound", s.bound},
                  {"total_drift", s.total_drift}, {"N_boost", s.N_boost}, {"N_push", s.N_push}});
  out["trace"] = tr;
  const int done = static_cast<int>(trace.size()) - 1;
  out["results"] = {{"steps_completed", done}, {"steps_scheduled", steps}};
  rep.add("steps_completed", done, ">=", steps, {"params.schedule.steps"});
  for (int j = 1; j <= done; ++j) {
    const auto& s = trace[static_cast<std::size_t>(j)];
    const std::string tag = "step" + std::to_string(j) + "_";
    rep.add(tag + "gap_below_delta", s.max_gap, "<", s.delta, {"params.schedule"});
    rep.add(tag + "inside_ball", s.min_gap, ">", 0.0, {"params.ball"});
    rep.add(tag + "drift", s.drift, "<", s.bound, {"params.schedule", "params.boost_eta"});
    rep.add(tag + "dist_increment", s.dist - trace[static_cast<std::size_t>(j - 1)].dist, ">", 0.0, {});
  }
  auto f = run.open("trace.csv");
  write_proper_trace_csv(f, trace);
  run.surfaces(F, final_, ms);
}

void write_summary(std::ostream& os, const json& report) {
  os << "experiment: " << report["experiment"].get<std::string>() << "\n";
  os << "status: " << report["status"].get<std::string>() << "\n";
  if (!report["first_failed"].get<std::string>().empty()) os << "first failed check: " << report["first_failed"].get<std::string>() << "\n";
  char buf[256];
  for (const auto& c : report["checks"]) {
    if (c["op"] == "ran") {
      std::snprintf(buf, sizeof buf, "  %-32s FAIL  %s\n", c["name"].get<std::string>().c_str(),
                    c["message"].get<std::string>().c_str());
    } else {
      std::snprintf(buf, sizeof buf, "  %-32s %s  %.6g %s %.6g\n", c["name"].get<std::string>().c_str(),
                    c["pass"].get<bool>() ? "pass" : "FAIL", c["value"].get<double>(), c["op"].get<std::string>().c_str(),
                    c["bound"].get<double>());
    }
    os << buf;
  }
}

bool compare(double value, const std::string& op, double bound) {
  if (op == "<") return value < bound;
  if (op == "<=") return value <= bound;
  if (op == ">") return value > bound;
  if (op == ">=") return value >= bound;
  return false;
}

}  // namespace

ImmersionDisc preset_immersion(const json& spec) {
  const std::string path = "immersion.";
  if (member(spec, "phi")) {
    try {
      return immersion_from_json(spec);
    } catch (const std::exception& e) {
      bad("immersion", std::string("inline immersion is malformed: ") + e.what());
    }
  }
  const json* name = member(spec, "preset");
  if (!name || !name->is_string()) bad("immersion.preset", "expected plane, spinor-disc or catenoid-annulus");
  const std::string p = name->get<std::string>();
  if (p == "plane") {
    const double scale = number(spec, path, "scale", 1.0);
    positive(scale, path + "scale");
    const int n = integer(spec, path, "dim", 3);
    if (n < 3) bad(path + "dim", "must be at least 3");
    VectorLaurent phi(static_cast<std::size_t>(n));
    phi[0] = LaurentPoly::constant(scale);
    phi[1] = LaurentPoly::constant(-scale * kI);
    const RVec base = rvec(spec, path, "base", RVec::Zero(n));
    if (base.size() != n) bad(path + "base", "expected " + std::to_string(n) + " entries");
    return ImmersionDisc::disc(phi, base);
  }
  if (p == "spinor-disc") {
    VectorLaurent phi(3);
    phi[0] = LaurentPoly::constant(1.0);
    phi[1] = LaurentPoly::constant(kI);
    return ImmersionDisc::disc(phi, RVec::Zero(3));
  }
  if (p == "catenoid-annulus") {
    const double rho_in = number(spec, path, "rho_in", 0.2);
    open_unit(rho_in, path + "rho_in");
    VectorLaurent phi(3);
    phi[0] = LaurentPoly{-2, {0.5, 0.0, -0.5}};
    phi[1] = LaurentPoly{-2, {0.5 * kI, 0.0, 0.5 * kI}};
    phi[2] = LaurentPoly::monomial(-1);
    return ImmersionDisc::annulus(phi, RVec::Zero(3), rho_in);
  }
  bad("immersion.preset", "unknown preset '" + p + "'");
}

PipelineResult run_pipeline(const json& config, const PipelineOptions& opt) {
  if (!config.is_object()) bad("config", "expected a JSON object");
  const json* e = member(config, "experiment");
  if (!e || !e->is_string()) bad("experiment", "expected rh3, rhn, jordan or proper");
  const std::string experiment = e->get<std::string>();
  if (experiment != "rh3" && experiment != "rhn" && experiment != "jordan" && experiment != "proper")
    bad("experiment", "unknown experiment '" + experiment + "'");

  std::uint64_t seed = 0;
  if (const json* s = member(config, "seed")) {
    if (!s->is_number_unsigned()) bad("seed", "expected a nonnegative integer");
    seed = s->get<std::uint64_t>();
  }
  if (opt.seed) seed = *opt.seed;

  const json& mesh = object(config, "", "mesh");
  MeshSpec ms{integer(mesh, "mesh.", "rings", 32), integer(mesh, "mesh.", "angles", 128),
              number(mesh, "mesh.", "grading", 1.0)};
  if (ms.rings < 4) bad("mesh.rings", "must be at least 4");
  if (ms.angles < 16) bad("mesh.angles", "must be at least 16");
  if (!(ms.grading >= 1.0)) bad("mesh.grading", "must be at least 1");

  const json* imm_spec = member(config, "immersion");
  if (!imm_spec || !imm_spec->is_object()) bad("immersion", "expected an object with a preset or inline phi");
  const ImmersionDisc F = preset_immersion(*imm_spec);
  const json params = member(config, "params") ? config["params"] : json::object();
  if (!params.is_object()) bad("params", "expected an object");

  Run run;
  run.dir = opt.out_dir;
  run.log = opt.log;
  std::filesystem::create_directories(run.dir);

  json out;
  out["experiment"] = experiment;
  out["seed"] = seed;
  out["immersion"] = {{"spec", *imm_spec}, {"dim", F.dim()},
                      {"domain", F.domain == DomainKind::Disc ? "disc" : "annulus"}};
  out["mesh"] = {{"rings", ms.rings}, {"angles", ms.angles}, {"grading", ms.grading}};
  Report rep;
  if (experiment == "rh3" || experiment == "rhn") run_rh(experiment == "rh3", F, params, seed, ms, run, out, rep);
  else if (experiment == "jordan") run_jordan(F, params, ms, run, out, rep);
  else run_proper(F, params, ms, run, out, rep);

  out["checks"] = rep.checks;
  out["status"] = rep.first_failed.empty() ? "pass" : "fail";
  out["first_failed"] = rep.first_failed;
  {
    auto f = run.open("report.json");
    f << out.dump(2) << "\n";
  }
  {
    auto f = run.open("summary.txt");
    write_summary(f, out);
  }

  PipelineResult res;
  res.exit_code = rep.first_failed.empty() ? 0 : 1;
  res.first_failed = rep.first_failed;
  res.report = std::move(out);
  res.artifacts = run.artifacts;
  return res;
}

VerifyResult verify_report(const json& report) {
  VerifyResult v;
  auto fail = [&](const std::string& s) {
    v.ok = false;
    v.failures.push_back(s);
  };
  if (!report.is_object() || !report.contains("checks") || !report["checks"].is_array()) {
    fail("report has no checks array");
    return v;
  }
  std::string first;
  for (const auto& c : report["checks"]) {
    const std::string name = c.value("name", std::string("?"));
    bool pass = false;
    if (c.value("op", std::string()) == "ran") {
      pass = false;
    } else if (c["value"].is_number() && c["bound"].is_number()) {
      pass = compare(c["value"].get<double>(), c["op"].get<std::string>(), c["bound"].get<double>());
    }
    if (pass != c.value("pass", !pass)) fail(name + ": stored pass flag disagrees with the stored values");
    if (!pass) {
      fail(name + " does not hold");
      if (first.empty()) first = name;
    }
  }
  if (report.value("first_failed", std::string()) != first) fail("first_failed does not match the checks");

  if (report.contains("trace") && report["trace"].is_array() && report["trace"].size() > 1) {
    const auto& tr = report["trace"];
    const char* key = tr[0].contains("measured_dist") ? "measured_dist" : "dist";
    for (std::size_t i = 1; i < tr.size(); ++i)
      if (!(tr[i][key].get<double>() > tr[i - 1][key].get<double>()))
        fail("trace distance is not increasing at step " + std::to_string(i));
    if (tr[0].contains("d")) {
      for (std::size_t i = 1; i < tr.size(); ++i) {
        const double dd = tr[i]["d"].get<double>() - tr[i - 1]["d"].get<double>();
        if (std::abs(dd - tr[i]["eta"].get<double>()) > 1e-12) fail("trace d increment differs from eta at step " + std::to_string(i));
      }
    }
  }
  return v;
}

}  // namespace nullforge
