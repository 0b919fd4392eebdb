#pragma once

#include <iosfwd>

#include "nullforge/boost.hpp"

namespace nullforge {

struct ConvexDomain {
  enum class Kind { Ball, Ellipsoid };
  Kind kind = Kind::Ball;
  RVec center;
  double radius = 1.0;  // ball
  RVec axes;            // ellipsoid semi-axes
  double offset = 0.0;  // ellipsoid: the domain is {depth from the ellipsoid > offset}
  double kappa_min = 1.0, kappa_max = 1.0;

  static ConvexDomain ball(const RVec& center, double radius);
  static ConvexDomain ellipsoid(const RVec& center, const RVec& axes);

  std::size_t dim() const { return static_cast<std::size_t>(center.size()); }
  double depth(const RVec& x) const;  // signed distance to the boundary, positive inside
  RVec inner_normal(const RVec& x) const;  // at the nearest boundary point
};

// Boundary {p + t nu(p)} with nu the inner normal; t < 0 grows the domain.
ConvexDomain parallel_domain(const ConvexDomain& D, double t);

struct ShellSchedule {
  std::vector<double> delta;  // delta[j - 1] = delta_j
  double kappa_min = 1.0;
  double budget = 0.0;

  static ShellSchedule make(std::vector<double> delta, double kappa_min, double budget);
  static ShellSchedule geometric(double delta1, double ratio, int steps, double kappa_min, double budget);

  int steps() const { return static_cast<int>(delta.size()); }
  double drift_bound(int j) const;  // sqrt(2 delta_j^2 + 2 delta_j / kappa_min)
  double total() const;
};

struct PushConfig {
  double tol_fraction = 0.45;  // RH tolerance as a fraction of delta
  double rho0 = 0.9;
  double rho_K = 0.5;  // K is the closed disc of this radius
  int phase_degree = 16;
  int samples = 4096;
  int rings = 16;
  RhOptions rh;
};

struct PushReport {
  double eta = 0.0, delta = 0.0, rh_eps = 0.0;
  double bound = 0.0, sup_dev = 0.0;
  double min_gap = 0.0, max_gap = 0.0;  // depth in D of F(T)
  double min_depth = 0.0;               // over sampled points of the closed disc
  double max_depth_L = 0.0;             // over sampled points outside K; negative means outside L
  double flux_delta = 0.0;
  int N = 0, c_index = 0;
  bool twisted = false;
  ConditionReport rh;

  bool landed() const { return min_gap > 0.0 && max_gap < delta; }
};

struct PushResult {
  ImmersionDisc F;
  VectorLaurent lift;
  PushReport report;
};

// L and D concentric balls with D inside the eta-enlargement of L.
PushResult push_step(const ImmersionDisc& F, const ConvexDomain& L, const ConvexDomain& D, double eta, double delta,
                     const PushConfig& cfg = {}, const std::optional<VectorLaurent>& lift = std::nullopt);

struct ProperConfig {
  cd p0 = 0.0;
  double boost_eta = 0.002;  // boost size at step j is boost_eta / j
  double boost_tol = 0.5;    // boost RH tolerance as a fraction of its size
  double l_margin = 1e-3;    // L sits this far inside the image of the closed annulus outside K
  PushConfig push;
  BoostConfig boost;
  ProperConfig() { boost.enforce_gain = false; }
};

struct ProperStep {
  int j = 0;
  double delta = 0.0, eta = 0.0, boost_eta = 0.0;
  double min_gap = 0.0, max_gap = 0.0;
  double dist = 0.0;
  double drift = 0.0, bound = 0.0, total_drift = 0.0;
  int N_boost = 0, N_push = 0;
};

struct ProperResult {
  ImmersionDisc G;
  std::vector<ProperStep> trace;  // row 0 is the starting surface
};

struct ProperBudgetExhausted : BudgetExhausted {
  ProperBudgetExhausted(const std::string& what, double best, std::vector<ProperStep> t)
      : BudgetExhausted(what, best), trace(std::move(t)) {}
  std::vector<ProperStep> trace;
};

// Each step boosts the intrinsic distance, then pushes F(T) into the shell D minus D_{delta_j}.
ProperResult proper_iterate(const ImmersionDisc& F, const ConvexDomain& D, const ShellSchedule& schedule,
                            const ProperConfig& cfg = {});

void write_proper_trace_csv(std::ostream& os, const std::vector<ProperStep>& trace);

}  // namespace nullforge
