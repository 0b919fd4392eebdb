#pragma once

#include <iosfwd>

#include "nullforge/errors.hpp"
#include "nullforge/geometry.hpp"
#include "nullforge/rhsolver.hpp"

namespace nullforge {

// Real boundary map T -> R^n held as a Laurent series whose real part on |zeta| = 1 is the map.
struct BoundaryMap {
  VectorLaurent fourier;

  static BoundaryMap from_samples(const Eigen::MatrixXd& samples);  // row k at e^{2 pi i k/m}
  static BoundaryMap from_immersion(const ImmersionDisc& F);        // exact F|T
  BoundaryMap translated(const RVec& v) const;

  std::size_t dim() const { return fourier.dim(); }
  RVec eval(cd zeta) const { return eval_poly(fourier, zeta).real(); }
  Eigen::MatrixXd sample(int m) const;
};

struct BoundaryTiling {
  int l = 0;
  std::vector<double> corners;  // t_0 < ... < t_{l-1}; arc j is [t_j, t_{j+1}] cyclically
  std::vector<cd> points;       // e^{i t_j}
  double eps0 = 0.0;
  double target_oscillation = 0.0;   // max over arcs of diam Y(arc)
  double surface_oscillation = 0.0;  // max over arcs of diam F(arc)
  double cross_deviation = 0.0;      // max over arcs of |F(p) - Y(q)|, p, q in one arc
};

// Greedy sweep with continuous arc ends; at least three arcs.
BoundaryTiling tile_boundary(const ImmersionDisc& F, const BoundaryMap& Y, double eps0, double delta,
                             int samples = 4096);

struct BoostSchedule {
  double d0 = 0.0, delta0 = 0.0, eps = 0.0, c = 0.0;
  std::vector<double> d, delta;  // index j = 0..steps

  static BoostSchedule make(double d0, double delta0, double eps, int steps);
  double eta(int j) const { return c / j; }
};

struct BoostConfig {
  double rh_eps = 0.01;
  double rho0 = 0.9;
  double eps0 = 0.5;
  double gain_floor = 0.5;
  bool enforce_gain = true;
  int boundary_samples = 4096;
  int mesh_rings = 32, mesh_angles = 128;
  double mesh_grading = 1.0;
  RhOptions rh;
};

struct BoostReport {
  double delta = 0.0, eta = 0.0;
  double bound_a = 0.0, sup_dev = 0.0;
  double d = 0.0, dist_before = 0.0, dist_after = 0.0, gain = 0.0;
  double flux_delta = 0.0;
  int arcs = 0;
  bool normal_fallback = false;
  int N = 0, c_index = 0;
  bool twisted = false;
  ConditionReport rh;
};

struct BoostResult {
  ImmersionDisc F;
  VectorLaurent lift;  // spinor lift of the new derivative
  BoostReport report;
};

// Null direction a = e_a - i e_b with (e_a, e_b) orthonormal and orthogonal to w, phase taken from the
// tangent null vector phi. orientation = +1 or -1 selects which of the two null lines is used.
CVec push_direction(const CVec& phi, const RVec& w, int orientation);

// p0 is snapped to the nearest vertex of the measuring mesh.
BoostResult boost_step(const ImmersionDisc& F, const BoundaryMap& Y, double delta, double eta, cd p0, double d,
                       const BoostConfig& cfg = {}, const std::optional<VectorLaurent>& lift = std::nullopt);

struct JordanConfig {
  double lambda = 0.0;
  double eps = 0.2;
  double delta0 = -1.0;  // negative: eps / 2
  int max_steps = 8;
  cd p0 = 0.0;
  BoostConfig boost;
};

struct JordanStep {
  int j = 0;
  double eta = 0.0, d = 0.0, delta = 0.0;
  double measured_dist = 0.0, sup_dev = 0.0;
  int N = 0;
};

struct JordanResult {
  ImmersionDisc G;
  std::vector<JordanStep> trace;  // row 0 is the starting surface
  BoostSchedule schedule;
};

struct JordanBudgetExhausted : BudgetExhausted {
  JordanBudgetExhausted(const std::string& what, double best, std::vector<JordanStep> t)
      : BudgetExhausted(what, best), trace(std::move(t)) {}
  std::vector<JordanStep> trace;
};

JordanResult jordan_iterate(const ImmersionDisc& G, const JordanConfig& cfg);

void write_trace_csv(std::ostream& os, const std::vector<JordanStep>& trace);

}  // namespace nullforge
