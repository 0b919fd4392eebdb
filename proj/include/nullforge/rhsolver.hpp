#pragma once

#include <functional>
#include <optional>

#include "nullforge/nullquad.hpp"
#include "nullforge/weierstrass.hpp"

namespace nullforge {

enum class RhMode { Spinor3, ConstantDirection };

// Size function on the unit circle.
using SizeFn = std::function<double(cd zeta)>;

// r = rmax * b(x)^2 with b(x) = exp(1 - 1/(1 - x^2)), x = (arg zeta - center) / half_width; zero for |x| >= 1.
SizeFn smooth_bump(double center, double half_width, double rmax);

// U = {|arg zeta - center| <= half_width, |zeta| >= rho_min}.
struct Neighborhood {
  double center = 0.0, half_width = M_PI, rho_min = 0.0;
  bool contains(cd z) const;
};

// sigma(zeta, xi) = sum_k taylor(zeta)(k, :) xi^k with row 0 zero. In ConstantDirection mode the family
// is scalar (one column) and the attached discs are r sigma u.
struct DiscFamily {
  TaylorFn taylor;
  bool linear = false;  // sigma = xi * taylor(zeta)(1, :)
};

struct RhProblem {
  RhMode mode = RhMode::Spinor3;
  NullDisc F;
  std::optional<VectorLaurent> lift;  // spinor lift of F' when already known
  SizeFn r;
  DiscFamily sigma;
  CVec u, v;  // ConstantDirection frame legs
  double eps = 0.05;
  double rho0 = 0.9;
  std::optional<Neighborhood> U;
  bool real_form = false;  // measure distances between real parts
};

struct RhOptions {
  RationalizeOptions rat{1e-8, 64, 512};
  int n_start = 8;
  int n_cap = 1 << 15;
  int c_grid = 64;
  int radii = 64;
  int boundary_min = 512;
  int xi_samples = 128;
  int xi_degree = 24;  // truncation of nonlinear disc lifts
  int track_samples = 4096;
  double fd_step = 1e-4;
  double gate = 1e-6;
  bool allow_twist = true;
};

struct RhWorkspace {
  RhMode mode = RhMode::Spinor3;
  std::vector<VectorLaurent> B;  // eta ~ sum_j B[j] xi^j; two components (Spinor3) or one
  double rational_error = 0.0;
  VectorLaurent h;      // lift of F'
  VectorLaurent cross;  // ConstantDirection only
  NullDisc F;
  CVec u;
  int N0 = 0;
  bool twisted = false;
  int winding = 0;
};

RhWorkspace prepare_rh(const RhProblem& p, const RhOptions& opt = {});

struct Candidate {
  NullDisc G;
  VectorLaurent h;  // h_N
};
// Throws PreconditionError when N < N0 (the primitive would need the excluded base point).
Candidate assemble_candidate(const RhWorkspace& ws, int N, cd c);

struct ConditionReport {
  double s1 = 0.0, s2 = 0.0, s3 = 0.0;
  double rho_prime = 0.0;
  bool pass(double eps) const { return s1 < eps && s2 < eps && s3 < eps; }
};

// rho_prime < 0 selects the smallest radius on the grid over [rho0, 1) that makes condition ii) pass.
ConditionReport verify_rh_conditions(const NullDisc& G, const RhProblem& p, double rho_prime = -1.0,
                                     const RhOptions& opt = {});
double boundary_condition(const NullDisc& G, const RhProblem& p, const RhOptions& opt = {});

struct DiagRow {
  int N = 0, c_index = 0;
  double s1 = 0.0, s2 = -1.0, s3 = -1.0, rho_prime = -1.0;
  double wall_ms = 0.0;
};

struct RhSolution {
  NullDisc G;
  VectorLaurent h;
  double rho_prime = 0.0;
  int N = 0, c_index = 0;
  cd c;
  ConditionReport report;
  double rational_error = 0.0;
  int N0 = 0;
  bool twisted = false;
  int winding = 0;
  std::vector<DiagRow> diagnostics;
};

RhSolution solve_rh3(const RhProblem& p, const RhOptions& opt = {});
RhSolution solve_rhn(const RhProblem& p, const RhOptions& opt = {});

struct AverageSelection {
  int index = 0;
  bool passed = false;
  double double_average = 0.0;
  std::vector<double> single_averages;
};
// Arc I = [t0, t1] in angle.
AverageSelection select_c_by_average(const std::vector<NullDisc>& candidates, const RhProblem& p,
                                     const std::function<double(const CVec&)>& phi, double t0, double t1,
                                     double eps, int samples = 256);

// Shift-error estimate for mu(zeta, xi) = sum_k A[k-1](zeta) xi^k: the smallest N making every A_k zeta^N
// vanish at 0, and the sup over a grid of |z| = 1 and |c| = 1 of the integration error.
int lemma_n0(const std::vector<VectorLaurent>& A);
double lemma_error(const std::vector<VectorLaurent>& A, int N, int grid = 64);

void write_diagnostics_csv(std::ostream& os, const std::vector<DiagRow>& rows, bool with_time = false);
nlohmann::json to_json(const RhSolution& s);

}  // namespace nullforge
