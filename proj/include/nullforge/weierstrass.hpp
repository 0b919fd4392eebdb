#pragma once

#include "nullforge/series.hpp"

namespace nullforge {

enum class DomainKind { Disc, Annulus };

// Conformal minimal immersion F stored as phi = dF/dzeta and a base value.
// On the disc the base is F(0); on the annulus it is F(base_point).
struct ImmersionDisc {
  VectorLaurent phi;
  RVec base;
  DomainKind domain = DomainKind::Disc;
  double rho_in = 0.0;
  cd base_point = 0.0;

  std::size_t dim() const { return phi.dim(); }
  static ImmersionDisc disc(VectorLaurent phi, RVec base);
  static ImmersionDisc annulus(VectorLaurent phi, RVec base, double rho_in, cd base_point = 1.0);
};

// Holomorphic null disc in C^n: G(z) = base + integral_0^z phi.
struct NullDisc {
  VectorLaurent phi;
  CVec base;

  std::size_t dim() const { return phi.dim(); }
  CVec eval(cd z) const;
  VectorLaurent primitive() const;  // G - G(0)
  ImmersionDisc real_part() const;
};

RVec integrate_real_part(const ImmersionDisc& imm, cd z);
inline RVec eval_immersion(const ImmersionDisc& imm, cd z) { return integrate_real_part(imm, z); }
// Rows are samples rho e^{i(theta0 + 2 pi k / M)}, columns are coordinates.
Eigen::MatrixXd eval_immersion_circle(const ImmersionDisc& imm, double rho, int M, double theta0 = 0.0);

double hopf_residual(const ImmersionDisc& imm, int grid = 256);
// Real period of phi around the origin, Re(2 pi i c_{-1}).
RVec real_period(const ImmersionDisc& imm);

struct ImmersionCheck {
  double hopf = 0.0;
  double min_norm_ratio = 0.0;  // min ||phi|| / sup ||phi||
  double period = 0.0;
  bool ok() const { return hopf <= 1e-8 && min_norm_ratio >= 1e-6 && period <= 1e-10; }
};
ImmersionCheck check_immersion(const ImmersionDisc& imm, int grid = 256);

struct FluxVector {
  RVec value;    // trapezoidal contour integral
  RVec residue;  // 2 pi Re(c_{-1}) per component
};
FluxVector flux_loop(const ImmersionDisc& imm, double loop_radius, int quad_points = 512, int windings = 1);

// ds = lambda |dz|.
double conformal_factor(const ImmersionDisc& imm, cd z);
inline double conformal_factor(const VectorLaurent& phi, cd z) { return eval_poly(phi, z).norm() / std::sqrt(2.0); }

nlohmann::json to_json(const ImmersionDisc& imm);
ImmersionDisc immersion_from_json(const nlohmann::json& j);

}  // namespace nullforge
