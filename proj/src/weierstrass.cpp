#include "nullforge/weierstrass.hpp"

#include <cmath>

#include "nullforge/errors.hpp"

namespace nullforge {

namespace {

constexpr double kTwoPi = 2.0 * M_PI;

// phi = rest + c_{-1} / z, with rest free of the residue term.
struct SplitPhi {
  VectorLaurent rest;
  CVec residue;
};

SplitPhi split_residue(const VectorLaurent& phi) {
  SplitPhi s{phi, CVec::Zero(static_cast<Eigen::Index>(phi.dim()))};
  for (std::size_t i = 0; i < phi.dim(); ++i) {
    const cd r = phi[i].coeff(-1);
    if (r == 0.0) continue;
    s.residue[static_cast<Eigen::Index>(i)] = r;
    s.rest[i] = (phi[i] - LaurentPoly::monomial(-1, r)).trimmed();
  }
  return s;
}

VectorLaurent primitive_of(const VectorLaurent& p) { return antiderivative_from_zero(p, 0.0).poly; }

std::vector<double> sample_radii(const ImmersionDisc& imm, int count) {
  std::vector<double> r;
  const double lo = imm.domain == DomainKind::Disc ? 0.0 : imm.rho_in;
  for (int k = 0; k <= count; ++k) r.push_back(lo + (1.0 - lo) * k / count);
  return r;
}

}  // namespace

ImmersionDisc ImmersionDisc::disc(VectorLaurent phi, RVec base) {
  if (static_cast<Eigen::Index>(phi.dim()) != base.size()) throw DimensionError("phi and base dimensions differ");
  ImmersionDisc d;
  d.phi = std::move(phi);
  d.base = std::move(base);
  return d;
}

ImmersionDisc ImmersionDisc::annulus(VectorLaurent phi, RVec base, double rho_in, cd base_point) {
  if (!(rho_in > 0.0 && rho_in < 1.0)) throw PreconditionError("annulus inner radius must lie in (0,1)");
  ImmersionDisc d = disc(std::move(phi), std::move(base));
  d.domain = DomainKind::Annulus;
  d.rho_in = rho_in;
  d.base_point = base_point;
  return d;
}

CVec NullDisc::eval(cd z) const { return base + eval_poly(primitive(), z); }

VectorLaurent NullDisc::primitive() const {
  const auto q = antiderivative_from_zero(phi);
  if (q.base_point_excluded) throw DomainError("null disc data has a pole at the origin");
  return q.poly;
}

ImmersionDisc NullDisc::real_part() const { return ImmersionDisc::disc(phi, base.real()); }

RVec integrate_real_part(const ImmersionDisc& imm, cd z) {
  if (imm.domain == DomainKind::Disc) {
    if (z == 0.0) return imm.base;
    const auto q = antiderivative_from_zero(imm.phi);
    if (q.base_point_excluded) throw DomainError("disc data has a pole at the origin");
    return imm.base + eval_poly(q.poly, z).real();
  }
  if (z == 0.0) throw DomainError("the annulus excludes the origin");
  if (z == imm.base_point) return imm.base;
  const auto s = split_residue(imm.phi);
  const auto q = primitive_of(s.rest);
  const CVec poly_part = eval_poly(q, z) - eval_poly(q, imm.base_point);
  const double dlog = std::log(std::abs(z) / std::abs(imm.base_point));
  // Radial then circular path, once the short way and once the long way round.
  const double turn = std::arg(z / imm.base_point);
  const double other = turn > 0.0 ? turn - kTwoPi : turn + kTwoPi;
  const RVec f1 = imm.base + (poly_part + s.residue * cd(dlog, turn)).real();
  const RVec f2 = imm.base + (poly_part + s.residue * cd(dlog, other)).real();
  if ((f1 - f2).norm() > 1e-9 * (1.0 + f1.norm()))
    throw PeriodError("real part of phi is not exact on the annulus");
  return f1;
}

Eigen::MatrixXd eval_immersion_circle(const ImmersionDisc& imm, double rho, int M, double theta0) {
  if (imm.domain == DomainKind::Disc) {
    const auto q = antiderivative_from_zero(imm.phi);
    if (q.base_point_excluded) throw DomainError("disc data has a pole at the origin");
    Eigen::MatrixXd out = eval_circle(q.poly, rho, M, theta0).real();
    out.rowwise() += imm.base.transpose();
    return out;
  }
  const auto s = split_residue(imm.phi);
  const auto q = primitive_of(s.rest);
  const CVec q0 = eval_poly(q, imm.base_point);
  Eigen::MatrixXcd vals = eval_circle(q, rho, M, theta0);
  const double dlog = std::log(rho / std::abs(imm.base_point));
  for (int k = 0; k < M; ++k) {
    const double th = std::remainder(theta0 + kTwoPi * k / M - std::arg(imm.base_point), kTwoPi);
    vals.row(k) += (s.residue * cd(dlog, th) - q0).transpose();
  }
  Eigen::MatrixXd out = vals.real();
  out.rowwise() += imm.base.transpose();
  return out;
}

double hopf_residual(const ImmersionDisc& imm, int grid) {
  double worst = 0.0, sup = 0.0;
  for (double r : sample_radii(imm, 8)) {
    const Eigen::MatrixXcd v = eval_circle(imm.phi, r, grid);
    for (Eigen::Index k = 0; k < v.rows(); ++k) {
      worst = std::max(worst, std::abs((v.row(k).array() * v.row(k).array()).sum()));
      sup = std::max(sup, v.row(k).squaredNorm());
    }
  }
  return sup > 0.0 ? worst / sup : 0.0;
}

RVec real_period(const ImmersionDisc& imm) {
  return (cd(0.0, kTwoPi) * split_residue(imm.phi).residue).real();
}

ImmersionCheck check_immersion(const ImmersionDisc& imm, int grid) {
  ImmersionCheck c;
  c.hopf = hopf_residual(imm, grid);
  double lo = INFINITY, hi = 0.0;
  for (double r : sample_radii(imm, 8)) {
    const Eigen::MatrixXcd v = eval_circle(imm.phi, r, grid);
    for (Eigen::Index k = 0; k < v.rows(); ++k) {
      lo = std::min(lo, v.row(k).norm());
      hi = std::max(hi, v.row(k).norm());
    }
  }
  c.min_norm_ratio = hi > 0.0 ? lo / hi : 0.0;
  c.period = imm.domain == DomainKind::Annulus ? real_period(imm).norm() : 0.0;
  return c;
}

FluxVector flux_loop(const ImmersionDisc& imm, double loop_radius, int quad_points, int windings) {
  if (quad_points < 256) throw PreconditionError("flux quadrature needs at least 256 points");
  const int total = quad_points * windings;
  CVec sum = CVec::Zero(static_cast<Eigen::Index>(imm.dim()));
  for (int k = 0; k < total; ++k) {
    const cd z = std::polar(loop_radius, kTwoPi * k / quad_points);
    sum += eval_poly(imm.phi, z) * (cd(0.0, 1.0) * z);
  }
  FluxVector f;
  f.value = (sum * (kTwoPi / quad_points)).imag();
  f.residue = windings * kTwoPi * split_residue(imm.phi).residue.real();
  return f;
}

double conformal_factor(const ImmersionDisc& imm, cd z) { return conformal_factor(imm.phi, z); }

nlohmann::json to_json(const ImmersionDisc& imm) {
  nlohmann::json j;
  j["phi"] = to_json(imm.phi);
  j["base"] = std::vector<double>(imm.base.data(), imm.base.data() + imm.base.size());
  j["domain"] = imm.domain == DomainKind::Disc ? "disc" : "annulus";
  if (imm.domain == DomainKind::Annulus) {
    j["rho_in"] = imm.rho_in;
    j["base_point"] = {imm.base_point.real(), imm.base_point.imag()};
  }
  return j;
}

ImmersionDisc immersion_from_json(const nlohmann::json& j) {
  const auto phi = vector_laurent_from_json(j.at("phi"));
  const auto b = j.at("base").get<std::vector<double>>();
  const RVec base = Eigen::Map<const RVec>(b.data(), static_cast<Eigen::Index>(b.size()));
  if (j.value("domain", std::string("disc")) == "annulus") {
    const auto bp = j.at("base_point").get<std::vector<double>>();
    return ImmersionDisc::annulus(phi, base, j.at("rho_in").get<double>(), cd(bp.at(0), bp.at(1)));
  }
  return ImmersionDisc::disc(phi, base);
}

}  // namespace nullforge
