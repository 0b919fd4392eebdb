#include <gtest/gtest.h>

#include <random>

#include "nullforge/errors.hpp"
#include "nullforge/nullquad.hpp"
#include "nullforge/weierstrass.hpp"

using namespace nullforge;

namespace {

const cd I{0.0, 1.0};

VectorLaurent plane_phi() {
  VectorLaurent p(3);
  p[0] = LaurentPoly::constant(1.0);
  p[1] = LaurentPoly::constant(I);
  return p;
}

VectorLaurent catenoid_phi() {
  VectorLaurent p(3);
  p[0] = LaurentPoly{-2, {0.5, 0.0, -0.5}};
  p[1] = LaurentPoly{-2, {0.5 * I, 0.0, 0.5 * I}};
  p[2] = LaurentPoly::monomial(-1);
  return p;
}

// phi = pi(h) for a random polynomial spinor h of the given degree.
VectorLaurent spinor_phi(std::mt19937& rng, int degree) {
  std::normal_distribution<double> g;
  LaurentPoly a, b;
  a.c.resize(degree + 1);
  b.c.resize(degree + 1);
  for (int j = 0; j <= degree; ++j) {
    a.c[j] = cd(g(rng), g(rng)) / double(j + 1);
    b.c[j] = cd(g(rng), g(rng)) / double(j + 1);
  }
  a.c[0] += 3.0;  // keep the spinor away from zero on the disc
  VectorLaurent p(3);
  p[0] = mul(a, a) - mul(b, b);
  p[1] = cd(2.0) * mul(a, b);
  p[2] = cd(-I) * (mul(a, a) + mul(b, b));
  return p;
}

// Independent oracle: composite Simpson rule of phi along a straight segment.
CVec segment_integral(const VectorLaurent& phi, cd a, cd b, int panels = 4000) {
  CVec s = CVec::Zero(static_cast<Eigen::Index>(phi.dim()));
  const cd h = (b - a) / double(panels);
  for (int k = 0; k <= panels; ++k) {
    const double w = (k == 0 || k == panels) ? 1.0 : (k % 2 ? 4.0 : 2.0);
    s += w * eval_poly(phi, a + double(k) * h);
  }
  return s * h / 3.0;
}

}  // namespace

TEST(Weierstrass, PlaneIntegration) {
  const auto imm = ImmersionDisc::disc(plane_phi(), RVec::Zero(3));
  EXPECT_LT((integrate_real_part(imm, 1.0) - RVec::Unit(3, 0)).norm(), 1e-15);
  RVec base(3);
  base << 0.5, -1.0, 2.0;
  EXPECT_EQ(integrate_real_part(ImmersionDisc::disc(plane_phi(), base), 0.0), base);
}

TEST(Weierstrass, DiscIntegrationMatchesQuadrature) {
  std::mt19937 rng(21);
  const auto imm = ImmersionDisc::disc(spinor_phi(rng, 5), RVec::Zero(3));
  for (cd z : {cd(0.3, 0.9), cd(-0.7, -0.1), cd(0.0, -1.0)}) {
    const RVec oracle = segment_integral(imm.phi, 0.0, z).real();
    EXPECT_LT((integrate_real_part(imm, z) - oracle).norm(), 1e-10 * (1.0 + oracle.norm()));
  }
}

TEST(Weierstrass, CircleEvaluationMatchesPointwise) {
  std::mt19937 rng(22);
  const auto disc = ImmersionDisc::disc(spinor_phi(rng, 4), RVec::Ones(3));
  const auto cat = ImmersionDisc::annulus(catenoid_phi(), RVec::Zero(3), 0.2);
  for (const auto* imm : {&disc, &cat}) {
    const Eigen::MatrixXd v = eval_immersion_circle(*imm, 0.7, 32, 0.1);
    for (int k = 0; k < 32; k += 5) {
      const cd z = std::polar(0.7, 0.1 + 2 * M_PI * k / 32);
      EXPECT_LT((v.row(k).transpose() - integrate_real_part(*imm, z)).norm(), 1e-12);
    }
  }
}

TEST(Weierstrass, CatenoidIsNullAndClosesUp) {
  const auto imm = ImmersionDisc::annulus(catenoid_phi(), RVec::Zero(3), 0.2);
  EXPECT_LT(hopf_residual(imm), 1e-15);
  // Real period by an independent trapezoid sum around the core circle.
  const int M = 1024;
  const double rho = 0.6;
  CVec s = CVec::Zero(3);
  for (int k = 0; k < M; ++k) {
    const cd z = std::polar(rho, 2 * M_PI * k / M);
    s += eval_poly(imm.phi, z) * I * z;
  }
  EXPECT_LT((s * (2 * M_PI / M)).real().norm(), 1e-9);
  EXPECT_LT(real_period(imm).norm(), 1e-15);
  EXPECT_TRUE(check_immersion(imm).ok());
  // Going all the way round returns to the start.
  const cd z0 = std::polar(rho, 0.3);
  EXPECT_LT((integrate_real_part(imm, z0) - integrate_real_part(imm, z0 * std::polar(1.0, 1e-13))).norm(), 1e-9);
}

TEST(Weierstrass, AnnulusIntegrationMatchesQuadrature) {
  const auto imm = ImmersionDisc::annulus(catenoid_phi(), RVec::Zero(3), 0.2);
  for (cd z : {cd(0.5, 0.5), cd(0.9, -0.3)}) {
    const RVec oracle = segment_integral(imm.phi, 1.0, z).real();
    EXPECT_LT((integrate_real_part(imm, z) - oracle).norm(), 1e-9);
  }
}

TEST(Weierstrass, NonExactAnnulusDataRejected) {
  VectorLaurent phi = catenoid_phi();
  phi[0] = phi[0] + LaurentPoly::monomial(-1, I);
  const auto imm = ImmersionDisc::annulus(phi, RVec::Zero(3), 0.2);
  EXPECT_THROW(integrate_real_part(imm, cd(0.5, 0.4)), PeriodError);
  EXPECT_GT(check_immersion(imm).period, 1.0);
}

TEST(Weierstrass, HopfResidualExamples) {
  EXPECT_EQ(hopf_residual(ImmersionDisc::disc(plane_phi(), RVec::Zero(3))), 0.0);
  VectorLaurent x(3);
  x[0] = LaurentPoly::constant(1.0);
  EXPECT_NEAR(hopf_residual(ImmersionDisc::disc(x, RVec::Zero(3))), 1.0, 1e-15);
  std::mt19937 rng(23);
  for (int t = 0; t < 10; ++t)
    EXPECT_LT(hopf_residual(ImmersionDisc::disc(spinor_phi(rng, 6), RVec::Zero(3))), 1e-12);
}

TEST(Weierstrass, FluxExamples) {
  std::mt19937 rng(24);
  const auto disc = ImmersionDisc::disc(spinor_phi(rng, 5), RVec::Zero(3));
  const auto fd = flux_loop(disc, 0.8, 512);
  EXPECT_LT(fd.value.norm(), 1e-12);
  EXPECT_LT(fd.residue.norm(), 1e-15);

  const auto cat = ImmersionDisc::annulus(catenoid_phi(), RVec::Zero(3), 0.2);
  const auto a = flux_loop(cat, 0.3, 512), b = flux_loop(cat, 0.8, 512);
  const RVec expected = 2 * M_PI * RVec::Unit(3, 2);
  EXPECT_LT((a.value - expected).norm(), 1e-12);
  EXPECT_LT((a.residue - expected).norm(), 1e-15);
  EXPECT_LT((a.value - b.value).norm(), 1e-10);
  EXPECT_LT((flux_loop(cat, 0.5, 512, 2).value - 2.0 * a.value).norm(), 1e-10);
  EXPECT_THROW(flux_loop(cat, 0.5, 128), PreconditionError);
}

TEST(Weierstrass, ConformalFactorMatchesFiniteDifferences) {
  const auto plane = ImmersionDisc::disc(plane_phi(), RVec::Zero(3));
  const double h = 1e-5;
  const cd z0(0.2, 0.1);
  const double fd_plane = (integrate_real_part(plane, z0 + h) - integrate_real_part(plane, z0)).norm() / h;
  EXPECT_NEAR(conformal_factor(plane, z0), fd_plane, 1e-9);
  EXPECT_NEAR(conformal_factor(plane, z0), 1.0, 1e-15);

  std::mt19937 rng(25);
  std::uniform_real_distribution<double> U(-0.7, 0.7);
  const auto imm = ImmersionDisc::disc(spinor_phi(rng, 4), RVec::Zero(3));
  for (int t = 0; t < 100; ++t) {
    const cd z(U(rng), U(rng));
    const double lam = conformal_factor(imm, z);
    const RVec f0 = integrate_real_part(imm, z);
    const double dx = (integrate_real_part(imm, z + h) - f0).norm() / h;
    const double dy = (integrate_real_part(imm, z + I * h) - f0).norm() / h;
    EXPECT_LE(std::abs(lam - dx), 1e-3 * lam);
    EXPECT_LE(std::abs(lam - dy), 1e-3 * lam);
  }
  VectorLaurent scaled = cd(2.5) * imm.phi;
  EXPECT_NEAR(conformal_factor(scaled, z0), 2.5 * conformal_factor(imm, z0), 1e-12);
}

TEST(Weierstrass, PhiRecoveredFromFiniteDifferences) {
  std::mt19937 rng(26);
  const auto imm = ImmersionDisc::disc(spinor_phi(rng, 4), RVec::Zero(3));
  const double h = 1e-5;
  double worst = 0.0;
  for (int k = 0; k < 40; ++k) {
    const cd z = std::polar(0.8, 2 * M_PI * k / 40);
    const RVec fx = (integrate_real_part(imm, z + h) - integrate_real_part(imm, z - h)) / (2 * h);
    const RVec fy = (integrate_real_part(imm, z + I * h) - integrate_real_part(imm, z - I * h)) / (2 * h);
    const CVec rec = fx.cast<cd>() - I * fy.cast<cd>();
    worst = std::max(worst, (rec - eval_poly(imm.phi, z)).norm());
  }
  EXPECT_LT(worst, 1e-4);
}

TEST(Weierstrass, ImmersionGate) {
  VectorLaurent p(3);
  p[0] = LaurentPoly::monomial(1);
  p[1] = LaurentPoly::monomial(1, I);
  const auto c = check_immersion(ImmersionDisc::disc(p, RVec::Zero(3)));
  EXPECT_EQ(c.min_norm_ratio, 0.0);
  EXPECT_FALSE(c.ok());
}

TEST(Weierstrass, NullDiscRealPart) {
  NullDisc g{plane_phi(), CVec::Zero(3)};
  g.base[2] = cd(1.0, 4.0);
  const auto f = g.real_part();
  const cd z(0.3, 0.4);
  EXPECT_LT((integrate_real_part(f, z) - g.eval(z).real()).norm(), 1e-15);
}

TEST(Weierstrass, JsonRoundTrip) {
  const auto imm = ImmersionDisc::annulus(catenoid_phi(), RVec::Ones(3), 0.25, cd(0.0, 1.0));
  const auto back = immersion_from_json(to_json(imm));
  EXPECT_EQ(back.domain, DomainKind::Annulus);
  EXPECT_EQ(back.rho_in, 0.25);
  EXPECT_EQ(back.base_point, cd(0.0, 1.0));
  EXPECT_EQ(back.base, imm.base);
  EXPECT_EQ(back.phi[2].c, imm.phi[2].c);
}
