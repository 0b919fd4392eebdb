#include <gtest/gtest.h>

#include <random>
#include <set>
#include <sstream>

#include "nullforge/errors.hpp"
#include "nullforge/geometry.hpp"

using namespace nullforge;

namespace {

const cd I{0.0, 1.0};

ImmersionDisc plane(double s) {
  VectorLaurent p(3);
  p[0] = LaurentPoly::constant(s);
  p[1] = LaurentPoly::constant(s * I);
  return ImmersionDisc::disc(p, RVec::Zero(3));
}

ImmersionDisc spinor_disc() {
  const LaurentPoly a{0, {1.0, 0.2, cd(0.0, 0.1)}}, b{0, {0.1, cd(0.3, -0.1)}};
  VectorLaurent p(3);
  p[0] = mul(a, a) - mul(b, b);
  p[1] = cd(2.0) * mul(a, b);
  p[2] = cd(-I) * (mul(a, a) + mul(b, b));
  return ImmersionDisc::disc(p, RVec::Zero(3));
}

double tri_area(const DiscMesh& m, const std::array<int, 3>& t) {
  const cd a = m.vertices[t[0]], b = m.vertices[t[1]], c = m.vertices[t[2]];
  return 0.5 * std::imag(std::conj(b - a) * (c - a));
}

}  // namespace

TEST(Geometry, MeshCountsAndTopology) {
  const auto m = triangulate_disc(4, 16);
  EXPECT_EQ(m.vertices.size(), 65u);
  EXPECT_EQ(m.boundary.size(), 16u);
  std::set<std::pair<int, int>> edges;
  for (const auto& t : m.triangles)
    for (int e = 0; e < 3; ++e) edges.insert(std::minmax(t[e], t[(e + 1) % 3]));
  EXPECT_EQ(edges.size(), m.edge_count());
  const long euler = long(m.vertices.size()) - long(edges.size()) + long(m.triangles.size());
  EXPECT_EQ(euler, 1);
  for (const auto& t : m.triangles) EXPECT_GT(tri_area(m, t), 1e-12);
  for (cd z : m.vertices) EXPECT_LE(std::abs(z), 1.0);
  EXPECT_THROW(triangulate_disc(3, 16), PreconditionError);
}

TEST(Geometry, AngularDoublingHalvesRingEdges) {
  auto max_ring_edge = [](const DiscMesh& m) {
    double e = 0.0;
    for (int j = 0; j < m.n_a; ++j)
      e = std::max(e, std::abs(m.vertices[m.vertex(m.n_r, j + 1)] - m.vertices[m.vertex(m.n_r, j)]));
    return e;
  };
  const double a = max_ring_edge(triangulate_disc(8, 32)), b = max_ring_edge(triangulate_disc(8, 64));
  EXPECT_NEAR(b / a, 0.5, 0.01);
}

TEST(Geometry, FlatDistanceAndScaling) {
  for (double s : {1.0, 2.5}) {
    const auto r = intrinsic_distance(plane(s), triangulate_disc(8, 32));
    EXPECT_GE(r.distance, s - 1e-12);
    EXPECT_NEAR(r.distance, s, 1e-12);
  }
  const auto mesh = triangulate_disc(8, 32, 2.0);
  const double d1 = intrinsic_distance(spinor_disc(), mesh).distance;
  ImmersionDisc scaled = spinor_disc();
  scaled.phi = cd(3.0) * scaled.phi;
  EXPECT_NEAR(intrinsic_distance(scaled, mesh).distance, 3.0 * d1, 1e-12 * d1);
}

TEST(Geometry, SourceNextToBoundary) {
  const auto imm = spinor_disc();
  const auto mesh = triangulate_disc(8, 32);
  const int p0 = mesh.vertex(7, 5);
  const double lam_max = 1.3 * 1.3 * std::sqrt(2.0) * 1.1;  // generous bound on |phi| / sqrt 2 for this spinor disc
  const auto r = intrinsic_distance(imm, mesh, p0);
  EXPECT_LE(r.distance, lam_max * (1.0 - mesh.radii[6]));
  EXPECT_EQ(r.path.front(), p0);
  EXPECT_THROW(intrinsic_distance(imm, mesh, mesh.boundary[0]), PreconditionError);
}

TEST(Geometry, ExtrinsicBoundsIntrinsic) {
  const auto imm = spinor_disc();
  const auto r = intrinsic_distance(imm, triangulate_disc(16, 64));
  const Eigen::MatrixXd bd = eval_immersion_circle(imm, 1.0, 4096);
  const RVec f0 = integrate_real_part(imm, 0.0);
  double chord = INFINITY;
  for (Eigen::Index k = 0; k < bd.rows(); ++k) chord = std::min(chord, (bd.row(k).transpose() - f0).norm());
  EXPECT_LE(chord, r.distance);
}

TEST(Geometry, WitnessPathMatchesCurveLength) {
  const auto imm = plane(1.7);
  const auto mesh = triangulate_disc(8, 32);
  const auto r = intrinsic_distance(imm, mesh, mesh.vertex(2, 3));
  EXPECT_NEAR(path_length(imm, mesh, r.path), r.distance, 1e-10);
}

TEST(Geometry, CurveLengthExamples) {
  const auto imm = plane(1.5);
  EXPECT_EQ(curve_length(imm, {cd(0.2, 0.1), cd(0.2, 0.1)}), 0.0);
  EXPECT_NEAR(curve_length(imm, {-1.0, 1.0}), 2.0 * 1.5, 1e-4);
  const auto curved = spinor_disc();
  const std::vector<cd> g1{0.0, cd(0.3, 0.4)}, g2{cd(0.3, 0.4), cd(-0.5, 0.6)}, g12{0.0, cd(0.3, 0.4), cd(-0.5, 0.6)};
  EXPECT_NEAR(curve_length(curved, g12), curve_length(curved, g1) + curve_length(curved, g2), 1e-12);
}

TEST(Geometry, InjectivityGapOfCircle) {
  const int n = 512;
  const double s = 1.3;
  const auto gap = boundary_injectivity_gap(plane(s), n);
  const double theta = 2 * M_PI * (n / 32 + 1) / n;
  EXPECT_NEAR(gap.gap, 2 * s * std::sin(theta / 2), 1e-12);
  ImmersionDisc big = plane(s);
  big.phi = cd(2.0) * big.phi;
  EXPECT_NEAR(boundary_injectivity_gap(big, n).gap, 2.0 * gap.gap, 1e-12);
}

TEST(Geometry, InjectivityGapOfFigureEight) {
  // Boundary image (cos t, sin 2t, 0) crosses itself at the origin.
  VectorLaurent p(3);
  p[0] = LaurentPoly::constant(1.0);
  p[1] = LaurentPoly::monomial(1, -2.0 * I);
  const auto gap = boundary_injectivity_gap(ImmersionDisc::disc(p, RVec::Zero(3)), 512);
  EXPECT_LT(gap.gap, 1e-12);
  EXPECT_EQ(gap.j - gap.i, 256);
}

TEST(Geometry, ObjExport) {
  const auto imm = spinor_disc();
  const auto mesh = triangulate_disc(4, 16);
  const auto img = image_vertices(imm, mesh);
  for (std::size_t v = 0; v < mesh.vertices.size(); v += 7)
    EXPECT_LT((img.row(v).transpose() - integrate_real_part(imm, mesh.vertices[v])).norm(), 1e-12);
  std::ostringstream os;
  write_obj(os, img, mesh);
  std::istringstream is(os.str());
  std::string line;
  std::size_t nv = 0, nf = 0;
  while (std::getline(is, line)) {
    nv += line.rfind("v ", 0) == 0;
    nf += line.rfind("f ", 0) == 0;
  }
  EXPECT_EQ(nv, mesh.vertices.size());
  EXPECT_EQ(nf, mesh.triangles.size());
}
