#pragma once

#include <array>
#include <iosfwd>

#include "nullforge/weierstrass.hpp"

namespace nullforge {

// Polar triangulation of the closed disc: vertex 0 is the center, ring k (1..n_r) has n_a vertices
// at radius radii[k-1] and angles 2 pi j / n_a. Quads between rings are cut along (k,j)-(k+1,j+1).
struct DiscMesh {
  int n_r = 0, n_a = 0;
  std::vector<double> radii;
  std::vector<cd> vertices;
  std::vector<std::array<int, 3>> triangles;
  std::vector<int> boundary;

  int vertex(int ring, int j) const { return ring == 0 ? 0 : 1 + (ring - 1) * n_a + ((j % n_a) + n_a) % n_a; }
  std::size_t edge_count() const;
};

// grading = 1 gives uniform rings; larger values crowd rings toward the boundary.
DiscMesh triangulate_disc(int n_r, int n_a, double grading = 1.0);

struct DistanceResult {
  double distance = 0.0;
  std::vector<int> path;  // vertex ids from p0 to the boundary
};

DistanceResult intrinsic_distance(const ImmersionDisc& imm, const DiscMesh& mesh, int p0 = 0);
// |d(n_r, n_a) - d(2 n_r, 2 n_a)| from the center, used as an error bar.
double refinement_delta(const ImmersionDisc& imm, int n_r, int n_a, double grading = 1.0);

double curve_length(const ImmersionDisc& imm, const std::vector<cd>& polyline, double rel_tol = 1e-6);
double path_length(const ImmersionDisc& imm, const DiscMesh& mesh, const std::vector<int>& path);

struct InjectivityGap {
  double gap = 0.0;
  int i = 0, j = 0;  // boundary sample indices realizing the gap
};
InjectivityGap boundary_injectivity_gap(const ImmersionDisc& imm, int n_samples = 512);

// F at every mesh vertex (rows follow vertex ids).
Eigen::MatrixXd image_vertices(const ImmersionDisc& imm, const DiscMesh& mesh);
void write_obj(std::ostream& os, const Eigen::MatrixXd& image, const DiscMesh& mesh);
void write_lambda_csv(std::ostream& os, const ImmersionDisc& imm, const DiscMesh& mesh);

}  // namespace nullforge
