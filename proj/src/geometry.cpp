#include "nullforge/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <queue>

#include "nullforge/errors.hpp"

namespace nullforge {

namespace {

constexpr double kTwoPi = 2.0 * M_PI;

void require_disc(const ImmersionDisc& imm) {
  if (imm.domain != DomainKind::Disc) throw PreconditionError("mesh geometry is defined on the disc only");
}

// Largest degree whose coefficients still matter at radius rho (relative 1e-14).
class DegreeProfile {
 public:
  explicit DegreeProfile(const VectorLaurent& phi) {
    for (const auto& c : phi.comp)
      for (int j = std::max(0, c.jmin); j <= c.jmax(); ++j) {
        if (j >= static_cast<int>(amp_.size())) amp_.resize(j + 1, 0.0);
        amp_[j] = std::max(amp_[j], std::abs(c.coeff(j)));
      }
  }
  int at(double rho) const {
    if (amp_.empty() || rho <= 0.0) return 0;
    const double lr = std::log(rho);
    double top = -INFINITY;
    std::vector<double> lt(amp_.size(), -INFINITY);
    for (std::size_t j = 0; j < amp_.size(); ++j)
      if (amp_[j] > 0.0) top = std::max(top, lt[j] = std::log(amp_[j]) + double(j) * lr);
    int d = 0;
    for (std::size_t j = 0; j < amp_.size(); ++j)
      if (lt[j] >= top + std::log(1e-14)) d = static_cast<int>(j);
    return d;
  }

 private:
  std::vector<double> amp_;
};

// Image lengths of the n rotated copies e^{2 pi i j/n} [a, b] of one segment, by composite 4-point
// Gauss-Legendre with the piece count set by the effective degree.
std::vector<double> segment_lengths(const ImmersionDisc& imm, const DegreeProfile& prof, int n, cd a, cd b,
                                    bool coarse = false) {
  static const double gx[4] = {-0.8611363115940526, -0.3399810435848563, 0.3399810435848563, 0.8611363115940526};
  static const double gw[4] = {0.3478548451374538, 0.6521451548625461, 0.6521451548625461, 0.3478548451374538};
  const double len = std::abs(b - a);
  const int pieces = coarse ? 1 : 1 + static_cast<int>(std::ceil(prof.at(std::max(std::abs(a), std::abs(b))) * len));
  std::vector<double> out(n, 0.0);
  for (int p = 0; p < pieces; ++p)
    for (int q = 0; q < 4; ++q) {
      const double s = (p + 0.5 * (1.0 + gx[q])) / pieces;
      const cd w = a + s * (b - a);
      const Eigen::MatrixXcd v = eval_circle(imm.phi, std::abs(w), n, std::arg(w));
      const double wt = 0.5 * gw[q] * len / pieces / std::sqrt(2.0);
      for (int j = 0; j < n; ++j) out[j] += wt * v.row(j).norm();
    }
  return out;
}

struct Edge {
  int to;
  double w;
};

using Graph = std::vector<std::vector<Edge>>;

Graph weighted_graph(const ImmersionDisc& imm, const DiscMesh& m) {
  require_disc(imm);
  const DegreeProfile prof(imm.phi);
  Graph g(m.vertices.size());
  auto add = [&](int a, int b, double w) {
    g[a].push_back({b, w});
    g[b].push_back({a, w});
  };
  const int n = m.n_a;
  const cd step = std::polar(1.0, kTwoPi / n);
  {
    const auto len = segment_lengths(imm, prof, n, 0.0, m.radii[0]);
    for (int j = 0; j < n; ++j) add(0, m.vertex(1, j), len[j]);
  }
  for (int k = 1; k <= m.n_r; ++k) {
    // Shortest paths stop at the first boundary vertex, so boundary ring edges only need a rough weight.
    const double r = m.radii[k - 1];
    const auto len = segment_lengths(imm, prof, n, r, r * step, k == m.n_r);
    for (int j = 0; j < n; ++j) add(m.vertex(k, j), m.vertex(k, j + 1), len[j]);
  }
  for (int k = 1; k < m.n_r; ++k) {
    const double r = m.radii[k - 1], R = m.radii[k];
    const auto radial = segment_lengths(imm, prof, n, r, R);
    const auto diag = segment_lengths(imm, prof, n, r, R * step);
    for (int j = 0; j < n; ++j) {
      add(m.vertex(k, j), m.vertex(k + 1, j), radial[j]);
      add(m.vertex(k, j), m.vertex(k + 1, j + 1), diag[j]);
    }
  }
  return g;
}

// F(z) with the primitive computed once.
struct PointEvaluator {
  VectorLaurent q;
  RVec base;
  explicit PointEvaluator(const ImmersionDisc& imm) : q(antiderivative_from_zero(imm.phi).poly), base(imm.base) {
    require_disc(imm);
  }
  RVec operator()(cd z) const { return base + eval_poly(q, z).real(); }
};

}  // namespace

std::size_t DiscMesh::edge_count() const {
  return static_cast<std::size_t>(n_a) * static_cast<std::size_t>(3 * n_r - 1);
}

DiscMesh triangulate_disc(int n_r, int n_a, double grading) {
  if (n_r < 4 || n_a < 16) throw PreconditionError("triangulate_disc needs n_r >= 4 and n_a >= 16");
  if (!(grading >= 1.0)) throw PreconditionError("mesh grading must be >= 1");
  DiscMesh m;
  m.n_r = n_r;
  m.n_a = n_a;
  for (int k = 1; k <= n_r; ++k) m.radii.push_back(k == n_r ? 1.0 : 1.0 - std::pow(1.0 - double(k) / n_r, grading));
  m.vertices.push_back(0.0);
  for (int k = 1; k <= n_r; ++k)
    for (int j = 0; j < n_a; ++j) m.vertices.push_back(std::polar(m.radii[k - 1], kTwoPi * j / n_a));
  for (int j = 0; j < n_a; ++j) m.triangles.push_back({0, m.vertex(1, j), m.vertex(1, j + 1)});
  for (int k = 1; k < n_r; ++k)
    for (int j = 0; j < n_a; ++j) {
      m.triangles.push_back({m.vertex(k, j), m.vertex(k + 1, j), m.vertex(k + 1, j + 1)});
      m.triangles.push_back({m.vertex(k, j), m.vertex(k + 1, j + 1), m.vertex(k, j + 1)});
    }
  for (int j = 0; j < n_a; ++j) m.boundary.push_back(m.vertex(n_r, j));
  return m;
}

DistanceResult intrinsic_distance(const ImmersionDisc& imm, const DiscMesh& mesh, int p0) {
  if (p0 < 0 || p0 >= static_cast<int>(mesh.vertices.size()) || std::abs(mesh.vertices[p0]) >= 1.0)
    throw PreconditionError("source must be an interior mesh vertex");
  const Graph g = weighted_graph(imm, mesh);
  std::vector<double> dist(g.size(), INFINITY);
  std::vector<int> prev(g.size(), -1);
  std::vector<char> is_boundary(g.size(), 0);
  for (int b : mesh.boundary) is_boundary[b] = 1;
  using Item = std::pair<double, int>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
  dist[p0] = 0.0;
  pq.push({0.0, p0});
  int hit = -1;
  while (!pq.empty()) {
    const auto [d, v] = pq.top();
    pq.pop();
    if (d > dist[v]) continue;
    if (is_boundary[v]) {
      hit = v;
      break;
    }
    for (const Edge& e : g[v]) {
      const double nd = d + e.w;
      if (nd < dist[e.to]) {
        dist[e.to] = nd;
        prev[e.to] = v;
        pq.push({nd, e.to});
      }
    }
  }
  DistanceResult r;
  if (hit < 0) throw GeometryError("boundary unreachable from the source vertex");
  r.distance = dist[hit];
  for (int v = hit; v >= 0; v = prev[v]) r.path.push_back(v);
  std::reverse(r.path.begin(), r.path.end());
  return r;
}

double refinement_delta(const ImmersionDisc& imm, int n_r, int n_a, double grading) {
  const double a = intrinsic_distance(imm, triangulate_disc(n_r, n_a, grading)).distance;
  const double b = intrinsic_distance(imm, triangulate_disc(2 * n_r, 2 * n_a, grading)).distance;
  return std::abs(a - b);
}

double curve_length(const ImmersionDisc& imm, const std::vector<cd>& polyline, double rel_tol) {
  const PointEvaluator F(imm);
  double total = 0.0;
  for (std::size_t s = 0; s + 1 < polyline.size(); ++s) {
    const cd a = polyline[s], b = polyline[s + 1];
    if (a == b) continue;
    auto chord_sum = [&](int pieces) {
      double L = 0.0;
      RVec prev = F(a);
      for (int i = 1; i <= pieces; ++i) {
        const RVec cur = F(a + (b - a) * (double(i) / pieces));
        L += (cur - prev).norm();
        prev = cur;
      }
      return L;
    };
    int pieces = 1;
    double L = chord_sum(pieces);
    while (pieces < (1 << 16)) {
      pieces *= 2;
      const double L2 = chord_sum(pieces);
      const bool done = std::abs(L2 - L) <= rel_tol * L2;
      L = L2;
      if (done) break;
    }
    total += L;
  }
  return total;
}

double path_length(const ImmersionDisc& imm, const DiscMesh& mesh, const std::vector<int>& path) {
  std::vector<cd> pts;
  for (int v : path) pts.push_back(mesh.vertices[v]);
  return curve_length(imm, pts);
}

InjectivityGap boundary_injectivity_gap(const ImmersionDisc& imm, int n_samples) {
  if (n_samples < 256) throw PreconditionError("injectivity gap needs at least 256 samples");
  const Eigen::MatrixXd F = eval_immersion_circle(imm, 1.0, n_samples);
  const int sep = n_samples / 32;
  InjectivityGap best{INFINITY, 0, 0};
  for (int i = 0; i < n_samples; ++i)
    for (int j = i + sep + 1; j < n_samples; ++j) {
      if (n_samples - (j - i) <= sep) continue;
      const double d = (F.row(i) - F.row(j)).norm();
      if (d < best.gap) best = {d, i, j};
    }
  return best;
}

Eigen::MatrixXd image_vertices(const ImmersionDisc& imm, const DiscMesh& mesh) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(mesh.vertices.size()), static_cast<Eigen::Index>(imm.dim()));
  out.row(0) = integrate_real_part(imm, 0.0).transpose();
  for (int k = 1; k <= mesh.n_r; ++k)
    out.middleRows(mesh.vertex(k, 0), mesh.n_a) = eval_immersion_circle(imm, mesh.radii[k - 1], mesh.n_a);
  return out;
}

void write_obj(std::ostream& os, const Eigen::MatrixXd& image, const DiscMesh& mesh) {
  char buf[128];
  for (Eigen::Index v = 0; v < image.rows(); ++v) {
    const double z = image.cols() > 2 ? image(v, 2) : 0.0;
    std::snprintf(buf, sizeof buf, "v %.12g %.12g %.12g\n", image(v, 0), image(v, 1), z);
    os << buf;
  }
  for (const auto& t : mesh.triangles) os << "f " << t[0] + 1 << ' ' << t[1] + 1 << ' ' << t[2] + 1 << '\n';
}

void write_lambda_csv(std::ostream& os, const ImmersionDisc& imm, const DiscMesh& mesh) {
  char buf[128];
  os << "vertex,re,im,lambda\n";
  for (std::size_t v = 0; v < mesh.vertices.size(); ++v) {
    const cd z = mesh.vertices[v];
    std::snprintf(buf, sizeof buf, "%zu,%.12g,%.12g,%.12g\n", v, z.real(), z.imag(), conformal_factor(imm, z));
    os << buf;
  }
}

}  // namespace nullforge
