#pragma once

#include <Eigen/Dense>
#include <complex>
#include <functional>
#include <json.hpp>
#include <vector>

namespace nullforge {

using cd = std::complex<double>;
using CVec = Eigen::VectorXcd;
using RVec = Eigen::VectorXd;

// p(z) = sum_k c[k] z^(jmin + k). An empty coefficient vector is the zero polynomial.
struct LaurentPoly {
  int jmin = 0;
  std::vector<cd> c;

  LaurentPoly() = default;
  LaurentPoly(int jmin_, std::vector<cd> c_) : jmin(jmin_), c(std::move(c_)) {}

  static LaurentPoly constant(cd a) { return {0, {a}}; }
  static LaurentPoly monomial(int j, cd a = 1.0) { return {j, {a}}; }

  bool is_zero() const { return c.empty(); }
  int jmax() const { return jmin + static_cast<int>(c.size()) - 1; }
  cd coeff(int j) const;
  // Drops leading/trailing coefficients with modulus <= tol.
  LaurentPoly trimmed(double tol = 0.0) const;
};

cd eval_poly(const LaurentPoly& p, cd z);
LaurentPoly operator+(const LaurentPoly& a, const LaurentPoly& b);
LaurentPoly operator-(const LaurentPoly& a, const LaurentPoly& b);
LaurentPoly operator*(cd s, const LaurentPoly& p);
LaurentPoly mul(const LaurentPoly& a, const LaurentPoly& b);
LaurentPoly shift(const LaurentPoly& p, int k);  // multiply by z^k
LaurentPoly derivative(const LaurentPoly& p);
// Coefficients of p(a z) for a complex constant a.
LaurentPoly rescale(const LaurentPoly& p, cd a);
double coeff_l1(const LaurentPoly& p);

struct Primitive {
  LaurentPoly poly;
  bool base_point_excluded = false;
};
Primitive antiderivative_from_zero(const LaurentPoly& p, double residue_tol = 1e-14);

// p(rho e^{i(theta0 + 2 pi k / M)}) for k = 0..M-1 via aliasing plus one FFT.
std::vector<cd> eval_circle(const LaurentPoly& p, double rho, int M, double theta0 = 0.0);
// Coefficients with |j| <= K of the trigonometric interpolant of samples on the unit circle.
LaurentPoly fit_circle(const std::vector<cd>& samples, int K);

struct VectorLaurent {
  std::vector<LaurentPoly> comp;

  VectorLaurent() = default;
  explicit VectorLaurent(std::size_t n) : comp(n) {}
  explicit VectorLaurent(std::vector<LaurentPoly> c) : comp(std::move(c)) {}
  static VectorLaurent constant(const CVec& v);

  std::size_t dim() const { return comp.size(); }
  int jmin() const;
  int jmax() const;
  LaurentPoly& operator[](std::size_t i) { return comp[i]; }
  const LaurentPoly& operator[](std::size_t i) const { return comp[i]; }
};

CVec eval_poly(const VectorLaurent& p, cd z);
VectorLaurent operator+(const VectorLaurent& a, const VectorLaurent& b);
VectorLaurent operator-(const VectorLaurent& a, const VectorLaurent& b);
VectorLaurent operator*(cd s, const VectorLaurent& p);
VectorLaurent shift(const VectorLaurent& p, int k);
VectorLaurent derivative(const VectorLaurent& p);
VectorLaurent rescale(const VectorLaurent& p, cd a);
// Column k of the result holds the samples of component k on the circle.
Eigen::MatrixXcd eval_circle(const VectorLaurent& p, double rho, int M, double theta0 = 0.0);

struct VectorPrimitive {
  VectorLaurent poly;
  bool base_point_excluded = false;
};
VectorPrimitive antiderivative_from_zero(const VectorLaurent& p, double residue_tol = 1e-14);

nlohmann::json to_json(const VectorLaurent& p);
VectorLaurent vector_laurent_from_json(const nlohmann::json& j);

// Two-variable boundary data: for zeta on the unit circle, row k of the returned matrix holds the
// coefficient of xi^k (k = 0..degree), one column per ambient component.
using TaylorFn = std::function<Eigen::MatrixXcd(cd zeta)>;

struct BoundaryGrid {
  int m = 0;
  int degree = 0;
  std::vector<Eigen::MatrixXcd> samples;  // samples[i] at zeta = e^{2 pi i i/m}

  static BoundaryGrid sample(const TaylorFn& f, int m);
  int dim() const { return samples.empty() ? 0 : static_cast<int>(samples.front().cols()); }
};

struct RationalizeOptions {
  double tol = 1e-8;
  int m0 = 64;
  int max_window = 256;
};

struct Rationalized {
  std::vector<VectorLaurent> B;  // B[j] multiplies xi^j
  double sup_error = 0.0;        // estimate of sup over T x closed disc
  int m_used = 0;
  int window = 0;
};

Rationalized rationalize_boundary_map(const TaylorFn& f, const RationalizeOptions& opt = {});
// Grid-only variant: fits on the even samples and measures on the full grid.
Rationalized rationalize_boundary_map(const BoundaryGrid& g, double tol, int max_window = 256);

}  // namespace nullforge
