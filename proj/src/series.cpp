#include "nullforge/series.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

#include "nullforge/errors.hpp"
#include "nullforge/fft.hpp"

namespace nullforge {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

// z^j for j = j0, j0+1, ... produced incrementally with periodic exact resync.
class PowerWalker {
 public:
  PowerWalker(double rho, double theta, int j0) : rho_(rho), theta_(theta), step_(std::polar(rho, theta)), j_(j0) {
    resync();
  }
  cd value() const { return cur_; }
  void advance() {
    ++j_;
    if (++since_ >= 64) {
      resync();
    } else {
      cur_ *= step_;
    }
  }

 private:
  void resync() {
    cur_ = std::polar(std::pow(rho_, j_), theta_ * j_);
    since_ = 0;
  }
  double rho_, theta_;
  cd step_;
  int j_;
  cd cur_;
  int since_ = 0;
};

}  // namespace

cd LaurentPoly::coeff(int j) const {
  if (c.empty() || j < jmin || j > jmax()) return {};
  return c[static_cast<std::size_t>(j - jmin)];
}

LaurentPoly LaurentPoly::trimmed(double tol) const {
  std::size_t lo = 0, hi = c.size();
  while (lo < hi && std::abs(c[lo]) <= tol) ++lo;
  while (hi > lo && std::abs(c[hi - 1]) <= tol) --hi;
  if (lo == hi) return {};
  return {jmin + static_cast<int>(lo), std::vector<cd>(c.begin() + lo, c.begin() + hi)};
}

cd eval_poly(const LaurentPoly& p, cd z) {
  if (p.is_zero()) return {};
  const int jmax = p.jmax();
  if (p.jmin < 0 && z == cd{}) throw DomainError("Laurent polynomial with negative exponents evaluated at 0");
  cd pos{}, neg{};
  if (jmax >= 0) {
    const int lo = std::max(p.jmin, 0);
    cd acc{};
    for (int j = jmax; j >= lo; --j) acc = acc * z + p.coeff(j);
    pos = lo == 0 ? acc : acc * std::pow(z, lo);
  }
  if (p.jmin < 0) {
    const int hi = std::min(jmax, -1);
    const cd w = 1.0 / z;
    cd acc{};
    for (int j = p.jmin; j <= hi; ++j) acc = acc * w + p.coeff(j);
    neg = acc * std::pow(w, -hi);
  }
  return pos + neg;
}

static LaurentPoly combine(const LaurentPoly& a, const LaurentPoly& b, double sb) {
  if (a.is_zero()) return sb == 1.0 ? b : cd(sb) * b;
  if (b.is_zero()) return a;
  const int lo = std::min(a.jmin, b.jmin);
  const int hi = std::max(a.jmax(), b.jmax());
  std::vector<cd> c(static_cast<std::size_t>(hi - lo + 1), cd{});
  for (std::size_t k = 0; k < a.c.size(); ++k) c[a.jmin - lo + k] += a.c[k];
  for (std::size_t k = 0; k < b.c.size(); ++k) c[b.jmin - lo + k] += sb * b.c[k];
  return {lo, std::move(c)};
}

LaurentPoly operator+(const LaurentPoly& a, const LaurentPoly& b) { return combine(a, b, 1.0); }
LaurentPoly operator-(const LaurentPoly& a, const LaurentPoly& b) { return combine(a, b, -1.0); }

LaurentPoly operator*(cd s, const LaurentPoly& p) {
  LaurentPoly r = p;
  for (auto& x : r.c) x *= s;
  return r;
}

LaurentPoly mul(const LaurentPoly& a, const LaurentPoly& b) {
  if (a.is_zero() || b.is_zero()) return {};
  return {a.jmin + b.jmin, fft::convolve(a.c, b.c)};
}

LaurentPoly shift(const LaurentPoly& p, int k) {
  if (p.is_zero()) return {};
  return {p.jmin + k, p.c};
}

LaurentPoly derivative(const LaurentPoly& p) {
  if (p.is_zero()) return {};
  std::vector<cd> c(p.c.size());
  for (std::size_t k = 0; k < p.c.size(); ++k) c[k] = p.c[k] * static_cast<double>(p.jmin + static_cast<int>(k));
  return LaurentPoly{p.jmin - 1, std::move(c)}.trimmed(0.0);
}

LaurentPoly rescale(const LaurentPoly& p, cd a) {
  if (p.is_zero()) return {};
  LaurentPoly r = p;
  PowerWalker w(std::abs(a), std::arg(a), p.jmin);
  for (auto& x : r.c) {
    x *= w.value();
    w.advance();
  }
  return r;
}

double coeff_l1(const LaurentPoly& p) {
  double s = 0.0;
  for (const auto& x : p.c) s += std::abs(x);
  return s;
}

Primitive antiderivative_from_zero(const LaurentPoly& p, double residue_tol) {
  Primitive out;
  if (p.is_zero()) return out;
  const cd res = p.coeff(-1);
  if (std::abs(res) > residue_tol) throw ResidueError("nonzero z^-1 coefficient has no Laurent primitive");
  std::vector<cd> c(p.c.size(), cd{});
  for (std::size_t k = 0; k < p.c.size(); ++k) {
    const int j = p.jmin + static_cast<int>(k);
    if (j == -1) continue;
    c[k] = p.c[k] / static_cast<double>(j + 1);
    if (j <= -2 && p.c[k] != cd{}) out.base_point_excluded = true;
  }
  out.poly = LaurentPoly{p.jmin + 1, std::move(c)}.trimmed(0.0);
  return out;
}

std::vector<cd> eval_circle(const LaurentPoly& p, double rho, int M, double theta0) {
  std::vector<cd> a(static_cast<std::size_t>(M), cd{});
  if (p.is_zero()) return a;
  if (rho == 0.0) {
    if (p.jmin < 0) throw DomainError("Laurent polynomial with negative exponents evaluated at 0");
    std::fill(a.begin(), a.end(), p.coeff(0));
    return a;
  }
  PowerWalker w(rho, theta0, p.jmin);
  for (std::size_t k = 0; k < p.c.size(); ++k) {
    const int j = p.jmin + static_cast<int>(k);
    const int idx = ((j % M) + M) % M;
    a[static_cast<std::size_t>(idx)] += p.c[k] * w.value();
    w.advance();
  }
  fft::transform(a, +1);
  return a;
}

LaurentPoly fit_circle(const std::vector<cd>& samples, int K) {
  const int M = static_cast<int>(samples.size());
  std::vector<cd> a = samples;
  fft::transform(a, -1);
  K = std::min(K, (M - 1) / 2);
  std::vector<cd> c(static_cast<std::size_t>(2 * K + 1));
  for (int j = -K; j <= K; ++j) c[static_cast<std::size_t>(j + K)] = a[static_cast<std::size_t>((j + M) % M)] / double(M);
  return {-K, std::move(c)};
}

VectorLaurent VectorLaurent::constant(const CVec& v) {
  VectorLaurent r(static_cast<std::size_t>(v.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i)
    if (v[i] != cd{}) r.comp[static_cast<std::size_t>(i)] = LaurentPoly::constant(v[i]);
  return r;
}

int VectorLaurent::jmin() const {
  int m = 0;
  bool any = false;
  for (const auto& p : comp)
    if (!p.is_zero()) {
      m = any ? std::min(m, p.jmin) : p.jmin;
      any = true;
    }
  return m;
}

int VectorLaurent::jmax() const {
  int m = 0;
  bool any = false;
  for (const auto& p : comp)
    if (!p.is_zero()) {
      m = any ? std::max(m, p.jmax()) : p.jmax();
      any = true;
    }
  return m;
}

CVec eval_poly(const VectorLaurent& p, cd z) {
  CVec v(static_cast<Eigen::Index>(p.dim()));
  for (std::size_t i = 0; i < p.dim(); ++i) v[static_cast<Eigen::Index>(i)] = eval_poly(p.comp[i], z);
  return v;
}

static void check_dims(const VectorLaurent& a, const VectorLaurent& b) {
  if (a.dim() != b.dim()) throw DimensionError("vector Laurent dimension mismatch");
}

VectorLaurent operator+(const VectorLaurent& a, const VectorLaurent& b) {
  check_dims(a, b);
  VectorLaurent r(a.dim());
  for (std::size_t i = 0; i < a.dim(); ++i) r.comp[i] = a.comp[i] + b.comp[i];
  return r;
}

VectorLaurent operator-(const VectorLaurent& a, const VectorLaurent& b) {
  check_dims(a, b);
  VectorLaurent r(a.dim());
  for (std::size_t i = 0; i < a.dim(); ++i) r.comp[i] = a.comp[i] - b.comp[i];
  return r;
}

VectorLaurent operator*(cd s, const VectorLaurent& p) {
  VectorLaurent r(p.dim());
  for (std::size_t i = 0; i < p.dim(); ++i) r.comp[i] = s * p.comp[i];
  return r;
}

VectorLaurent shift(const VectorLaurent& p, int k) {
  VectorLaurent r(p.dim());
  for (std::size_t i = 0; i < p.dim(); ++i) r.comp[i] = shift(p.comp[i], k);
  return r;
}

VectorLaurent derivative(const VectorLaurent& p) {
  VectorLaurent r(p.dim());
  for (std::size_t i = 0; i < p.dim(); ++i) r.comp[i] = derivative(p.comp[i]);
  return r;
}

VectorLaurent rescale(const VectorLaurent& p, cd a) {
  VectorLaurent r(p.dim());
  for (std::size_t i = 0; i < p.dim(); ++i) r.comp[i] = rescale(p.comp[i], a);
  return r;
}

Eigen::MatrixXcd eval_circle(const VectorLaurent& p, double rho, int M, double theta0) {
  Eigen::MatrixXcd out(M, static_cast<Eigen::Index>(p.dim()));
  for (std::size_t i = 0; i < p.dim(); ++i) {
    const auto col = eval_circle(p.comp[i], rho, M, theta0);
    for (int k = 0; k < M; ++k) out(k, static_cast<Eigen::Index>(i)) = col[static_cast<std::size_t>(k)];
  }
  return out;
}

VectorPrimitive antiderivative_from_zero(const VectorLaurent& p, double residue_tol) {
  VectorPrimitive out;
  out.poly = VectorLaurent(p.dim());
  for (std::size_t i = 0; i < p.dim(); ++i) {
    auto q = antiderivative_from_zero(p.comp[i], residue_tol);
    out.poly.comp[i] = std::move(q.poly);
    out.base_point_excluded = out.base_point_excluded || q.base_point_excluded;
  }
  return out;
}

nlohmann::json to_json(const VectorLaurent& p) {
  nlohmann::json comps = nlohmann::json::array();
  for (const auto& c : p.comp) {
    nlohmann::json coeffs = nlohmann::json::array();
    for (const auto& x : c.c) coeffs.push_back({x.real(), x.imag()});
    comps.push_back({{"jmin", c.jmin}, {"coeffs", coeffs}});
  }
  return {{"n", p.dim()}, {"components", comps}};
}

VectorLaurent vector_laurent_from_json(const nlohmann::json& j) {
  const auto n = j.at("n").get<std::size_t>();
  const auto& comps = j.at("components");
  if (comps.size() != n) throw DimensionError("component count does not match n");
  VectorLaurent p(n);
  for (std::size_t i = 0; i < n; ++i) {
    LaurentPoly& c = p.comp[i];
    c.jmin = comps[i].at("jmin").get<int>();
    for (const auto& x : comps[i].at("coeffs")) c.c.emplace_back(x.at(0).get<double>(), x.at(1).get<double>());
  }
  return p;
}

BoundaryGrid BoundaryGrid::sample(const TaylorFn& f, int m) {
  if (m < 16 || (m & (m - 1)) != 0) throw PreconditionError("boundary grid size must be a power of two >= 16");
  BoundaryGrid g;
  g.m = m;
  g.samples.reserve(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) g.samples.push_back(f(std::polar(1.0, kTwoPi * i / m)));
  g.degree = static_cast<int>(g.samples.front().rows()) - 1;
  if (g.degree < 0) throw PreconditionError("boundary data needs at least one Taylor coefficient");
  for (const auto& s : g.samples)
    if (!s.allFinite()) throw PreconditionError("boundary data is not finite");
  return g;
}

namespace {

// coarse: samples on the m-grid; fine: samples on the 2m-grid (fine[2i] sits on coarse[i]).
std::optional<Rationalized> fit_and_measure(const std::vector<Eigen::MatrixXcd>& coarse,
                                            const std::vector<Eigen::MatrixXcd>& fine, double tol, int max_window) {
  const int m = static_cast<int>(coarse.size());
  const int fm = static_cast<int>(fine.size());
  const int rows = static_cast<int>(coarse.front().rows());
  const int cols = static_cast<int>(coarse.front().cols());
  std::vector<std::vector<cd>> spectra(static_cast<std::size_t>(rows * cols));
  for (int k = 0; k < rows; ++k)
    for (int q = 0; q < cols; ++q) {
      std::vector<cd> s(static_cast<std::size_t>(m));
      for (int i = 0; i < m; ++i) s[static_cast<std::size_t>(i)] = coarse[static_cast<std::size_t>(i)](k, q) / double(m);
      fft::transform(s, -1);
      spectra[static_cast<std::size_t>(k * cols + q)] = std::move(s);
    }
  auto coefficient = [&](int k, int q, int j) { return spectra[static_cast<std::size_t>(k * cols + q)][static_cast<std::size_t>((j + m) % m)]; };

  auto error_for = [&](int K, double trim) {
    std::vector<double> err(static_cast<std::size_t>(fm), 0.0);
    for (int k = 0; k < rows; ++k) {
      std::vector<std::vector<cd>> vals(static_cast<std::size_t>(cols));
      for (int q = 0; q < cols; ++q) {
        std::vector<cd> buf(static_cast<std::size_t>(fm), cd{});
        for (int j = -K; j <= K; ++j) {
          const cd a = coefficient(k, q, j);
          if (std::abs(a) > trim) buf[static_cast<std::size_t>((j + fm) % fm)] = a;
        }
        fft::transform(buf, +1);
        vals[static_cast<std::size_t>(q)] = std::move(buf);
      }
      for (int i = 0; i < fm; ++i) {
        double s2 = 0.0;
        for (int q = 0; q < cols; ++q) s2 += std::norm(vals[static_cast<std::size_t>(q)][static_cast<std::size_t>(i)] - fine[static_cast<std::size_t>(i)](k, q));
        err[static_cast<std::size_t>(i)] += std::sqrt(s2);
      }
    }
    return *std::max_element(err.begin(), err.end());
  };

  const int kcap = std::min(max_window, m / 2 - 1);
  if (error_for(kcap, -1.0) > tol) return std::nullopt;
  int lo = 0, hi = 0;
  if (error_for(0, -1.0) > tol) {
    hi = 1;
    while (hi < kcap && error_for(hi, -1.0) > tol) {
      lo = hi;
      hi *= 2;
    }
    hi = std::min(hi, kcap);
    while (hi - lo > 1) {
      const int mid = (lo + hi) / 2;
      if (error_for(mid, -1.0) <= tol) hi = mid;
      else lo = mid;
    }
  }
  const int K = hi;
  const double trim = 1e-3 * tol / (2.0 * K + 1.0) * 0.5;

  Rationalized out;
  out.m_used = m;
  out.window = K;
  out.B.assign(static_cast<std::size_t>(rows), VectorLaurent(static_cast<std::size_t>(cols)));
  for (int k = 0; k < rows; ++k)
    for (int q = 0; q < cols; ++q) {
      std::vector<cd> c(static_cast<std::size_t>(2 * K + 1));
      for (int j = -K; j <= K; ++j) c[static_cast<std::size_t>(j + K)] = coefficient(k, q, j);
      out.B[static_cast<std::size_t>(k)].comp[static_cast<std::size_t>(q)] = LaurentPoly{-K, std::move(c)}.trimmed(trim);
    }
  out.sup_error = error_for(K, trim);
  return out;
}

}  // namespace

Rationalized rationalize_boundary_map(const TaylorFn& f, const RationalizeOptions& opt) {
  if (!(opt.tol > 0.0)) throw PreconditionError("rationalization tolerance must be positive");
  int m = std::max(16, static_cast<int>(fft::next_pow2(static_cast<std::size_t>(std::max(opt.m0, 16)))));
  BoundaryGrid fine = BoundaryGrid::sample(f, 2 * m);
  for (;;) {
    std::vector<Eigen::MatrixXcd> coarse;
    coarse.reserve(static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i) coarse.push_back(fine.samples[static_cast<std::size_t>(2 * i)]);
    if (auto r = fit_and_measure(coarse, fine.samples, opt.tol, opt.max_window)) return *r;
    if (m / 2 - 1 >= opt.max_window)
      throw ApproximationError("rationalization tolerance unreachable within the maximal Laurent window");
    m *= 2;
    fine = BoundaryGrid::sample(f, 2 * m);
  }
}

Rationalized rationalize_boundary_map(const BoundaryGrid& g, double tol, int max_window) {
  if (g.m < 16 || (g.m & (g.m - 1)) != 0) throw PreconditionError("boundary grid size must be a power of two >= 16");
  std::vector<Eigen::MatrixXcd> coarse;
  for (int i = 0; i < g.m; i += 2) coarse.push_back(g.samples[static_cast<std::size_t>(i)]);
  if (auto r = fit_and_measure(coarse, g.samples, tol, max_window)) return *r;
  throw ApproximationError("rationalization tolerance unreachable on the supplied grid");
}

}  // namespace nullforge
