#pragma once

// Boundary at infinity of X_{p,q}.
//
// A boundary point is a unit-speed ray t -> exp_map(chart, t * lambda),
// sqrt(2) |lambda| = 1. As t grows the columns cosh(t l_i) u_i + sinh(t l_i) v_i
// line up with the isotropic vectors w_i = u_i + sgn(l_i) v_i, at rate |l_i|.
// The asymptotic class is the isotropic flag spanned by the w_i, filtered by
// level, together with the level values. Everything below (rebasing,
// Busemann functions, Tits angles, stabilisers) is phrased through that data.

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <bit>
#include <cstdint>
#include <functional>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "hypgrass/ambient.hpp"
#include "hypgrass/comparison.hpp"
#include "hypgrass/space.hpp"

namespace hypgrass {

struct BoundaryPoint {
  FlatChart chart;
  Vec lambda;  // sqrt(2) |lambda| = 1

  // Normalises lambda to unit speed.
  static BoundaryPoint from_direction(const FlatChart& chart, const Vec& lambda) {
    if (lambda.size() != chart.u.cols()) throw DimensionError("BoundaryPoint: lambda must have p entries");
    const double n = std::sqrt(2.0) * lambda.norm();
    if (!(n > 0) || !std::isfinite(n)) throw InvalidArgument("BoundaryPoint: direction must be non-zero");
    return BoundaryPoint{chart, lambda / n};
  }

  const Point& base() const { return chart.base; }
  const SignatureForm& form() const { return chart.form(); }

  void validate(double tol = 1e-10) const {
    chart.validate();
    if (lambda.size() != form().p()) throw DimensionError("BoundaryPoint: lambda must have p entries");
    if (std::abs(std::sqrt(2.0) * lambda.norm() - 1.0) > tol)
      throw InvalidArgument("BoundaryPoint: direction is not unit speed");
  }
};

inline Point ray_point(const BoundaryPoint& xi, double t) {
  if (t < 0) throw InvalidArgument("ray_point: t must be >= 0");
  return exp_map(xi.chart, t * xi.lambda);
}

namespace detail {

struct IsotropicData {
  Mat w;      // columns u_i + sgn(l_i) v_i, non-increasing |l_i|
  Vec level;  // |l_i| matching the columns
};

inline IsotropicData isotropic_data(const BoundaryPoint& xi, double zero_tol) {
  std::vector<int> idx;
  for (int i = 0; i < xi.lambda.size(); ++i)
    if (std::abs(xi.lambda(i)) > zero_tol) idx.push_back(i);
  std::stable_sort(idx.begin(), idx.end(),
                   [&](int a, int b) { return std::abs(xi.lambda(a)) > std::abs(xi.lambda(b)); });
  IsotropicData out{Mat(xi.form().dim(), static_cast<Eigen::Index>(idx.size())), Vec(static_cast<Eigen::Index>(idx.size()))};
  for (std::size_t k = 0; k < idx.size(); ++k) {
    const int i = idx[k];
    const double s = xi.lambda(i) > 0 ? 1.0 : -1.0;
    out.w.col(static_cast<Eigen::Index>(k)) = xi.chart.u.col(i) + s * xi.chart.v.col(i);
    out.level(static_cast<Eigen::Index>(k)) = std::abs(xi.lambda(i));
  }
  return out;
}

// Groups of equal level: (end column, level) with levels strictly decreasing.
inline std::vector<std::pair<Eigen::Index, double>> level_groups(const Vec& level, double cluster) {
  std::vector<std::pair<Eigen::Index, double>> out;
  Eigen::Index start = 0;
  for (Eigen::Index i = 1; i <= level.size(); ++i) {
    if (i == level.size() || level(i - 1) - level(i) > cluster) {
      out.emplace_back(i, level.segment(start, i - start).mean());
      start = i;
    }
  }
  return out;
}

// Flat chart at `base` whose ray with the returned lambda has the isotropic
// data (w, level). The w are orthogonalised against the majorant of base,
// which splits each into equal-length pieces inside base and its complement.
inline std::pair<FlatChart, Vec> chart_from_isotropic(const Point& base, const Mat& w, const Vec& level) {
  const SignatureForm& form = base.form();
  const int n = form.dim(), p = form.p();
  const Eigen::Index m = w.cols();
  if (m > p) throw InvalidArgument("isotropic data has more than p directions");
  const Mat maj = base.majorant();
  const Mat& y = base.frame();
  Mat ws(n, m);
  for (Eigen::Index k = 0; k < m; ++k) {
    Vec x = w.col(k);
    for (int pass = 0; pass < 2; ++pass)
      for (Eigen::Index j = 0; j < k; ++j) x -= 0.5 * ws.col(j).dot(maj * x) * ws.col(j);
    const double nm = x.dot(maj * x);
    if (!(nm > 0)) throw DegenerateError("isotropic directions are linearly dependent");
    ws.col(k) = x * std::sqrt(2.0 / nm);
  }
  Mat u(n, m), v(n, m);
  for (Eigen::Index k = 0; k < m; ++k) {
    const Vec a = y * (y.transpose() * form.apply(Vec(ws.col(k))));
    const Vec c = ws.col(k) - a;
    u.col(k) = a / std::sqrt(qform(form, a));
    v.col(k) = c / std::sqrt(-qform(form, c));
  }
  const int rest = p - static_cast<int>(m);
  const Mat ux = complete_positive(form, y, u, rest);
  Mat uu(n, p);
  uu << u, ux;
  const Mat vx = complete_negative(form, uu, v, rest);
  Mat vv(n, p);
  vv << v, vx;
  Vec lam = Vec::Zero(p);
  lam.head(m) = level;
  return {FlatChart{base, uu, vv}, lam};
}

}  // namespace detail

// Ray at `base` asymptotic to xi.
inline BoundaryPoint rebase(const BoundaryPoint& xi, const Point& base, const Tolerance& tol = {}) {
  detail::require_same_form(xi.form(), base.form());
  const auto data = detail::isotropic_data(xi, tol.angle_zero);
  auto [chart, lam] = detail::chart_from_isotropic(base, data.w, data.level);
  return BoundaryPoint::from_direction(chart, lam);
}

// ---------------------------------------------------------------------------
// Busemann functions.
//
// With W_j spanning the j-th flag subspace and levels v_1 > ... > v_k > 0,
//   F(x) = sum_j (v_j - v_{j+1}) log det(2 C_j C_j^T),  C_j = W_j^T Phi X,
// (v_{k+1} = 0) is a Busemann function for xi: on a flat chart it is linear
// with slope -1 along the ray. beta_xi(x, y) = F(x) - F(y).

namespace detail {

struct FlagLevels {
  std::vector<Mat> w;       // nested spanning sets
  std::vector<double> dv;   // v_j - v_{j+1}
  std::vector<double> levels;
};

inline FlagLevels flag_levels(const BoundaryPoint& xi, const Tolerance& tol) {
  const auto data = isotropic_data(xi, tol.angle_zero);
  const auto groups = level_groups(data.level, tol.cluster);
  FlagLevels out;
  for (std::size_t j = 0; j < groups.size(); ++j) {
    out.w.push_back(data.w.leftCols(groups[j].first));
    out.levels.push_back(groups[j].second);
    const double next = j + 1 < groups.size() ? groups[j + 1].second : 0.0;
    out.dv.push_back(groups[j].second - next);
  }
  return out;
}

inline double log_det_spd(const Mat& g) {
  Eigen::LLT<Mat> llt(g);
  if (llt.info() != Eigen::Success) throw NumericsError("busemann: Gram of flag pairing is not positive");
  return 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
}

}  // namespace detail

inline double busemann_potential(const BoundaryPoint& xi, const Point& x, const Tolerance& tol = {}) {
  detail::require_same_form(xi.form(), x.form());
  const auto fl = detail::flag_levels(xi, tol);
  const SignatureForm& form = xi.form();
  double f = 0.0;
  for (std::size_t j = 0; j < fl.w.size(); ++j) {
    const Mat c = cross_gram(form, fl.w[j], x.frame());
    f += fl.dv[j] * detail::log_det_spd(2.0 * c * c.transpose());
  }
  return f;
}

struct BusemannResult {
  double value = 0;          // closed form
  double numeric = 0;        // extrapolated limit of d(x, rho_y(t)) - t
  double delta = 0;          // last change of the extrapolated sequence
  double t_used = 0;         // largest t actually sampled
  bool converged = false;    // delta below tol.limit
  std::vector<double> t;     // sampled grid
  std::vector<double> raw;   // d(x, rho_y(t)) - t
};

// Largest t at which ray frames stay resolvable to ~1e-8: their entries grow
// like exp(t max|lambda|) while the Gram stays I, so rounding in the Gram
// grows like exp(2 t max|lambda|).
inline double ray_sampling_cap(const BoundaryPoint& xi) {
  return std::log(1e8) / (2.0 * xi.lambda.cwiseAbs().maxCoeff());
}

// ---------------------------------------------------------------------------
// Tits angle: cos angle(xi, eta) = -lim F_xi(rho_eta(t)) / t. Along eta's
// chart, rho_eta(t) has columns e^{t m_i} w+_i / 2 + e^{-t m_i} w-_i / 2, so
// each minor of C_j(t) is an exponential polynomial and the slope is read off
// from leading exponents (Cauchy-Binet).

namespace detail {

using ExpTerms = std::vector<std::pair<double, double>>;  // exponent, coefficient

// Terms of det of the k x k minor on `subset` as an exponential polynomial.
inline ExpTerms minor_terms(const Mat& a, const Mat& b, const Vec& mu, std::uint32_t subset) {
  const int k = static_cast<int>(a.rows());
  std::vector<int> cols;
  for (int i = 0; i < mu.size(); ++i)
    if (subset & (1u << i)) cols.push_back(i);
  ExpTerms terms;
  Mat m(k, k);
  for (std::uint32_t sg = 0; sg < (1u << k); ++sg) {
    double e = 0.0;
    for (int c = 0; c < k; ++c) {
      const bool plus = !(sg & (1u << c));
      m.col(c) = plus ? a.col(cols[c]) : b.col(cols[c]);
      e += plus ? mu(cols[c]) : -mu(cols[c]);
    }
    terms.emplace_back(e, m.determinant());
  }
  std::sort(terms.begin(), terms.end(), [](const auto& l, const auto& r) { return l.first > r.first; });
  return terms;
}

// Largest exponent whose merged coefficient exceeds thr.
inline double leading_exponent(const ExpTerms& terms, double thr) {
  std::size_t i = 0;
  while (i < terms.size()) {
    std::size_t j = i;
    double sum = 0.0;
    while (j < terms.size() && terms[i].first - terms[j].first <= 1e-9) sum += terms[j++].second;
    if (std::abs(sum) > thr) return terms[i].first;
    i = j;
  }
  return -std::numeric_limits<double>::infinity();
}

}  // namespace detail

// lim F_xi(rho_eta(t)) / t.
inline double busemann_slope(const BoundaryPoint& xi, const BoundaryPoint& eta, const Tolerance& tol = {}) {
  detail::require_same_form(xi.form(), eta.form());
  const SignatureForm& form = xi.form();
  const int p = form.p();
  if (p > 20) throw DimensionError("busemann_slope: p too large for minor enumeration");
  const auto fl = detail::flag_levels(xi, tol);
  const Mat wp = eta.chart.u + eta.chart.v, wm = eta.chart.u - eta.chart.v;
  double slope = 0.0;
  for (std::size_t j = 0; j < fl.w.size(); ++j) {
    const Mat a = cross_gram(form, fl.w[j], wp), b = cross_gram(form, fl.w[j], wm);
    const int k = static_cast<int>(a.rows());
    std::vector<detail::ExpTerms> all;
    double scale = 0.0;
    for (std::uint32_t s = 0; s < (1u << p); ++s) {
      if (std::popcount(s) != k) continue;
      all.push_back(detail::minor_terms(a, b, eta.lambda, s));
      for (const auto& t : all.back()) scale = std::max(scale, std::abs(t.second));
    }
    // one threshold across all minors, so minors that vanish are dropped
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& terms : all) best = std::max(best, detail::leading_exponent(terms, 1e-9 * scale));
    if (!std::isfinite(best)) throw NumericsError("busemann_slope: flag pairing vanished");
    slope += fl.dv[j] * 2.0 * best;
  }
  return slope;
}

struct TitsResult {
  double angle = 0;
  double slope = 0;               // lim beta_xi(rho_eta(t), base) / t
  std::vector<double> t;          // comparison-angle grid at the base
  std::vector<double> comparison; // angle_base(rho_xi(t), rho_eta(t))
  double monotonicity_violation = 0;
  bool monotone = true;
};

inline TitsResult tits_angle(const BoundaryPoint& xi, const BoundaryPoint& eta, const Point& base,
                             double t_max = 1e3, const Tolerance& tol = {}) {
  TitsResult r;
  r.slope = busemann_slope(xi, eta, tol);
  r.angle = std::acos(std::clamp(-r.slope, -1.0, 1.0));
  const BoundaryPoint a = rebase(xi, base, tol), b = rebase(eta, base, tol);
  const double cap = std::min({t_max, ray_sampling_cap(a), ray_sampling_cap(b)});
  double prev = -1.0;
  for (double t = std::min(0.5, cap); t <= cap * (1 + 1e-12); t *= 2.0) {
    const Point xa = ray_point(a, t), xb = ray_point(b, t);
    const double c = comparison_angle_from_sides(t, t, distance(xa, xb, tol));
    r.t.push_back(t);
    r.comparison.push_back(c);
    if (prev >= 0) r.monotonicity_violation = std::max(r.monotonicity_violation, prev - c);
    prev = c;
  }
  r.monotone = r.monotonicity_violation <= 1e-8;
  return r;
}

// ---------------------------------------------------------------------------
// Delta-directions: Weyl-canonical form (sorted |lambda|) of a segment.

struct DeltaDirection {
  Vec lambda_sorted;  // non-negative, non-increasing, sqrt(2)|.| = 1
};

inline DeltaDirection canonical_delta(const Vec& lambda) {
  Vec a = lambda.cwiseAbs();
  std::sort(a.data(), a.data() + a.size(), std::greater<>());
  const double n = std::sqrt(2.0) * a.norm();
  if (!(n > 0)) throw InvalidArgument("delta_direction: zero direction");
  return DeltaDirection{a / n};
}

inline DeltaDirection delta_direction(const Point& x, const Point& y, const Tolerance& tol = {}) {
  if (same_point(x, y, tol)) throw InvalidArgument("delta_direction: coincident points");
  return canonical_delta(log_map(x, y, tol).lambda);
}

// Spherical angle between canonical representatives.
inline double delta_distance(const DeltaDirection& a, const DeltaDirection& b) {
  return std::acos(std::clamp(2.0 * a.lambda_sorted.dot(b.lambda_sorted), -1.0, 1.0));
}

// ---------------------------------------------------------------------------
// Isotropic flags.

struct IsotropicFlag {
  SignatureForm form;
  std::vector<Mat> subspaces;

  std::vector<int> dims() const {
    std::vector<int> d;
    for (const auto& s : subspaces) d.push_back(static_cast<int>(s.cols()));
    return d;
  }

  void validate(double tol = 1e-8) const {
    if (subspaces.empty()) throw InvalidArgument("IsotropicFlag: no subspaces");
    Eigen::Index prev = 0;
    for (std::size_t j = 0; j < subspaces.size(); ++j) {
      const Mat& s = subspaces[j];
      detail::require_rows(form, s.rows(), "IsotropicFlag");
      if (s.cols() <= prev) throw InvalidArgument("IsotropicFlag: dimensions must increase strictly");
      if (s.cols() > form.p()) throw InvalidArgument("IsotropicFlag: isotropic subspaces have dimension <= p");
      if (!s.allFinite()) throw InvalidArgument("IsotropicFlag: non-finite entries");
      Eigen::JacobiSVD<Mat> svd(s);
      const Vec sv = svd.singularValues();
      if (sv(sv.size() - 1) <= 1e-10 * sv(0)) throw InvalidArgument("IsotropicFlag: columns are dependent");
      prev = s.cols();
    }
    const Mat& top = subspaces.back();
    const Vec cn = top.colwise().norm();
    const Mat g = gram(form, top);
    const Mat rel = cn.asDiagonal().inverse() * g * cn.asDiagonal().inverse();
    if (rel.cwiseAbs().maxCoeff() > tol) throw InvalidArgument("IsotropicFlag: largest subspace is not totally isotropic");
    for (std::size_t j = 0; j + 1 < subspaces.size(); ++j) {
      Eigen::HouseholderQR<Mat> qr(subspaces[j + 1]);
      const Mat q = qr.householderQ() * Mat::Identity(form.dim(), subspaces[j + 1].cols());
      const Mat& s = subspaces[j];
      const Mat res = s - q * (q.transpose() * s);
      if (res.norm() > tol * std::max(1.0, s.norm())) throw InvalidArgument("IsotropicFlag: subspaces are not nested");
    }
  }
};

inline double flag_distance(const IsotropicFlag& a, const IsotropicFlag& b) {
  if (a.subspaces.size() != b.subspaces.size()) return 1.0;
  double d = 0.0;
  for (std::size_t j = 0; j < a.subspaces.size(); ++j)
    d = std::max(d, subspace_distance(a.subspaces[j], b.subspaces[j]));
  return d;
}

inline IsotropicFlag flag_of(const BoundaryPoint& xi, const Tolerance& tol = {}) {
  const auto fl = detail::flag_levels(xi, tol);
  if (fl.w.empty()) throw InvalidArgument("flag_of: zero direction");
  return IsotropicFlag{xi.form(), fl.w};
}

// lambda_i = k - j + 1 on the j-th dimension gap, zero beyond; chart at E_0.
inline BoundaryPoint boundary_from_flag(const IsotropicFlag& flag, const Tolerance& tol = {}) {
  flag.validate(std::max(1e-8, tol.isometry));
  const SignatureForm& form = flag.form;
  const int n = form.dim();
  const int k = static_cast<int>(flag.subspaces.size());
  Mat w(n, 0);
  std::vector<double> lv;
  for (int j = 0; j < k; ++j) {
    const Mat& e = flag.subspaces[j];
    Mat r = e;
    if (w.cols() > 0) {
      Eigen::HouseholderQR<Mat> qr(w);
      const Mat q = qr.householderQ() * Mat::Identity(n, w.cols());
      r = e - q * (q.transpose() * e);
    }
    const Eigen::Index add = e.cols() - w.cols();
    Eigen::JacobiSVD<Mat> svd(r, Eigen::ComputeThinU);
    w.conservativeResize(n, w.cols() + add);
    w.rightCols(add) = svd.matrixU().leftCols(add);
    for (Eigen::Index i = 0; i < add; ++i) lv.push_back(static_cast<double>(k - j));
  }
  const Vec level = Eigen::Map<const Vec>(lv.data(), static_cast<Eigen::Index>(lv.size()));
  auto [chart, lam] = detail::chart_from_isotropic(Point::base(form), w, level);
  return BoundaryPoint::from_direction(chart, lam);
}

// ---------------------------------------------------------------------------
// Stabilisers. After moving xi's chart to the standard one (levels
// non-negative, non-increasing), g_t acts in the basis
//   e'_i = (e_i + e_{p+i}) / sqrt2, e'_{p+i} = (e_i - e_{p+i}) / sqrt2, e'_{2p+k} = e_{2p+k}
// as diag(e^{t l}, e^{-t l}, 1), so (g_t^{-1} h g_t)_{ab} = h'_{ab} e^{t (l_b - l_a)}.

struct Standardization {
  Mat from_std;  // standard coordinates -> ambient
  Mat to_std;    // inverse
  Vec lambda;    // non-negative, non-increasing
};

inline Standardization standardize(const BoundaryPoint& xi) {
  const SignatureForm& form = xi.form();
  const int p = form.p(), n = form.dim();
  std::vector<int> order(p);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return std::abs(xi.lambda(a)) > std::abs(xi.lambda(b)); });
  Mat u(n, p), v(n, p);
  Vec lam(p);
  for (int i = 0; i < p; ++i) {
    const int o = order[i];
    const double s = xi.lambda(o) < 0 ? -1.0 : 1.0;
    u.col(i) = xi.chart.u.col(o);
    v.col(i) = s * xi.chart.v.col(o);
    lam(i) = std::abs(xi.lambda(o));
  }
  const Mat comp = detail::complete_negative(form, u, v, form.q() - p);
  Mat b(n, n);
  b << u, v, comp;
  const Mat inv = form.phi() * b.transpose() * form.phi();
  return Standardization{b, inv, lam};
}

// Orthogonal change of basis to e'.
inline Mat eprime_basis(const SignatureForm& form) {
  const int p = form.p(), n = form.dim();
  Mat e = Mat::Identity(n, n);
  const double r = 1.0 / std::sqrt(2.0);
  for (int i = 0; i < p; ++i) {
    e(i, i) = r;
    e(p + i, i) = r;
    e(i, p + i) = r;
    e(p + i, p + i) = -r;
  }
  return e;
}

// Levels of the e' basis vectors.
inline Vec eprime_levels(const SignatureForm& form, const Vec& lambda_std) {
  Vec l = Vec::Zero(form.dim());
  l.head(form.p()) = lambda_std;
  l.segment(form.p(), form.p()) = -lambda_std;
  return l;
}

// ---------------------------------------------------------------------------
// Busemann values as a numerical limit, the cross-check for the closed form.

namespace detail {

// d(x, rho(t)) for a fixed x, evaluated as d(g_t^{-1} x', E_0) in the ray's
// standard coordinates. There g_t^{-1} scales the e' components of x' by
// e^{-t l} and e^{t l}; the Gram of x' does not depend on t, so no
// cancellation grows with t. Accuracy is then limited by the spread of the
// levels, which bounds the usable t.
class RayDistance {
 public:
  RayDistance(const BoundaryPoint& ray, const Point& x) {
    const SignatureForm& form = ray.form();
    const int p = form.p();
    const Standardization st = standardize(ray);
    lam_ = st.lambda;
    const Mat xs = st.to_std * x.frame();
    const double r = 1.0 / std::sqrt(2.0);
    aplus_ = r * (xs.topRows(p) + xs.middleRows(p, p));
    aminus_ = r * (xs.topRows(p) - xs.middleRows(p, p));
    b2_ = xs.bottomRows(form.q() - p);
    Mat g = aplus_.transpose() * aminus_;
    g = g + g.transpose() - b2_.transpose() * b2_;
    Eigen::LLT<Mat> llt(0.5 * (g + g.transpose()));
    if (llt.info() != Eigen::Success) throw NumericsError("busemann: transported frame lost definiteness");
    linv_t_ = llt.matrixL().solve(Mat::Identity(p, p)).transpose();
    const double spread = std::max(lam_.maxCoeff() - lam_.minCoeff(), 1e-12);
    cap_ = std::min(std::log(1e8) / spread, 600.0 / lam_.maxCoeff());
  }

  double operator()(double t) const {
    const int p = static_cast<int>(lam_.size());
    Mat b(p + b2_.rows(), p);
    const double r = 1.0 / std::sqrt(2.0);
    for (int i = 0; i < p; ++i)
      b.row(i) = r * (std::exp(-t * lam_(i)) * aplus_.row(i) - std::exp(t * lam_(i)) * aminus_.row(i));
    b.bottomRows(b2_.rows()) = b2_;
    Eigen::JacobiSVD<Mat> svd(b * linv_t_);
    double s = 0.0;
    for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i) {
      const double a = std::asinh(svd.singularValues()(i));
      s += a * a;
    }
    return std::sqrt(2.0 * s);
  }

  double cap() const { return cap_; }

 private:
  Vec lam_;
  Mat aplus_, aminus_, b2_, linv_t_;
  double cap_ = 0;
};

}  // namespace detail

// beta_xi(x, y): closed form, plus the limit of d(x, rho_y(t)) - t over a
// doubling grid up to min(t_max, usable t), Richardson-extrapolated in 1/t.
inline BusemannResult busemann(const BoundaryPoint& xi, const Point& x, const Point& y, double t_max = 1e4,
                               const Tolerance& tol = {}) {
  if (!(t_max > 0)) throw InvalidArgument("busemann: t_max must be positive");
  BusemannResult r;
  r.value = busemann_potential(xi, x, tol) - busemann_potential(xi, y, tol);

  const detail::RayDistance dist(rebase(xi, y, tol), x);
  const double cap = std::min(t_max, dist.cap());
  const double t0 = std::min(1.0, cap / 4.0);
  std::vector<std::vector<double>> table;
  double prev_est = std::numeric_limits<double>::quiet_NaN();
  for (double t = t0; t <= cap * (1 + 1e-12); t *= 2.0) {
    const double g = dist(t) - t;
    r.t.push_back(t);
    r.raw.push_back(g);
    std::vector<double> row{g};
    if (!table.empty()) {
      const auto& last = table.back();
      for (std::size_t m = 1; m <= last.size() && m < 3; ++m) {
        const double f = std::pow(2.0, static_cast<double>(m));
        row.push_back((f * row[m - 1] - last[m - 1]) / (f - 1.0));
      }
    }
    table.push_back(row);
    const double est = row.back();
    if (!std::isnan(prev_est)) r.delta = std::abs(est - prev_est);
    prev_est = est;
    r.numeric = est;
    r.t_used = t;
  }
  r.converged = table.size() >= 3 && r.delta < tol.limit;
  return r;
}

struct StabilizerReport {
  bool block_verdict = false;
  bool bounded_verdict = false;
  double block_violation = 0;      // largest forbidden entry, relative
  std::array<double, 9> block_max{};  // per 3x3 block h1..h9, row-major
  std::vector<double> t;
  std::vector<double> norms;       // |g_t^{-1} h g_t|_2 in standard coordinates
  double growth = 0;               // max norm / norm at t = 0
  Vec lambda_std;
};

inline StabilizerReport stabilizer_check(const Isometry& h, const BoundaryPoint& xi,
                                         const std::vector<double>& t_samples = {0, 1, 2, 4, 8},
                                         const Tolerance& tol = {}) {
  detail::require_same_form(h.form(), xi.form());
  const SignatureForm& form = xi.form();
  const int p = form.p(), n = form.dim();
  const Standardization st = standardize(xi);
  const Mat hs = st.to_std * h.matrix() * st.from_std;
  const Mat e = eprime_basis(form);
  const Mat hp = e.transpose() * hs * e;
  const Vec l = eprime_levels(form, st.lambda);
  StabilizerReport r;
  r.lambda_std = st.lambda;
  const double scale = std::max(1.0, hp.cwiseAbs().maxCoeff());
  auto block = [&](int a) { return a < p ? 0 : (a < 2 * p ? 1 : 2); };
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      if (l(b) - l(a) <= tol.cluster) continue;
      const double v = std::abs(hp(a, b)) / scale;
      r.block_violation = std::max(r.block_violation, v);
      auto& bm = r.block_max[static_cast<std::size_t>(3 * block(a) + block(b))];
      bm = std::max(bm, v);
    }
  r.block_verdict = r.block_violation <= 1e-8;

  double base_norm = 0.0;
  for (double t : t_samples) {
    Mat c(n, n);
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) c(a, b) = hp(a, b) * std::exp(t * (l(b) - l(a)));
    Eigen::JacobiSVD<Mat> svd(c);
    const double nm = svd.singularValues()(0);
    r.t.push_back(t);
    r.norms.push_back(nm);
    if (t == 0.0) base_norm = nm;
  }
  if (base_norm == 0.0) {
    Eigen::JacobiSVD<Mat> svd(hp);
    base_norm = svd.singularValues()(0);
  }
  r.growth = *std::max_element(r.norms.begin(), r.norms.end()) / base_norm;
  r.bounded_verdict = r.growth <= 10.0;
  return r;
}

}  // namespace hypgrass
