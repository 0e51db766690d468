#pragma once

// Points of X_{p,q}: p-dimensional subspaces of R^{p+q} on which the form is
// positive definite. A Point always stores a canonical frame (Gram = I).
//
// Hyperbolic principal angles: the eigenvalues of P_E P_F P_E on E are
// cosh^2(alpha_i). They are computed as sinh(alpha_i), the singular values of
// the F^perp-coordinates of E's frame, never by subtracting 1 from cosh^2.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <utility>
#include <vector>

#include "hypgrass/ambient.hpp"
#include "hypgrass/errors.hpp"
#include "hypgrass/tolerance.hpp"

namespace hypgrass {

namespace detail {

// Flip v so its first entry that is not negligible is positive.
inline void fix_sign(Eigen::Ref<Vec> v) {
  const double scale = v.cwiseAbs().maxCoeff();
  if (scale == 0.0) return;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (std::abs(v(i)) > 1e-12 * scale) {
      if (v(i) < 0) v = -v;
      return;
    }
  }
}

// Modified Gram-Schmidt w.r.t. B, two passes per column.
inline Mat canonical_frame(const SignatureForm& form, const Mat& a) {
  require_rows(form, a.rows(), "canonicalize");
  if (a.cols() == 0) return a;
  if (!a.allFinite()) throw InvalidArgument("canonicalize: frame has non-finite entries");
  const Mat g = gram(form, a);
  if (!is_positive_definite(g, 1e-10))
    throw InvalidArgument("canonicalize: form is not positive definite on the frame");
  Mat out(a.rows(), a.cols());
  for (Eigen::Index j = 0; j < a.cols(); ++j) {
    Vec v = a.col(j);
    for (int pass = 0; pass < 2; ++pass)
      for (Eigen::Index i = 0; i < j; ++i) v -= bform(form, out.col(i), v) * out.col(i);
    const double qv = qform(form, v);
    if (!(qv > 0)) throw InvalidArgument("canonicalize: lost positivity during orthogonalisation");
    v /= std::sqrt(qv);
    fix_sign(v);
    out.col(j) = v;
  }
  return out;
}

}  // namespace detail

class Point {
 public:
  // Canonicalises the frame; throws InvalidArgument if the form is not
  // positive definite on it.
  Point(const SignatureForm& form, const Mat& frame)
      : form_(form), frame_(detail::canonical_frame(form, frame)) {
    if (frame_.cols() != form.p())
      throw DimensionError("Point: frame must have exactly p columns");
  }

  // Keeps the frame bit-for-bit when it is already canonical within tol,
  // otherwise canonicalises. Used by file loaders.
  static Point from_frame(const SignatureForm& form, const Mat& frame, double tol = 1e-10) {
    detail::require_rows(form, frame.rows(), "Point");
    if (frame.cols() == form.p() && frame.allFinite() &&
        (gram(form, frame) - Mat::Identity(form.p(), form.p())).cwiseAbs().maxCoeff() <= tol) {
      Point pt;
      pt.form_ = form;
      pt.frame_ = frame;
      return pt;
    }
    return Point(form, frame);
  }

  // E_0 = span(e_1, ..., e_p).
  static Point base(const SignatureForm& form) {
    return Point(form, Mat::Identity(form.dim(), form.p()));
  }

  const SignatureForm& form() const { return form_; }
  const Mat& frame() const { return frame_; }
  int p() const { return form_.p(); }

  // Q-orthogonal projector onto the point.
  Mat projector() const { return frame_ * form_.apply(frame_).transpose(); }

  // Positive definite majorant 2 Phi X X^T Phi - Phi.
  Mat majorant() const {
    const Mat px = form_.apply(frame_);
    return 2.0 * px * px.transpose() - form_.phi();
  }

  double gram_residual() const {
    return (gram(form_, frame_) - Mat::Identity(p(), p())).cwiseAbs().maxCoeff();
  }

 private:
  Point() = default;
  SignatureForm form_;
  Mat frame_;
};

inline Point canonicalize(const SignatureForm& form, const Mat& frame) { return Point(form, frame); }

// Non-increasing hyperbolic principal angles.
struct AngleSpectrum {
  Vec alphas;

  Eigen::Index size() const { return alphas.size(); }
  double operator[](Eigen::Index i) const { return alphas(i); }
  double max() const { return alphas.size() ? alphas(0) : 0.0; }
};

struct BiorthogonalPair {
  Mat x;      // B-orthonormal basis of E
  Mat y;      // B-orthonormal basis of F
  Vec c;      // B(x_i, y_i) = cosh(alpha_i)
  Vec alpha;  // matching angles
};

namespace detail {

struct AngleEig {
  Vec sinh;   // sinh(alpha_i), descending
  Mat coeff;  // columns: matching directions in E's frame coordinates
};

// With K a Euclidean-orthonormal basis of F^perp and G = -K^T Phi K, the
// normal coordinates of E's frame are C = L^{-1} (-K^T Phi X), G = L L^T,
// and sinh(alpha_i) are the singular values of C. Working with C instead of
// C^T C keeps small angles accurate next to large ones.
inline AngleEig angle_eig(const Point& e, const Point& f, const Tolerance& tol) {
  require_same_form(e.form(), f.form());
  const SignatureForm& form = e.form();
  const int p = form.p(), n = form.dim();
  const Mat& x = e.frame();
  Eigen::HouseholderQR<Mat> qr(form.apply(f.frame()));
  const Mat k = (qr.householderQ() * Mat::Identity(n, n)).rightCols(form.q());
  const Mat g = -gram(form, k);
  Eigen::LLT<Mat> llt(g);
  if (llt.info() != Eigen::Success) throw NumericsError("principal angles: complement Gram lost definiteness");
  const Mat c = llt.matrixL().solve(-cross_gram(form, k, x));
  Eigen::JacobiSVD<Mat> svd(c, Eigen::ComputeFullV);
  (void)tol;
  return AngleEig{svd.singularValues().head(p), svd.matrixV()};
}

inline double angle_from_sinh(double s) { return std::asinh(std::max(0.0, s)); }

}  // namespace detail

inline AngleSpectrum principal_angles(const Point& e, const Point& f, const Tolerance& tol = {}) {
  const auto eig = detail::angle_eig(e, f, tol);
  AngleSpectrum out{Vec(eig.sinh.size())};
  for (Eigen::Index i = 0; i < eig.sinh.size(); ++i) out.alphas(i) = detail::angle_from_sinh(eig.sinh(i));
  return out;
}

inline BiorthogonalPair biorthogonal_bases(const Point& e, const Point& f, const Tolerance& tol = {}) {
  const auto eig = detail::angle_eig(e, f, tol);
  const SignatureForm& form = e.form();
  const int p = form.p();
  BiorthogonalPair out{Mat(form.dim(), p), Mat(form.dim(), p), Vec(p), Vec(p)};
  const Mat& yf = f.frame();
  for (int i = 0; i < p; ++i) {
    Vec xi = e.frame() * eig.coeff.col(i);
    detail::fix_sign(xi);
    xi /= std::sqrt(qform(form, xi));
    // P_F x has Q = cosh^2 >= 1, so y = P_F x / cosh is always defined,
    // including inside clusters of zero angles.
    const Vec pfx = yf * (yf.transpose() * form.apply(xi));
    out.x.col(i) = xi;
    out.y.col(i) = pfx / std::sqrt(qform(form, pfx));
    out.c(i) = std::sqrt(1.0 + eig.sinh(i) * eig.sinh(i));
    out.alpha(i) = detail::angle_from_sinh(eig.sinh(i));
  }
  return out;
}

inline double distance(const Point& e, const Point& f, const Tolerance& tol = {}) {
  const auto a = principal_angles(e, f, tol);
  return std::sqrt(2.0 * a.alphas.squaredNorm());
}

inline bool same_point(const Point& e, const Point& f, const Tolerance& tol = {}) {
  return principal_angles(e, f, tol).max() <= tol.same_point;
}

namespace detail {

// Extends the B-orthonormal system (pos: Q = +1 columns, neg: Q = -1
// columns) by `count` Q = -1 vectors B-orthogonal to everything so far.
// Candidates are e_{p+1}, ..., e_n, e_1, ..., e_p in order; the first whose
// residual has -Q >= 1/(2n) is taken. Such a candidate always exists while
// the complement has negative directions left.
inline Mat complete_negative(const SignatureForm& form, const Mat& pos, const Mat& neg, int count) {
  const int n = form.dim();
  Mat have_neg = neg;
  Mat added(n, 0);
  std::vector<int> order;
  for (int i = form.p(); i < n; ++i) order.push_back(i);
  for (int i = 0; i < form.p(); ++i) order.push_back(i);
  for (int k = 0; k < count; ++k) {
    bool found = false;
    for (int idx : order) {
      Vec r = Vec::Unit(n, idx);
      for (int pass = 0; pass < 2; ++pass) {
        for (Eigen::Index j = 0; j < pos.cols(); ++j) r -= bform(form, pos.col(j), r) * pos.col(j);
        for (Eigen::Index j = 0; j < have_neg.cols(); ++j)
          r += bform(form, have_neg.col(j), r) * have_neg.col(j);
      }
      const double nq = -qform(form, r);
      if (nq >= 0.5 / n) {
        r /= std::sqrt(nq);
        fix_sign(r);
        have_neg.conservativeResize(n, have_neg.cols() + 1);
        have_neg.col(have_neg.cols() - 1) = r;
        added.conservativeResize(n, added.cols() + 1);
        added.col(added.cols() - 1) = r;
        found = true;
        break;
      }
    }
    if (!found) throw DimensionError("not enough negative directions left in the ambient space");
  }
  return added;
}

// Extends Q = +1 columns `pos` (inside the point `within`) by `count`
// further Q = +1 vectors of that point.
inline Mat complete_positive(const SignatureForm& form, const Mat& within, const Mat& pos, int count) {
  const int n = form.dim();
  Mat have = pos;
  Mat added(n, 0);
  const double thresh = 0.5 / std::max<Eigen::Index>(1, within.cols());
  for (int k = 0; k < count; ++k) {
    bool found = false;
    for (Eigen::Index idx = 0; idx < within.cols(); ++idx) {
      Vec r = within.col(idx);
      for (int pass = 0; pass < 2; ++pass)
        for (Eigen::Index j = 0; j < have.cols(); ++j) r -= bform(form, have.col(j), r) * have.col(j);
      const double qr = qform(form, r);
      if (qr >= thresh) {
        r /= std::sqrt(qr);
        fix_sign(r);
        have.conservativeResize(n, have.cols() + 1);
        have.col(have.cols() - 1) = r;
        added.conservativeResize(n, added.cols() + 1);
        added.col(added.cols() - 1) = r;
        found = true;
        break;
      }
    }
    if (!found) throw NumericsError("could not complete a positive basis of the point");
  }
  return added;
}

}  // namespace detail

// A maximal flat through `base`: lambda -> span{cosh(l_i) u_i + sinh(l_i) v_i}.
struct FlatChart {
  Point base;
  Mat u;  // Q(u_i) = 1, spans base
  Mat v;  // Q(v_i) = -1, B-orthogonal to u and to each other

  const SignatureForm& form() const { return base.form(); }

  // Largest deviation from the chart invariants.
  double residual() const {
    const SignatureForm& f = form();
    const int p = f.p();
    double r = (gram(f, u) - Mat::Identity(p, p)).cwiseAbs().maxCoeff();
    r = std::max(r, (gram(f, v) + Mat::Identity(p, p)).cwiseAbs().maxCoeff());
    r = std::max(r, cross_gram(f, u, v).cwiseAbs().maxCoeff());
    // u must span the base point
    const Mat back = u - base.projector() * u;
    r = std::max(r, back.cwiseAbs().maxCoeff());
    return r;
  }

  void validate(double tol = 1e-8) const {
    const int p = form().p();
    if (u.rows() != form().dim() || v.rows() != form().dim() || u.cols() != p || v.cols() != p)
      throw DimensionError("FlatChart: u and v must be (p+q) x p");
    const double scale = std::max({1.0, u.cwiseAbs().maxCoeff(), v.cwiseAbs().maxCoeff()});
    if (residual() > tol * scale * scale) throw InvalidArgument("FlatChart: invariants violated");
  }

  // The standard flat through E_0: u_i = e_i, v_i = e_{p+i}.
  static FlatChart standard(const SignatureForm& form) {
    const int p = form.p(), n = form.dim();
    Mat u = Mat::Zero(n, p), v = Mat::Zero(n, p);
    for (int i = 0; i < p; ++i) {
      u(i, i) = 1.0;
      v(p + i, i) = 1.0;
    }
    return FlatChart{Point::base(form), u, v};
  }
};

inline Mat flat_frame(const FlatChart& chart, const Vec& lambda) {
  if (lambda.size() != chart.u.cols()) throw DimensionError("exp_map: lambda must have p entries");
  Mat frame(chart.u.rows(), chart.u.cols());
  for (Eigen::Index i = 0; i < lambda.size(); ++i)
    frame.col(i) = std::cosh(lambda(i)) * chart.u.col(i) + std::sinh(lambda(i)) * chart.v.col(i);
  return frame;
}

inline Point exp_map(const FlatChart& chart, const Vec& lambda) {
  if (!lambda.allFinite()) throw InvalidArgument("exp_map: non-finite lambda");
  return Point(chart.form(), flat_frame(chart, lambda));
}

struct LogResult {
  FlatChart chart;
  Vec lambda;
};

// Chart at E containing F; exp_map(chart, lambda) == F.
inline LogResult log_map(const Point& e, const Point& f, const Tolerance& tol = {}) {
  const auto bi = biorthogonal_bases(e, f, tol);
  const SignatureForm& form = e.form();
  const int p = form.p(), n = form.dim();
  Mat v(n, 0);
  std::vector<int> degenerate;
  std::vector<int> slot(p, -1);
  for (int i = 0; i < p; ++i) {
    if (bi.alpha(i) > tol.angle_zero) {
      Vec w = (bi.y.col(i) - bi.c(i) * bi.x.col(i)) / std::sinh(bi.alpha(i));
      for (Eigen::Index j = 0; j < p; ++j) w -= bform(form, bi.x.col(j), w) * bi.x.col(j);
      for (Eigen::Index j = 0; j < v.cols(); ++j) w += bform(form, v.col(j), w) * v.col(j);
      w /= std::sqrt(-qform(form, w));
      v.conservativeResize(n, v.cols() + 1);
      v.col(v.cols() - 1) = w;
      slot[i] = static_cast<int>(v.cols()) - 1;
    } else {
      degenerate.push_back(i);
    }
  }
  const Mat extra = detail::complete_negative(form, bi.x, v, static_cast<int>(degenerate.size()));
  Mat vv(n, p);
  Vec lambda(p);
  for (int i = 0; i < p; ++i) {
    lambda(i) = slot[i] >= 0 ? bi.alpha(i) : 0.0;
    if (slot[i] >= 0) vv.col(i) = v.col(slot[i]);
  }
  for (std::size_t k = 0; k < degenerate.size(); ++k) vv.col(degenerate[k]) = extra.col(static_cast<Eigen::Index>(k));
  return LogResult{FlatChart{e, bi.x, vv}, lambda};
}

// ---------------------------------------------------------------------------
// Tangent vectors at y are linear maps y -> y^perp, stored as the n x p
// matrix of images of y's canonical frame. Inner product -2 tr(A^T Phi B),
// which matches d^2 = 2 sum alpha^2.

inline double tangent_inner(const SignatureForm& form, const Mat& a, const Mat& b) {
  return -2.0 * (a.transpose() * form.apply(b)).trace();
}

inline double tangent_norm(const SignatureForm& form, const Mat& a) {
  return std::sqrt(std::max(0.0, tangent_inner(form, a, a)));
}

inline Mat log_tangent(const Point& y, const Point& x, const Tolerance& tol = {}) {
  const auto lg = log_map(y, x, tol);
  const SignatureForm& form = y.form();
  // T u_i = lambda_i v_i, expressed on y's frame.
  const Mat coeff = cross_gram(form, lg.chart.u, y.frame());  // u^T Phi Y
  return lg.chart.v * lg.lambda.asDiagonal() * coeff;
}

inline Point exp_tangent(const Point& y, const Mat& a) {
  const SignatureForm& form = y.form();
  if (a.rows() != form.dim() || a.cols() != form.p()) throw DimensionError("exp_tangent: bad tangent shape");
  const Mat s = -gram(form, a);
  Eigen::SelfAdjointEigenSolver<Mat> es(s);
  const Mat& r = es.eigenvectors();
  const Mat u = y.frame() * r;
  const Mat w = a * r;
  Mat frame(form.dim(), form.p());
  for (int i = 0; i < form.p(); ++i) {
    const double l = std::sqrt(std::max(0.0, es.eigenvalues()(i)));
    const double shc = l < 1e-8 ? 1.0 + l * l / 6.0 : std::sinh(l) / l;
    frame.col(i) = std::cosh(l) * u.col(i) + shc * w.col(i);
  }
  return Point(form, frame);
}

// Q = -1 basis of y^perp (q columns), deterministic.
inline Mat normal_basis(const Point& y) {
  return detail::complete_negative(y.form(), y.frame(), Mat(y.form().dim(), 0), y.form().q());
}

// Euclidean coordinates (length p*q) of a tangent vector in the orthonormal
// frame induced by `normals`.
inline Vec tangent_coords(const SignatureForm& form, const Mat& normals, const Mat& a) {
  const Mat c = -cross_gram(form, normals, a);  // q x p
  return std::sqrt(2.0) * Eigen::Map<const Vec>(c.data(), c.size());
}

inline Mat tangent_from_coords(const Mat& normals, const Vec& coords, int p) {
  const Eigen::Index q = normals.cols();
  const Mat c = Eigen::Map<const Mat>(coords.data(), q, p) / std::sqrt(2.0);
  return normals * c;
}

// Riemannian (Alexandrov) angle at y between the segments to x and z.
inline double alexandrov_angle(const Point& y, const Point& x, const Point& z, const Tolerance& tol = {}) {
  const Mat a = log_tangent(y, x, tol), b = log_tangent(y, z, tol);
  const SignatureForm& form = y.form();
  const double na = tangent_norm(form, a), nb = tangent_norm(form, b);
  if (na == 0.0 || nb == 0.0) throw InvalidArgument("alexandrov_angle: coincident points");
  return std::acos(std::clamp(tangent_inner(form, a, b) / (na * nb), -1.0, 1.0));
}

// ---------------------------------------------------------------------------

struct Geodesic {
  FlatChart chart;
  Vec lambda;     // chart coordinates of the endpoint
  double length;  // d(start, end)

  // t in [0, 1] (extrapolates outside).
  Point at(double t) const { return exp_map(chart, t * lambda); }
  Point at_distance(double s) const { return length > 0 ? at(s / length) : chart.base; }
};

inline Geodesic geodesic(const Point& e, const Point& f, const Tolerance& tol = {}) {
  auto lg = log_map(e, f, tol);
  const double len = std::sqrt(2.0) * lg.lambda.norm();
  return Geodesic{std::move(lg.chart), std::move(lg.lambda), len};
}

inline Point midpoint(const Point& e, const Point& f, const Tolerance& tol = {}) {
  return geodesic(e, f, tol).at(0.5);
}

// ---------------------------------------------------------------------------

class Isometry {
 public:
  Isometry(const SignatureForm& form, const Mat& m, double tol = 1e-8) : form_(form), m_(m) {
    if (m.rows() != form.dim() || m.cols() != form.dim())
      throw DimensionError("Isometry: matrix must be (p+q)x(p+q)");
    if (!m.allFinite()) throw InvalidArgument("Isometry: non-finite entries");
    if (relative_isometry_residual(form, m) > tol)
      throw InvalidArgument("Isometry: M^T Phi M differs from Phi");
  }

  static Isometry identity(const SignatureForm& form) {
    return Isometry(form, Mat::Identity(form.dim(), form.dim()));
  }

  const SignatureForm& form() const { return form_; }
  const Mat& matrix() const { return m_; }

  Point apply(const Point& e) const {
    detail::require_same_form(form_, e.form());
    return Point(form_, m_ * e.frame());
  }
  Mat apply(const Mat& frame) const { return m_ * frame; }

  // M^{-1} = Phi M^T Phi.
  Isometry inverse() const {
    Isometry out = *this;
    out.m_ = form_.phi() * m_.transpose() * form_.phi();
    return out;
  }

  double residual() const { return check_isometry(form_, m_); }

  friend Isometry operator*(const Isometry& a, const Isometry& b) {
    detail::require_same_form(a.form_, b.form_);
    Isometry out = a;
    out.m_ = a.m_ * b.m_;
    return out;
  }

 private:
  SignatureForm form_;
  Mat m_;
};

// Matrix acting as [[cosh l, sinh l], [sinh l, cosh l]] on each span{u_i, v_i}
// of the chart and as the identity on their B-orthogonal complement.
inline Mat flat_translation_matrix(const FlatChart& chart, const Vec& lambda) {
  const SignatureForm& form = chart.form();
  Mat m = Mat::Identity(form.dim(), form.dim());
  const Mat pu = form.apply(chart.u);
  const Mat pv = form.apply(chart.v);
  for (Eigen::Index i = 0; i < lambda.size(); ++i) {
    const double ch = std::cosh(lambda(i)) - 1.0, sh = std::sinh(lambda(i));
    m += ch * (chart.u.col(i) * pu.col(i).transpose() - chart.v.col(i) * pv.col(i).transpose());
    m += sh * (chart.v.col(i) * pu.col(i).transpose() - chart.u.col(i) * pv.col(i).transpose());
  }
  return m;
}

// Transvection moving E toward F by arc length t along their geodesic.
inline Isometry transvection(const Point& e, const Point& f, double t, const Tolerance& tol = {}) {
  const auto g = geodesic(e, f, tol);
  if (g.length <= tol.same_point) throw InvalidArgument("transvection: E and F coincide");
  return Isometry(e.form(), flat_translation_matrix(g.chart, (t / g.length) * g.lambda));
}

// exp(H_lambda) in the standard basis.
inline Mat exp_h(const SignatureForm& form, const Vec& lambda) {
  return flat_translation_matrix(FlatChart::standard(form), lambda);
}

namespace detail {

// Full B-orthonormal basis (as columns) starting from x (Q=+1) and the
// non-degenerate normals v (Q=-1); returns the basis and the sign pattern.
inline std::pair<Mat, Vec> witt_basis(const SignatureForm& form, const Mat& x, const Mat& v) {
  const int n = form.dim();
  const Mat comp = complete_negative(form, x, v, n - static_cast<int>(x.cols() + v.cols()));
  Mat basis(n, n);
  basis << x, v, comp;
  Vec sig(n);
  sig.head(x.cols()).setOnes();
  sig.tail(n - x.cols()).setConstant(-1.0);
  return {basis, sig};
}

}  // namespace detail

// g in O(p,q) with g E = E' and g F = F'; requires equal angle spectra.
inline Isometry witt_isometry(const Point& e, const Point& f, const Point& e2, const Point& f2,
                              const Tolerance& tol = {}) {
  detail::require_same_form(e.form(), f.form());
  detail::require_same_form(e.form(), e2.form());
  detail::require_same_form(e.form(), f2.form());
  const SignatureForm& form = e.form();
  const auto b1 = biorthogonal_bases(e, f, tol);
  const auto b2 = biorthogonal_bases(e2, f2, tol);
  if ((b1.alpha - b2.alpha).cwiseAbs().maxCoeff() > 1e-6)
    throw InvalidArgument("witt_isometry: angle spectra differ");
  const int n = form.dim();
  auto normals = [&](const BiorthogonalPair& b) {
    Mat v(n, 0);
    for (Eigen::Index i = 0; i < b.alpha.size(); ++i) {
      if (b.alpha(i) <= tol.angle_zero) continue;
      Vec w = (b.y.col(i) - b.c(i) * b.x.col(i)) / std::sinh(b.alpha(i));
      for (Eigen::Index j = 0; j < b.x.cols(); ++j) w -= bform(form, b.x.col(j), w) * b.x.col(j);
      for (Eigen::Index j = 0; j < v.cols(); ++j) w += bform(form, v.col(j), w) * v.col(j);
      w /= std::sqrt(-qform(form, w));
      v.conservativeResize(n, v.cols() + 1);
      v.col(v.cols() - 1) = w;
    }
    return v;
  };
  const Mat v1 = normals(b1), v2 = normals(b2);
  if (v1.cols() != v2.cols())
    throw InvalidArgument("witt_isometry: spans of E u F have different dimensions");
  const auto [basis1, sig] = detail::witt_basis(form, b1.x, v1);
  const auto [basis2, sig2] = detail::witt_basis(form, b2.x, v2);
  (void)sig2;
  // basis1^{-1} = diag(sig) basis1^T Phi
  const Mat inv1 = sig.asDiagonal() * basis1.transpose() * form.phi();
  return Isometry(form, basis2 * inv1, std::max(tol.isometry, 1e-7));
}

// ---------------------------------------------------------------------------
// Random sampling. All randomness is seed-explicit.

namespace detail {

inline Mat random_orthogonal(int k, std::mt19937_64& rng) {
  std::normal_distribution<double> nd(0.0, 1.0);
  Mat g(k, k);
  for (int j = 0; j < k; ++j)
    for (int i = 0; i < k; ++i) g(i, j) = nd(rng);
  Eigen::HouseholderQR<Mat> qr(g);
  Mat q = qr.householderQ() * Mat::Identity(k, k);
  const Mat r = qr.matrixQR();
  for (int i = 0; i < k; ++i)
    if (r(i, i) < 0) q.col(i) = -q.col(i);
  return q;
}

}  // namespace detail

// Block rotation diag(A, B) with A in O(p), B in O(q); fixes E_0.
inline Isometry random_rotation(const SignatureForm& form, std::mt19937_64& rng) {
  Mat m = Mat::Zero(form.dim(), form.dim());
  m.topLeftCorner(form.p(), form.p()) = detail::random_orthogonal(form.p(), rng);
  m.bottomRightCorner(form.q(), form.q()) = detail::random_orthogonal(form.q(), rng);
  return Isometry(form, m);
}

inline FlatChart random_chart_at_base(const SignatureForm& form, std::mt19937_64& rng) {
  const int p = form.p(), q = form.q(), n = form.dim();
  Mat u = Mat::Zero(n, p), v = Mat::Zero(n, p);
  u.topRows(p) = detail::random_orthogonal(p, rng);
  v.bottomRows(q) = detail::random_orthogonal(q, rng).leftCols(p);
  return FlatChart{Point::base(form), u, v};
}

inline Point random_point(const SignatureForm& form, std::uint64_t seed, double spread) {
  if (!(spread >= 0)) throw InvalidArgument("random_point: spread must be >= 0");
  if (spread == 0) return Point::base(form);
  std::mt19937_64 rng(seed);
  const FlatChart chart = random_chart_at_base(form, rng);
  std::normal_distribution<double> nd(0.0, spread);
  Vec lambda(form.p());
  for (int i = 0; i < form.p(); ++i) lambda(i) = nd(rng);
  return exp_map(chart, lambda);
}

// Product of transvections and block rotations; `scale` bounds the
// translation length of each factor.
inline Isometry random_isometry(const SignatureForm& form, std::mt19937_64& rng, double scale = 1.0,
                                int factors = 3) {
  Isometry g = random_rotation(form, rng);
  std::normal_distribution<double> nd(0.0, scale);
  for (int k = 0; k < factors; ++k) {
    const FlatChart chart = random_chart_at_base(form, rng);
    Vec lambda(form.p());
    for (int i = 0; i < form.p(); ++i) lambda(i) = nd(rng);
    g = Isometry(form, flat_translation_matrix(chart, lambda)) * g;
    g = random_rotation(form, rng) * g;
  }
  return g;
}

}  // namespace hypgrass
