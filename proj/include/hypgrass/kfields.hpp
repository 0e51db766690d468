#pragma once

// Complex and quaternionic points through realification.
//
// K^n is a right K-vector space stored as R^{dn}: coordinate k occupies rows
// d*k .. d*k+d-1 as (a, b) for a + bi, or (a, b, c, d) for a + bi + cj + dk.
// A K-frame is a real dn x p matrix whose columns are the K-basis vectors.
// The structure maps are right multiplications, so K-linear maps are the
// real matrices commuting with them.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>
#include <string>
#include <vector>

#include "hypgrass/space.hpp"

namespace hypgrass {

enum class Field { R, C, H };

inline std::string field_name(Field k) {
  switch (k) {
    case Field::R: return "R";
    case Field::C: return "C";
    default: return "H";
  }
}

inline Field parse_field(const std::string& s) {
  if (s == "R") return Field::R;
  if (s == "C") return Field::C;
  if (s == "H") return Field::H;
  throw InvalidArgument("unknown field '" + s + "' (expected R, C or H)");
}

class KStructure {
 public:
  KStructure(Field kind, const SignatureForm& form) : kind_(kind), form_(form) {
    d_ = kind == Field::R ? 1 : kind == Field::C ? 2 : 4;
    real_ = SignatureForm(d_ * form.p(), d_ * form.q());
    const Eigen::Index n = form.dim();
    if (kind == Field::C) {
      Mat ri(2, 2);
      ri << 0, -1, 1, 0;
      ops_.push_back(kron_identity(n, ri));
    } else if (kind == Field::H) {
      // right multiplication by i and by j on one quaternion coordinate
      Mat ri = Mat::Zero(4, 4), rj = Mat::Zero(4, 4);
      ri(0, 1) = -1; ri(1, 0) = 1; ri(2, 3) = 1; ri(3, 2) = -1;
      rj(0, 2) = -1; rj(1, 3) = -1; rj(2, 0) = 1; rj(3, 1) = 1;
      const Mat a = kron_identity(n, ri), b = kron_identity(n, rj);
      ops_ = {a, b, a * b};
    }
  }

  Field kind() const { return kind_; }
  int d() const { return d_; }
  const SignatureForm& form() const { return form_; }
  const SignatureForm& real_form() const { return real_; }
  const std::vector<Mat>& ops() const { return ops_; }

  // max deviation from J^2 = -1, J^T Phi J = Phi and, for H, IJ = K, IJ = -JI.
  double structure_residual() const {
    const Eigen::Index n = real_.dim();
    const Mat id = Mat::Identity(n, n), phi = real_.phi();
    double r = 0;
    for (const auto& j : ops_) {
      r = std::max(r, (j * j + id).cwiseAbs().maxCoeff());
      r = std::max(r, (j.transpose() * phi * j - phi).cwiseAbs().maxCoeff());
    }
    if (ops_.size() == 3) {
      r = std::max(r, (ops_[0] * ops_[1] - ops_[2]).cwiseAbs().maxCoeff());
      r = std::max(r, (ops_[0] * ops_[1] + ops_[1] * ops_[0]).cwiseAbs().maxCoeff());
    }
    return r;
  }

  // v, then its images under the structure maps.
  Mat orbit(const Vec& v) const {
    Mat o(v.size(), d_);
    o.col(0) = v;
    for (std::size_t k = 0; k < ops_.size(); ++k) o.col(static_cast<Eigen::Index>(k) + 1) = ops_[k] * v;
    return o;
  }

 private:
  static Mat kron_identity(Eigen::Index n, const Mat& block) {
    const Eigen::Index b = block.rows();
    Mat m = Mat::Zero(n * b, n * b);
    for (Eigen::Index k = 0; k < n; ++k) m.block(k * b, k * b, b, b) = block;
    return m;
  }

  Field kind_;
  SignatureForm form_;
  SignatureForm real_;
  int d_ = 1;
  std::vector<Mat> ops_;
};

// Real storage of a complex matrix.
inline Mat from_complex(const Eigen::MatrixXcd& z) {
  Mat m(2 * z.rows(), z.cols());
  for (Eigen::Index i = 0; i < z.rows(); ++i)
    for (Eigen::Index j = 0; j < z.cols(); ++j) {
      m(2 * i, j) = z(i, j).real();
      m(2 * i + 1, j) = z(i, j).imag();
    }
  return m;
}

// Interleaves each column with its structure images: (x1, Ix1, Jx1, Kx1, x2, ...).
inline Mat realify_frame(const KStructure& ks, const Mat& kframe) {
  const Eigen::Index n = ks.real_form().dim();
  if (kframe.rows() != n)
    throw DimensionError("K-frame: expected " + std::to_string(n) + " real rows, got " + std::to_string(kframe.rows()));
  if (kframe.cols() != ks.form().p())
    throw DimensionError("K-frame: expected " + std::to_string(ks.form().p()) + " columns");
  Mat r(n, ks.d() * kframe.cols());
  for (Eigen::Index i = 0; i < kframe.cols(); ++i) r.middleCols(i * ks.d(), ks.d()) = ks.orbit(kframe.col(i));
  return r;
}

inline Point realify_point(const KStructure& ks, const Mat& kframe, const Tolerance& tol = {}) {
  const Mat r = realify_frame(ks, kframe);
  if (!r.allFinite()) throw InvalidArgument("K-frame has non-finite entries");
  if (!is_positive_definite(gram(ks.real_form(), r), tol.eig))
    throw DegenerateError("K-frame: K-Gram matrix is not positive definite");
  return Point(ks.real_form(), r);
}

// Largest frame distance between span(x) and its images under the structure maps.
inline double structure_invariance(const KStructure& ks, const Point& x) {
  double r = 0;
  for (const auto& j : ks.ops()) r = std::max(r, subspace_distance(x.frame(), j * x.frame()));
  return r;
}

namespace detail {

// Groups of equal values (relative tolerance) in an ascending vector.
inline std::vector<std::vector<Eigen::Index>> clusters(const Vec& s, double tol) {
  std::vector<std::vector<Eigen::Index>> out;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (out.empty() || s(i) - s(out.back().front()) > tol * (1.0 + std::abs(s(i)))) out.emplace_back();
    out.back().push_back(i);
  }
  return out;
}

// Sorted real sinh spectrum and matching directions of the realified pair.
inline std::pair<Vec, Mat> sorted_angle_eig(const Point& e, const Point& f, const Tolerance& tol) {
  const auto ae = angle_eig(e, f, tol);
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(ae.sinh.size()));
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](auto a, auto b) { return ae.sinh(a) < ae.sinh(b); });
  Vec s(ae.sinh.size());
  Mat x(e.frame().rows(), ae.sinh.size());
  const Mat dirs = e.frame() * ae.coeff.leftCols(ae.sinh.size());
  for (std::size_t k = 0; k < idx.size(); ++k) {
    s(static_cast<Eigen::Index>(k)) = ae.sinh(idx[k]);
    x.col(static_cast<Eigen::Index>(k)) = dirs.col(idx[k]);
  }
  return {s, x};
}

// Q-orthonormal structure orbits spanning the columns of `cand`, kept
// B-orthogonal to `have` (whose columns have Q = sign).
inline Mat orbit_basis(const KStructure& ks, const Mat& cand, const Mat& have, double sign, Eigen::Index want) {
  const SignatureForm& form = ks.real_form();
  Mat basis = have;
  Mat added(form.dim(), 0);
  const double thresh = 0.25;
  for (Eigen::Index c = 0; c < cand.cols() && added.cols() < want; ++c) {
    Vec r = cand.col(c);
    for (int pass = 0; pass < 2; ++pass)
      for (Eigen::Index j = 0; j < basis.cols(); ++j) r -= sign * bform(form, basis.col(j), r) * basis.col(j);
    const double qn = sign * qform(form, r);
    if (qn < thresh * std::max(1.0, sign * qform(form, cand.col(c)))) continue;
    r /= std::sqrt(qn);
    const Mat o = ks.orbit(r);
    basis.conservativeResize(Eigen::NoChange, basis.cols() + o.cols());
    basis.rightCols(o.cols()) = o;
    added.conservativeResize(Eigen::NoChange, added.cols() + o.cols());
    added.rightCols(o.cols()) = o;
  }
  return added;
}

struct KBiorthogonal {
  Vec alpha;  // K-angles, ascending, length p
  Mat x;      // dp columns, structure orbits of a K-basis of E
  Mat v;      // unit normals for the non-zero angles (orbits)
};

inline KBiorthogonal k_biorthogonal(const KStructure& ks, const Point& e, const Point& f, const Tolerance& tol) {
  const SignatureForm& form = ks.real_form();
  const int d = ks.d();
  auto [s, dirs] = sorted_angle_eig(e, f, tol);
  KBiorthogonal out{Vec(ks.form().p()), Mat(form.dim(), 0), Mat(form.dim(), 0)};
  Eigen::Index filled = 0;
  for (const auto& cl : clusters(s, tol.cluster)) {
    if (cl.size() % static_cast<std::size_t>(d) != 0)
      throw NumericsError("K-angles: real spectrum multiplicity is not a multiple of " + std::to_string(d));
    Mat cand(form.dim(), static_cast<Eigen::Index>(cl.size()));
    double mean = 0;
    for (std::size_t k = 0; k < cl.size(); ++k) {
      cand.col(static_cast<Eigen::Index>(k)) = dirs.col(cl[k]);
      mean += s(cl[k]) / static_cast<double>(cl.size());
    }
    const Mat add = orbit_basis(ks, cand, out.x, 1.0, static_cast<Eigen::Index>(cl.size()));
    if (add.cols() != static_cast<Eigen::Index>(cl.size()))
      throw NumericsError("K-angles: angle cluster is not a K-subspace");
    out.x.conservativeResize(Eigen::NoChange, out.x.cols() + add.cols());
    out.x.rightCols(add.cols()) = add;
    for (std::size_t k = 0; k < cl.size() / static_cast<std::size_t>(d); ++k) out.alpha(filled++) = angle_from_sinh(mean);
  }
  // normals: (P_F x / cosh(a) - cosh(a) x) / sinh(a), commuting with the structure
  const Mat pf = f.projector();
  for (Eigen::Index i = 0; i < out.alpha.size(); ++i) {
    const double a = out.alpha(i);
    if (a <= tol.angle_zero) continue;
    Mat o(form.dim(), d);
    for (int k = 0; k < d; ++k) {
      const Vec xk = out.x.col(i * d + k);
      o.col(k) = (pf * xk / std::cosh(a) - std::cosh(a) * xk) / std::sinh(a);
    }
    const Mat add = orbit_basis(ks, o.leftCols(1), out.v, -1.0, d);
    if (add.cols() != d) throw NumericsError("K-angles: degenerate normal direction");
    out.v.conservativeResize(Eigen::NoChange, out.v.cols() + d);
    out.v.rightCols(d) = add;
  }
  return out;
}

}  // namespace detail

// Deduplicated spectrum (length p) of a K-pair; each real angle must occur d times.
inline AngleSpectrum angles_K(const KStructure& ks, const Mat& e, const Mat& f, const Tolerance& tol = {}) {
  const Point re = realify_point(ks, e, tol), rf = realify_point(ks, f, tol);
  const auto [s, dirs] = detail::sorted_angle_eig(re, rf, tol);
  (void)dirs;
  const int d = ks.d();
  Vec alpha(ks.form().p());
  for (Eigen::Index i = 0; i < alpha.size(); ++i) {
    const auto block = s.segment(i * d, d);
    if (block.maxCoeff() - block.minCoeff() > tol.cluster * (1.0 + block.maxCoeff()))
      throw NumericsError("angles_K: real spectrum does not have multiplicity " + std::to_string(d));
    alpha(i) = detail::angle_from_sinh(block.mean());
  }
  std::sort(alpha.begin(), alpha.end(), std::greater<>());
  return AngleSpectrum{alpha};
}

inline double distance_K(const KStructure& ks, const Mat& e, const Mat& f, const Tolerance& tol = {}) {
  const Vec a = angles_K(ks, e, f, tol).alphas;
  return std::sqrt(2.0 * ks.d() * a.squaredNorm());
}

// K-linear g in O(dp, dq) with g E = E2 and g F = F2; requires equal K-angles.
inline Isometry witt_isometry_K(const KStructure& ks, const Mat& e, const Mat& f, const Mat& e2, const Mat& f2,
                                const Tolerance& tol = {}) {
  const SignatureForm& form = ks.real_form();
  const auto b1 = detail::k_biorthogonal(ks, realify_point(ks, e, tol), realify_point(ks, f, tol), tol);
  const auto b2 = detail::k_biorthogonal(ks, realify_point(ks, e2, tol), realify_point(ks, f2, tol), tol);
  if ((b1.alpha - b2.alpha).cwiseAbs().maxCoeff() > 1e-6)
    throw InvalidArgument("witt_isometry_K: angle spectra differ");
  if (b1.v.cols() != b2.v.cols())
    throw InvalidArgument("witt_isometry_K: spans of E u F have different dimensions");
  const Eigen::Index n = form.dim();
  auto full = [&](const detail::KBiorthogonal& b) {
    // candidates e_{p+1..n}, e_1..e_p, taken off span(x); orbits of x are
    // closed, so structure images stay B-orthogonal to x
    Mat cand(n, n);
    cand << Mat::Identity(n, n).rightCols(form.q()), Mat::Identity(n, n).leftCols(form.p());
    for (Eigen::Index c = 0; c < n; ++c)
      for (Eigen::Index k = 0; k < b.x.cols(); ++k) cand.col(c) -= bform(form, b.x.col(k), cand.col(c)) * b.x.col(k);
    const Eigen::Index rest = n - b.x.cols() - b.v.cols();
    const Mat comp = detail::orbit_basis(ks, cand, b.v, -1.0, rest);
    if (comp.cols() != rest) throw NumericsError("witt_isometry_K: could not complete the basis");
    Mat basis(n, n);
    basis << b.x, b.v, comp;
    return basis;
  };
  const Mat basis1 = full(b1), basis2 = full(b2);
  Vec sig(n);
  sig.head(b1.x.cols()).setOnes();
  sig.tail(n - b1.x.cols()).setConstant(-1.0);
  const Mat inv1 = sig.asDiagonal() * basis1.transpose() * form.phi();
  return Isometry(form, basis2 * inv1, std::max(tol.isometry, 1e-7));
}

// max |g J - J g| over the structure maps.
inline double structure_commutator(const KStructure& ks, const Isometry& g) {
  double r = 0;
  for (const auto& j : ks.ops()) r = std::max(r, (g.matrix() * j - j * g.matrix()).cwiseAbs().maxCoeff());
  return r;
}

}  // namespace hypgrass
