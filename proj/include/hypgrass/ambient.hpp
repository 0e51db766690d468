#pragma once

// Indefinite form of signature (p, q) on R^{p+q}: B(x, y) = x^T Phi y with
// Phi = diag(+1 x p, -1 x q). Everything here works on raw frames; the
// canonical (B-orthonormal) representatives live in space.hpp.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <string>

#include "hypgrass/errors.hpp"
#include "hypgrass/tolerance.hpp"

namespace hypgrass {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

class SignatureForm {
 public:
  SignatureForm() = default;
  SignatureForm(int p, int q) : p_(p), q_(q) {
    if (p < 1) throw InvalidArgument("signature needs p >= 1");
    if (q < p) throw InvalidArgument("signature needs q >= p");
  }

  int p() const { return p_; }
  int q() const { return q_; }
  int dim() const { return p_ + q_; }

  // +1 for the first p coordinates, -1 after.
  double sign(int i) const { return i < p_ ? 1.0 : -1.0; }

  Vec diagonal() const {
    Vec d(dim());
    for (int i = 0; i < dim(); ++i) d(i) = sign(i);
    return d;
  }
  Mat phi() const { return diagonal().asDiagonal(); }

  // Phi * A without forming Phi.
  Mat apply(const Mat& a) const {
    Mat r = a;
    r.bottomRows(q_) *= -1.0;
    return r;
  }
  Vec apply(const Vec& a) const {
    Vec r = a;
    r.tail(q_) *= -1.0;
    return r;
  }

  friend bool operator==(const SignatureForm& a, const SignatureForm& b) {
    return a.p_ == b.p_ && a.q_ == b.q_;
  }
  friend bool operator!=(const SignatureForm& a, const SignatureForm& b) { return !(a == b); }

 private:
  int p_ = 1;
  int q_ = 1;
};

namespace detail {

inline void require_rows(const SignatureForm& form, Eigen::Index rows, const char* what) {
  if (rows != form.dim())
    throw DimensionError(std::string(what) + ": expected " + std::to_string(form.dim()) +
                         " rows, got " + std::to_string(rows));
}

inline void require_same_form(const SignatureForm& a, const SignatureForm& b) {
  if (a != b) throw DimensionError("points live in different ambient forms");
}

}  // namespace detail

inline double bform(const SignatureForm& form, const Vec& x, const Vec& y) {
  detail::require_rows(form, x.size(), "bform");
  detail::require_rows(form, y.size(), "bform");
  return x.head(form.p()).dot(y.head(form.p())) - x.tail(form.q()).dot(y.tail(form.q()));
}

inline double qform(const SignatureForm& form, const Vec& x) { return bform(form, x, x); }

// A^T Phi A, symmetrised.
inline Mat gram(const SignatureForm& form, const Mat& a) {
  detail::require_rows(form, a.rows(), "gram");
  Mat g = a.transpose() * form.apply(a);
  return 0.5 * (g + g.transpose());
}

// A^T Phi B.
inline Mat cross_gram(const SignatureForm& form, const Mat& a, const Mat& b) {
  detail::require_rows(form, a.rows(), "cross_gram");
  detail::require_rows(form, b.rows(), "cross_gram");
  return a.transpose() * form.apply(b);
}

inline bool is_positive_definite(const Mat& m, double tol = 1e-10) {
  if (m.rows() != m.cols()) throw DimensionError("is_positive_definite: matrix not square");
  if (m.size() == 0) return true;
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > tol * scale)
    throw InvalidArgument("is_positive_definite: matrix not symmetric within tolerance");
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (m + m.transpose()), Eigen::EigenvaluesOnly);
  const Vec& ev = es.eigenvalues();
  const double top = std::max(1.0, ev.cwiseAbs().maxCoeff());
  return ev(0) > tol * top;
}

// Q-orthogonal projector onto span(A): A (A^T Phi A)^{-1} A^T Phi.
inline Mat q_projector(const SignatureForm& form, const Mat& a, double tol = 1e-10) {
  const Mat g = gram(form, a);
  Eigen::SelfAdjointEigenSolver<Mat> es(g, Eigen::EigenvaluesOnly);
  const Vec& ev = es.eigenvalues();
  const double top = std::max(1.0, ev.cwiseAbs().maxCoeff());
  if (ev.cwiseAbs().minCoeff() <= tol * top)
    throw DegenerateError("q_projector: restricted Gram matrix is singular");
  return a * g.ldlt().solve(a.transpose() * form.phi());
}

inline bool is_totally_isotropic(const SignatureForm& form, const Mat& a, double tol = 1e-10) {
  return gram(form, a).cwiseAbs().maxCoeff() <= tol;
}

// max |M^T Phi M - Phi|.
inline double check_isometry(const SignatureForm& form, const Mat& m) {
  if (m.rows() != form.dim() || m.cols() != form.dim())
    throw DimensionError("check_isometry: matrix must be (p+q)x(p+q)");
  return (m.transpose() * form.apply(m) - form.phi()).cwiseAbs().maxCoeff();
}

// Residual scaled by |M|^2, the natural size of rounding error in M^T Phi M.
inline double relative_isometry_residual(const SignatureForm& form, const Mat& m) {
  const double s = std::max(1.0, m.cwiseAbs().maxCoeff());
  return check_isometry(form, m) / (s * s);
}

// Largest principal angle (Euclidean) between column spans, as sin; 0 iff
// the spans agree. Used for flag and frame comparisons.
inline double subspace_distance(const Mat& a, const Mat& b) {
  if (a.rows() != b.rows()) throw DimensionError("subspace_distance: row mismatch");
  if (a.cols() != b.cols()) return 1.0;
  Eigen::HouseholderQR<Mat> qa(a), qb(b);
  const Mat ua = qa.householderQ() * Mat::Identity(a.rows(), a.cols());
  const Mat ub = qb.householderQ() * Mat::Identity(b.rows(), b.cols());
  return (ua * ua.transpose() - ub * ub.transpose()).norm() / std::sqrt(2.0);
}

}  // namespace hypgrass
