#pragma once

// Slow reference computations used only by the tests.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "hypgrass/ambient.hpp"

namespace oracle {

using hypgrass::Mat;
using hypgrass::SignatureForm;
using hypgrass::Vec;

// Principal angles by alternating projections: on the current B-orthogonal
// complements, iterate x <- P_E y, y <- P_F x (normalised) to the top pair,
// record acosh B(x, y), then deflate.
inline std::vector<double> angles(const SignatureForm& form, const Mat& e, const Mat& f,
                                  int iters = 4000) {
  Mat ee = e, ff = f;
  std::vector<double> out;
  const int p = static_cast<int>(e.cols());
  for (int k = 0; k < p; ++k) {
    const Mat pe = hypgrass::q_projector(form, ee);
    const Mat pf = hypgrass::q_projector(form, ff);
    Vec x = ee.col(0) + 0.37 * ee.rightCols(1).col(0);
    for (Eigen::Index j = 1; j < ee.cols(); ++j) x += (0.1 * j) * ee.col(j);
    x /= std::sqrt(hypgrass::qform(form, x));
    Vec y = pf * x;
    for (int it = 0; it < iters; ++it) {
      y = pf * x;
      y /= std::sqrt(hypgrass::qform(form, y));
      x = pe * y;
      x /= std::sqrt(hypgrass::qform(form, x));
    }
    y = pf * x;
    y /= std::sqrt(hypgrass::qform(form, y));
    const double c = std::abs(hypgrass::bform(form, x, y));
    out.push_back(std::acosh(std::max(1.0, c)));
    if (k + 1 == p) break;
    // complements of x in E and of y in F
    auto deflate = [&](const Mat& basis, const Vec& w) {
      Mat r(basis.rows(), 0);
      Mat cand = basis - w * (w.transpose() * form.apply(basis));
      Eigen::JacobiSVD<Mat> svd(cand, Eigen::ComputeThinU);
      r = svd.matrixU().leftCols(basis.cols() - 1);
      return r;
    };
    ee = deflate(ee, x);
    ff = deflate(ff, y);
  }
  std::sort(out.begin(), out.end(), std::greater<>());
  return out;
}

inline Mat random_matrix(int r, int c, std::mt19937_64& rng, double s = 1.0) {
  std::normal_distribution<double> nd(0.0, s);
  Mat m(r, c);
  for (int j = 0; j < c; ++j)
    for (int i = 0; i < r; ++i) m(i, j) = nd(rng);
  return m;
}

// Frame of a point: [I; small random block] so the form stays positive.
inline Mat random_frame(const SignatureForm& form, std::mt19937_64& rng, double s = 0.15) {
  Mat a(form.dim(), form.p());
  a.topRows(form.p()) = Mat::Identity(form.p(), form.p()) + random_matrix(form.p(), form.p(), rng, 0.2);
  a.bottomRows(form.q()) = random_matrix(form.q(), form.p(), rng, s);
  return a;
}

}  // namespace oracle
