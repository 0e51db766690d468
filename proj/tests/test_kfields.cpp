#include <gtest/gtest.h>

#include "hypgrass/kfields.hpp"
#include "oracles.hpp"

using namespace hypgrass;

namespace {

// Random K-frame near the base: [I + noise; small noise], real storage,
// redrawn until the K-Gram matrix is comfortably positive definite.
Mat random_kframe(const KStructure& ks, std::mt19937_64& rng, double s = 0.12) {
  const int d = ks.d(), p = ks.form().p(), n = ks.form().dim();
  std::normal_distribution<double> nd;
  for (;;) {
    Mat f(d * n, p);
    for (Eigen::Index i = 0; i < f.rows(); ++i)
      for (Eigen::Index j = 0; j < f.cols(); ++j) f(i, j) = (i / d < p ? 0.15 : s) * nd(rng);
    for (int j = 0; j < p; ++j) f(d * j, j) += 1.0;
    const Mat g = gram(ks.real_form(), realify_frame(ks, f));
    if (Eigen::SelfAdjointEigenSolver<Mat>(g).eigenvalues()(0) > 0.1) return f;
  }
}

}  // namespace

TEST(KStructure, Relations) {
  for (Field k : {Field::R, Field::C, Field::H}) {
    const KStructure ks(k, SignatureForm(2, 3));
    EXPECT_LT(ks.structure_residual(), 1e-12) << field_name(k);
    EXPECT_EQ(ks.ops().size(), static_cast<std::size_t>(ks.d() - 1));
    EXPECT_EQ(ks.real_form().p(), 2 * ks.d());
  }
  EXPECT_THROW(parse_field("O"), InvalidArgument);
}

TEST(KStructure, QuaternionRightMultiplication) {
  // (1 + 2i + 3j + 4k) i = -2 + i + 4j - 3k; (...) j = -3 - 4i + j + 2k
  const KStructure ks(Field::H, SignatureForm(1, 1));
  Vec x(8);
  x << 1, 2, 3, 4, 0, 0, 0, 0;
  Vec xi = ks.ops()[0] * x, xj = ks.ops()[1] * x;
  EXPECT_EQ(xi.head(4), (Vec(4) << -2, 1, 4, -3).finished());
  EXPECT_EQ(xj.head(4), (Vec(4) << -3, -4, 1, 2).finished());
}

TEST(Realify, ComplexLineIsStandardPlane) {
  const KStructure ks(Field::C, SignatureForm(1, 1));
  Mat e = Mat::Zero(4, 1);
  e(0, 0) = 1;
  const Point r = realify_point(ks, e);
  EXPECT_LT(distance(r, Point::base(ks.real_form())), 1e-12);
}

TEST(Realify, HyperbolicPairDuplicatesAngle) {
  for (Field k : {Field::C, Field::H}) {
    const KStructure ks(k, SignatureForm(1, 1));
    const int d = ks.d();
    Mat e = Mat::Zero(2 * d, 1), f = Mat::Zero(2 * d, 1);
    e(0, 0) = 1;
    f(0, 0) = std::cosh(0.7);
    f(d, 0) = std::sinh(0.7);
    const auto real = principal_angles(realify_point(ks, e), realify_point(ks, f));
    EXPECT_EQ(real.alphas.size(), d);
    for (Eigen::Index i = 0; i < d; ++i) EXPECT_NEAR(real.alphas(i), 0.7, 1e-12);
    const auto a = angles_K(ks, e, f);
    ASSERT_EQ(a.alphas.size(), 1);
    EXPECT_NEAR(a.alphas(0), 0.7, 1e-12);
    EXPECT_NEAR(angles_K(ks, e, e).alphas(0), 0.0, 1e-12);
  }
}

TEST(Realify, StructureInvariantSpan) {
  std::mt19937_64 rng(3);
  for (Field k : {Field::C, Field::H}) {
    const KStructure ks(k, SignatureForm(2, 3));
    const Point r = realify_point(ks, random_kframe(ks, rng));
    EXPECT_LT(structure_invariance(ks, r), 1e-10);
  }
}

TEST(Realify, RejectsDegenerate) {
  const KStructure ks(Field::C, SignatureForm(1, 1));
  Mat e = Mat::Zero(4, 1);
  e(0, 0) = 1;
  e(2, 0) = 1;  // isotropic
  EXPECT_THROW(realify_point(ks, e), DegenerateError);
  EXPECT_THROW(realify_point(ks, Mat::Zero(3, 1)), DimensionError);
}

TEST(AnglesK, MultiplicityAndDistance) {
  std::mt19937_64 rng(11);
  for (auto [k, pairs] : {std::pair{Field::C, 50}, std::pair{Field::H, 20}}) {
    const KStructure ks(k, SignatureForm(2, 3));
    for (int t = 0; t < pairs; ++t) {
      const Mat e = random_kframe(ks, rng), f = random_kframe(ks, rng);
      const Point re = realify_point(ks, e), rf = realify_point(ks, f);
      const auto a = angles_K(ks, e, f);
      EXPECT_NEAR(distance_K(ks, e, f), distance(re, rf), 1e-8);
      // cross-check against the alternating projection oracle
      auto real = oracle::angles(ks.real_form(), re.frame(), rf.frame());
      std::sort(real.begin(), real.end(), std::greater<>());
      for (Eigen::Index i = 0; i < a.alphas.size(); ++i)
        for (int j = 0; j < ks.d(); ++j) EXPECT_NEAR(real[static_cast<std::size_t>(i * ks.d() + j)], a.alphas(i), 1e-6);
    }
  }
}

TEST(WittK, CommutesWithStructure) {
  std::mt19937_64 rng(19);
  for (Field k : {Field::C, Field::H}) {
    const KStructure ks(k, SignatureForm(2, 3));
    const Mat e = random_kframe(ks, rng), f = random_kframe(ks, rng);
    // a second pair with the same K-angles: move both by left multiplication
    // with a unit scalar, which is K-linear
    const Eigen::Index n = ks.real_form().dim();
    Mat li = Mat::Zero(n, n);
    for (Eigen::Index c = 0; c < n; c += ks.d()) {
      li(c + 1, c) = 1;
      li(c, c + 1) = -1;
      if (ks.d() == 4) {
        li(c + 3, c + 2) = 1;
        li(c + 2, c + 3) = -1;
      }
    }
    const Mat rot = std::cos(0.6) * Mat::Identity(n, n) + std::sin(0.6) * li;
    const Mat e2 = rot * e, f2 = rot * f;
    const Isometry g = witt_isometry_K(ks, e, f, e2, f2);
    EXPECT_LT(structure_commutator(ks, g), 1e-8) << field_name(k);
    EXPECT_LT(distance(g.apply(realify_point(ks, e)), realify_point(ks, e2)), 1e-8);
    EXPECT_LT(distance(g.apply(realify_point(ks, f)), realify_point(ks, f2)), 1e-8);
  }
}

TEST(WittK, RejectsDifferentSpectra) {
  const KStructure ks(Field::C, SignatureForm(1, 2));
  Mat e = Mat::Zero(6, 1), f = Mat::Zero(6, 1), g = Mat::Zero(6, 1);
  e(0, 0) = 1;
  f(0, 0) = std::cosh(0.3);
  f(2, 0) = std::sinh(0.3);
  g(0, 0) = std::cosh(0.9);
  g(2, 0) = std::sinh(0.9);
  EXPECT_THROW(witt_isometry_K(ks, e, f, e, g), InvalidArgument);
}
