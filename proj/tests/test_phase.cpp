#include <gtest/gtest.h>

#include <random>

#include "pfio/phase.hpp"

using namespace pfio;

namespace {
Vec v2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}
Vec v4(double a, double b, double c, double d) {
  Vec v(4);
  v << a, b, c, d;
  return v;
}
}  // namespace

TEST(EvalPhase, LinearAndHalfWave) {
  auto lin = ProductPhase::make({phases::linear(2)});
  EXPECT_DOUBLE_EQ(eval_phase(lin, v2(1, 2), v2(3, 4)), 11.0);
  auto hw = ProductPhase::make({phases::half_wave(2)});
  EXPECT_DOUBLE_EQ(eval_phase(hw, v2(0, 0), v2(3, 4)), 5.0);
}

TEST(EvalPhase, ProductEqualsSumOfFactors) {
  auto shape = ProductSpaceShape::make({2, 2});
  auto p = ProductPhase::uniform(shape, [](int d) { return phases::half_wave(d); });
  Vec x = v4(0.3, -0.2, 1.1, 0.5), xi = v4(1.0, 2.0, -3.0, 0.5);
  // per-factor oracle written out
  double expect = (0.3 * 1.0 - 0.2 * 2.0 + std::sqrt(5.0)) + (1.1 * -3.0 + 0.5 * 0.5 + std::sqrt(9.25));
  EXPECT_NEAR(eval_phase(p, x, xi), expect, 1e-14);
}

TEST(EvalPhase, ZeroBlockIsSingular) {
  auto p = ProductPhase::uniform(ProductSpaceShape::make({2, 1}), [](int d) { return phases::half_wave(d); });
  Vec xi(3);
  xi << 1.0, 2.0, 0.0;
  EXPECT_THROW(eval_phase(p, Vec::Zero(3), xi), SingularArgument);
}

TEST(Homogeneity, BuiltinsPassBrokenFails) {
  for (const auto& f : {phases::linear(2), phases::half_wave(2, -1), phases::half_wave(3), phases::perturbed(2, 0.1),
                        phases::translation(v2(0.5, -1.0))}) {
    auto r = check_homogeneity(f, 200, {0.5, 2.0, 7.0});
    EXPECT_TRUE(r.pass) << to_string(f.kind) << " " << r.max_eval_violation;
  }
  auto broken = phases::custom(
      2, [](const Vec& x, const Vec& xi) { return x.dot(xi) + xi.squaredNorm(); },
      [](const Vec& x, const Vec& xi) { return Vec(x + 2.0 * xi); }, [](const Vec&, const Vec& xi) { return xi; });
  auto r = check_homogeneity(broken, 50, {2.0});
  EXPECT_FALSE(r.pass);
  EXPECT_GT(r.max_eval_violation, 0.1);
}

TEST(Nondegeneracy, LinearInXHasIdentityHessian) {
  std::vector<Vec> xs{v2(0, 0), v2(0.5, -0.3)};
  auto dirs = direction_net(2, 12);
  for (const auto& f : {phases::linear(2), phases::half_wave(2), phases::translation(v2(1, 1))}) {
    auto r = check_nondegeneracy(f, xs, dirs);
    EXPECT_TRUE(r.pass);
    EXPECT_DOUBLE_EQ(r.min_abs_det, 1.0);
    EXPECT_EQ(f.mixed_hessian(xs[1], dirs[3]), Mat(Mat::Identity(2, 2)));
  }
}

TEST(Nondegeneracy, PerturbedMatchesAnalyticHessian) {
  const double eps = 0.1;
  auto f = phases::perturbed(2, eps);
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-0.9, 0.9);
  double min_det = 1e9;
  for (int k = 0; k < 50; ++k) {
    Vec x = v2(u(rng), u(rng) * 0.5);
    Vec xi = v2(std::cos(k), std::sin(k));
    // d^2/dx_j dxi_k = delta_jk + eps d_j g(x) xi_k/|xi|, g = bump(|x|)
    double r = x.norm();
    double db = bump_derivative(r);
    Mat H(2, 2);
    for (int j = 0; j < 2; ++j)
      for (int l = 0; l < 2; ++l) H(j, l) = (j == l) + eps * db * x[j] / r * xi[l] / xi.norm();
    Mat Hfd = mixed_hessian_fd(f, x, xi, 1e-4);
    EXPECT_LT((H - Hfd).cwiseAbs().maxCoeff(), 1e-6);
    min_det = std::min(min_det, std::abs(H.determinant()));
  }
  std::vector<Vec> xs;
  for (int k = 0; k < 20; ++k) xs.push_back(v2(u(rng), u(rng)));
  auto rep = check_nondegeneracy(f, xs, direction_net(2, 16));
  EXPECT_TRUE(rep.used_finite_differences);
  EXPECT_TRUE(rep.pass);
  // det = 1 + eps grad g . xi/|xi| >= 1 - eps sup|bump'|
  double dsup = 0.0;
  for (double r = 0.0; r < 1.0; r += 1e-5) dsup = std::max(dsup, std::abs(bump_derivative(r)));
  EXPECT_GE(rep.min_abs_det, 1.0 - eps * dsup - 1e-6);
  EXPECT_LE(rep.min_abs_det, 1.0 - 0.5 * eps * dsup);
}

TEST(Nondegeneracy, ZeroDirectionRejected) {
  EXPECT_THROW(check_nondegeneracy(phases::half_wave(2), {v2(0, 0)}, {v2(0, 0)}), SingularArgument);
}

TEST(PerturbedPhase, EpsilonCap) { EXPECT_THROW(phases::perturbed(2, 0.2), DomainError); }

TEST(SingularLocus, Linear) {
  auto p = ProductPhase::make({phases::linear(2)});
  for (const auto& s : sample_singular_locus(p, v2(0.4, -1.0), 16)) EXPECT_LT((s - v2(0.4, -1.0)).norm(), 1e-15);
}

TEST(SingularLocus, HalfWaveCircleAndTorus) {
  auto p = ProductPhase::make({phases::half_wave(2)});
  auto pts = sample_singular_locus(p, v2(0, 0), 24);
  EXPECT_EQ(pts.size(), 24u);
  for (const auto& s : pts) EXPECT_NEAR(s.norm(), 1.0, 1e-14);

  auto shape = ProductSpaceShape::make({2, 2});
  auto pp = ProductPhase::uniform(shape, [](int d) { return phases::half_wave(d); });
  Vec x = v4(1.0, 0.0, 0.0, -2.0);
  auto torus = sample_singular_locus(pp, x, 8);
  EXPECT_EQ(torus.size(), 64u);
  for (const auto& s : torus) {
    EXPECT_NEAR((shape.block(s, 0) - shape.block(x, 0)).norm(), 1.0, 1e-14);
    EXPECT_NEAR((shape.block(s, 1) - shape.block(x, 1)).norm(), 1.0, 1e-14);
  }
}

TEST(SingularLocus, InvariantUnderDilation) {
  auto p = ProductPhase::uniform(ProductSpaceShape::make({2, 3}),
                                 [](int d) { return phases::perturbed(d, 0.05); });
  Vec x(5);
  x << 0.2, 0.1, -0.3, 0.4, 0.0;
  auto a = sample_singular_locus(p, x, 10, 1.0);
  auto b = sample_singular_locus(p, x, 10, 37.5);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t k = 0; k < a.size(); ++k) EXPECT_LT((a[k] - b[k]).norm(), 1e-14);
}

TEST(ConeSeparation, LinearRatioIsOne) {
  auto p = ProductPhase::make({phases::linear(2)});
  auto r = verify_cone_separation(p, v2(1, 0), 0.1, 500);
  EXPECT_TRUE(r.pass);
  EXPECT_NEAR(r.min_ratio, 1.0, 1e-12);
}

TEST(ConeSeparation, HalfWaveAndWideAperture) {
  auto p = ProductPhase::make({phases::half_wave(2)});
  auto r = verify_cone_separation(p, v2(1, 1), 0.1, 2000);
  EXPECT_GE(r.min_ratio, 0.5);
  auto w = verify_cone_separation(p, v2(1, 1), 0.999, 2000);
  EXPECT_TRUE(w.pass);
  auto q = verify_cone_separation(ProductPhase::make({phases::perturbed(2, 0.1)}), v2(0, 1), 0.1, 2000);
  EXPECT_TRUE(q.pass);
  double dsup = 0.0;
  for (double r = 0.0; r < 1.0; r += 1e-5) dsup = std::max(dsup, std::abs(bump_derivative(r)));
  // |grad g| ||xi| - |eta|| <= sup|bump'| |xi - eta|
  EXPECT_GE(q.min_ratio, 1.0 - 0.1 * dsup);
  EXPECT_THROW(verify_cone_separation(p, v2(1, 0), 1.0, 10), DomainError);
}
