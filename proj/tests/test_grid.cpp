#include <gtest/gtest.h>

#include <random>

#include "pfio/grid.hpp"
#include "pfio/mollifier.hpp"

using namespace pfio;

namespace {

SampledField random_field(const GridSpec& g, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  SampledField f(g, Domain::physical);
  for (auto& z : f.values) z = Complex(nd(rng), nd(rng));
  return f;
}

// O(P^2) centered transform, independent of the FFT path
SampledField direct_forward(const SampledField& f) {
  SampledField out(f.grid, Domain::frequency);
  for_each_point(f.grid, Domain::frequency, [&](std::size_t l, const Vec& xi) {
    Complex s = 0.0;
    for_each_point(f.grid, Domain::physical,
                   [&](std::size_t k, const Vec& x) { s += f.values[k] * std::polar(1.0, -kTwoPi * x.dot(xi)); });
    out.values[l] = s * f.grid.cell_volume();
  });
  return out;
}

}  // namespace

TEST(ProductShape, RejectsBadBlocks) {
  EXPECT_THROW(ProductSpaceShape::make({}), SizingError);
  EXPECT_THROW(ProductSpaceShape::make({2, 0}), SizingError);
  auto s = ProductSpaceShape::make({2, 1, 3});
  EXPECT_EQ(s.total_dim(), 6);
  EXPECT_EQ(s.offset(2), 3);
}

TEST(MakeGrid, SpacingAndNyquist) {
  auto g = make_grid(ProductSpaceShape::make({2}), 64, 2.0);
  EXPECT_DOUBLE_EQ(g.spacing(0), 1.0 / 16.0);
  EXPECT_DOUBLE_EQ(g.dual_spacing(0), 0.25);
  EXPECT_DOUBLE_EQ(g.nyquist(0), 8.0);
  EXPECT_DOUBLE_EQ(g.coord(0, 32), 0.0);
  EXPECT_DOUBLE_EQ(g.coord(0, 0), -2.0);
}

TEST(MakeGrid, RejectsOddOrTinyCounts) {
  auto s = ProductSpaceShape::make({1});
  EXPECT_THROW(make_grid(s, 63, 1.0), SizingError);
  EXPECT_THROW(make_grid(s, 6, 1.0), SizingError);
  EXPECT_THROW(make_grid(s, 64, 0.0), SizingError);
  EXPECT_THROW(make_grid(ProductSpaceShape::make({1, 1}), std::vector<int>{8, 8, 8}, std::vector<double>{1.0}),
               SizingError);
}

TEST(Transform, MatchesDirectSum) {
  auto g = make_grid(ProductSpaceShape::make({1, 1}), std::vector<int>{8, 12}, std::vector<double>{1.0, 1.5});
  auto f = random_field(g, 3);
  auto a = forward_transform(f);
  auto b = direct_forward(f);
  double err = 0.0, nrm = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    err = std::max(err, std::abs(a[k] - b[k]));
    nrm = std::max(nrm, std::abs(b[k]));
  }
  EXPECT_LT(err / nrm, 1e-12);
}

TEST(Transform, PlancherelAndRoundTrip) {
  auto g = make_grid(ProductSpaceShape::make({2}), 32, 1.0);
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    auto f = random_field(g, seed);
    auto F = forward_transform(f);
    EXPECT_NEAR(lp_norm(F, 2) / lp_norm(f, 2), 1.0, 1e-10);
    auto back = inverse_transform(F);
    double err = 0.0;
    for (std::size_t k = 0; k < f.size(); ++k) err = std::max(err, std::abs(back[k] - f[k]));
    EXPECT_LT(err / lp_norm(f, INFINITY), 1e-12);
  }
}

TEST(Transform, GaussianIsSelfDual) {
  // exp(-pi |x|^2) is its own transform
  auto g = make_grid(ProductSpaceShape::make({1}), 128, 6.0);
  auto f = SampledField::from_function(g, Domain::physical,
                                       [](const Vec& x) { return Complex(std::exp(-kPi * x.squaredNorm())); });
  auto F = forward_transform(f);
  for_each_point(g, Domain::frequency, [&](std::size_t k, const Vec& xi) {
    EXPECT_NEAR(std::abs(F[k] - std::exp(-kPi * xi.squaredNorm())), 0.0, 1e-12);
  });
}

TEST(Transform, DomainTagIsChecked) {
  auto g = make_grid(ProductSpaceShape::make({1}), 16, 1.0);
  SampledField f(g, Domain::frequency);
  EXPECT_THROW(forward_transform(f), DomainError);
  EXPECT_THROW(inverse_transform(SampledField(g, Domain::physical)), DomainError);
}

TEST(LpNorm, ConstantFieldAndHomogeneity) {
  auto g = make_grid(ProductSpaceShape::make({2}), 16, 1.0);
  SampledField one(g, Domain::physical);
  for (auto& z : one.values) z = 1.0;
  // |[-1,1)^2| = 4
  EXPECT_NEAR(lp_norm(one, 1), 4.0, 1e-12);
  EXPECT_NEAR(lp_norm(one, 2), 2.0, 1e-12);
  EXPECT_DOUBLE_EQ(lp_norm(one, INFINITY), 1.0);
  EXPECT_THROW(lp_norm(one, 0.5), DomainError);
  auto f = random_field(g, 9);
  SampledField cf = f;
  const Complex c(-2.5, 1.0);
  for (auto& z : cf.values) z *= c;
  for (double p : {1.0, 1.5, 2.0, 4.0, 10.0}) EXPECT_NEAR(lp_norm(cf, p), std::abs(c) * lp_norm(f, p), 1e-12 * lp_norm(cf, p));
}

TEST(Mollifier, ValuesAndSupport) {
  EXPECT_EQ(psi0(0.3), 1.0);
  EXPECT_EQ(psi0(2.0), 0.0);
  EXPECT_NEAR(psi0(1.5), 0.5, 1e-15);
  EXPECT_EQ(bump_phi(0.25), 0.0);
  EXPECT_EQ(bump_phi(4.0), 0.0);
  EXPECT_EQ(bump_phi(1.0), 1.0);
  EXPECT_EQ(bump(0.0), 1.0);
  EXPECT_EQ(bump(1.0), 0.0);
  for (double r = 1.0; r < 2.0; r += 0.01) EXPECT_GE(psi0(r), psi0(r + 0.01));
}

TEST(Mollifier, TelescopingIsExact) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.0, 8192.0);
  for (int k = 0; k < 2000; ++k) {
    double r = u(rng);
    double s = psi0(2.0 * r);
    for (int j = 0; j <= 12; ++j) s += bump_phi(std::exp2(-j) * r);
    EXPECT_NEAR(s, psi0(std::exp2(-12) * r), 1e-12);
  }
}

TEST(Mollifier, TaperPlateau) {
  EXPECT_EQ(nyquist_taper(0.79, 1.0, 0.8), 1.0);
  EXPECT_EQ(nyquist_taper(1.0, 1.0, 0.8), 0.0);
  EXPECT_NEAR(nyquist_taper(0.9, 1.0, 0.8), 0.5, 1e-15);
}
