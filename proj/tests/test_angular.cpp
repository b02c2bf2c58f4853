#include <gtest/gtest.h>

#include <random>

#include "pfio/angular.hpp"
#include "pfio/fit.hpp"

using namespace pfio;

namespace {
Vec vec(std::initializer_list<double> l) {
  Vec v(static_cast<int>(l.size()));
  int k = 0;
  for (double a : l) v[k++] = a;
  return v;
}
std::vector<Vec> random_units(int dim, int count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  std::vector<Vec> out;
  for (int k = 0; k < count; ++k) {
    Vec v(dim);
    for (int a = 0; a < dim; ++a) v[a] = nd(rng);
    out.push_back(v / v.norm());
  }
  return out;
}
}  // namespace

TEST(Net, CountsAndGrowth) {
  EXPECT_EQ(build_net(2, 2).size(), 13u);
  double ratio = double(build_net(2, 4).size()) / build_net(2, 2).size();
  // spacing 2^{-s/2} on the circle: two levels double the count
  EXPECT_NEAR(ratio, 2.0, 0.1);
  for (int dim : {2, 3})
    for (int s = 1; s <= 6; ++s) {
      double r = double(build_net(dim, s + 2).size()) / build_net(dim, s).size();
      double target = std::exp2(dim - 1);
      EXPECT_GE(r, 0.7 * target);
      EXPECT_LE(r, 1.5 * target);
    }
  EXPECT_THROW(build_net(1, 2), DomainError);
  EXPECT_THROW(build_net(4, 2), DomainError);
}

TEST(Net, CoveringRadius) {
  for (int dim : {2, 3})
    for (int s : {1, 3, 6}) {
      auto net = build_net(dim, s);
      for (const auto& u : random_units(dim, 2000, 5 + s)) {
        double best = 1e9;
        for (const auto& p : net.points) best = std::min(best, (u - p).norm());
        EXPECT_LE(best, net.cone_radius());
      }
    }
}

TEST(ChiCutoff, PartitionSupportHomogeneity) {
  for (int dim : {2, 3})
    for (int s = 1; s <= 8; ++s) {
      auto net = build_net(dim, s);
      EXPECT_LE(partition_check(net, random_units(dim, 300, s)), 1e-10);
    }
  auto net = build_net(2, 4);
  const Vec& nu = net.points[5];
  Vec xi = 3.0 * nu;
  double on = chi_cutoff(net, 5, xi);
  for (std::size_t k = 0; k < net.size(); ++k)
    if (k != 5) EXPECT_GE(on, chi_cutoff(net, k, xi));
  for (const auto& u : random_units(2, 500, 8)) {
    double v = chi_cutoff(net, 5, u);
    if ((u - nu).norm() > net.cone_radius()) EXPECT_EQ(v, 0.0);
    EXPECT_EQ(chi_cutoff(net, 5, Vec(2.0 * u)), v);
    EXPECT_EQ(chi_cutoff(net, 5, Vec(0.5 * u)), v);
  }
  EXPECT_THROW(chi_cutoff(net, 0, Vec::Zero(2)), SingularArgument);
}

TEST(ChiCutoff, SinglePointNetIsOne) {
  SphericalNet net;
  net.dim = 2;
  net.level = 1;
  net.points = {vec({1, 0})};
  EXPECT_EQ(chi_cutoff(net, 0, vec({-1, 0.2})), 1.0);
}

TEST(ChiCutoff, DerivativeScaling) {
  // |d chi / d theta| on the unit circle scales like 2^{s/2}
  std::vector<double> fitted;
  for (int s : {2, 4, 6}) {
    auto net = build_net(2, s);
    double sup = 0.0;
    const double h = 1e-5;
    for (int k = 0; k < 4000; ++k) {
      double th = kTwoPi * k / 4000.0;
      double d = (chi_cutoff(net, 0, vec({std::cos(th + h), std::sin(th + h)})) -
                  chi_cutoff(net, 0, vec({std::cos(th - h), std::sin(th - h)}))) / (2 * h);
      sup = std::max(sup, std::abs(d));
    }
    fitted.push_back(sup * std::exp2(-0.5 * s));
  }
  EXPECT_LE(max_over_min(fitted), 1.5);
}

TEST(AxisCutoff, Support) {
  auto shape = ProductSpaceShape::make({2, 1});
  EXPECT_EQ(axis_cutoff(shape, vec({3, 0, 0.2})), 1.0);
  EXPECT_EQ(axis_cutoff(shape, vec({1.01, 0, 1.5})), 0.0);
  EXPECT_EQ(axis_cutoff(shape, vec({0.1, 0.3, 4.0})), 1.0);
}

TEST(Rectangle, LinearPhaseSubstitution) {
  auto p = ProductPhase::make({phases::linear(2)});
  RectangleParams rp{vec({0.1, 0.2}), 4.0, Orientation::forward};
  Vec nu = vec({1, 0});
  int s = 6;
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-0.6, 0.6);
  for (int k = 0; k < 2000; ++k) {
    Vec x = vec({0.1 + u(rng) * 0.2, 0.2 + u(rng)});
    Vec d = rp.x_o - x;
    bool expect = d.norm() <= 4.0 / 8.0 && std::abs(d[0]) <= 4.0 / 64.0;
    EXPECT_EQ(rectangle_membership(rp, x, 0, s, nu, p), expect);
    RectangleParams dual = rp;
    dual.orientation = Orientation::dual;
    EXPECT_EQ(rectangle_membership(dual, x, 0, s, nu, p), expect);
  }
  auto p1 = ProductPhase::make({phases::linear(1), phases::linear(2)});
  RectangleParams r3{Vec::Zero(3), 4.0, Orientation::forward};
  EXPECT_THROW(rectangle_membership(r3, Vec::Zero(3), 0, 2, vec({1}), p1), DomainError);
}

TEST(Rectangle, HalfWaveHugsSphere) {
  auto p = ProductPhase::make({phases::half_wave(2)});
  RectangleParams rp{vec({0, 0}), 1.0, Orientation::forward};
  Vec nu = vec({std::cos(1.0), std::sin(1.0)});
  // forward: x_o - (x + nu) small, so x is near -nu
  EXPECT_TRUE(rectangle_membership(rp, Vec(-nu), 0, 10, nu, p));
  EXPECT_FALSE(rectangle_membership(rp, Vec(-nu * 1.01), 0, 10, nu, p));
}

TEST(Region, MonotoneAndMeasure) {
  auto shape = ProductSpaceShape::make({2});
  auto g = make_grid(shape, 256, 1.5);
  auto p = ProductPhase::make({phases::half_wave(2)});
  RegionOptions o;
  o.C_R = 1.0;
  o.mc_samples = 4000;
  std::vector<double> ratio;
  InfluenceRegion prev;
  for (int k = 2; k <= 5; ++k) {
    double delta = std::exp2(-k);
    auto reg = region_of_influence(g, p, Vec::Zero(2), delta, Orientation::forward, o);
    if (k > 2) {
      for (std::size_t j = 0; j < g.size(); ++j)
        if (reg.indicator[j]) ASSERT_TRUE(prev.indicator[j]);
    }
    ratio.push_back(reg.mc_measure / delta);
    prev = reg;
  }
  auto mx = *std::max_element(ratio.begin(), ratio.end());
  EXPECT_LT(mx, 40.0);
  EXPECT_LE(max_over_min(ratio), 2.0);
}

TEST(Region, RasterAgreesWithPointwiseMembership) {
  auto shape = ProductSpaceShape::make({2});
  auto g = make_grid(shape, 64, 1.5);
  RegionOptions o;
  o.C_R = 2.0;
  o.mc_samples = 0;
  for (auto orient : {Orientation::forward, Orientation::dual}) {
    for (const auto& f : {phases::half_wave(2), phases::perturbed(2, 0.1)}) {
      auto p = ProductPhase::make({f});
      auto reg = region_of_influence(g, p, vec({0.2, -0.1}), 0.25, orient, o);
      std::size_t mismatch = 0;
      for_each_point(g, Domain::physical, [&](std::size_t k, const Vec& x) {
        if (bool(reg.indicator[k]) != region_contains(reg, p, x)) ++mismatch;
      });
      EXPECT_EQ(mismatch, 0u);
    }
  }
}

TEST(Region, WholeNeighborhoodAtLargeDelta) {
  auto shape = ProductSpaceShape::make({2});
  auto g = make_grid(shape, 128, 2.0);
  auto p = ProductPhase::make({phases::half_wave(2)});
  RegionOptions o;
  o.mc_samples = 0;
  auto reg = region_of_influence(g, p, Vec::Zero(2), 0.9, Orientation::forward, o);
  for_each_point(g, Domain::physical, [&](std::size_t k, const Vec& x) {
    if (std::abs(x.norm() - 1.0) < 0.4) EXPECT_TRUE(reg.indicator[k]);
  });
  EXPECT_THROW(region_of_influence(g, p, Vec::Zero(2), 1.0, Orientation::forward, o), DomainError);
  auto g1 = make_grid(ProductSpaceShape::make({1}), 32, 1.0);
  EXPECT_THROW(region_of_influence(g1, ProductPhase::make({phases::linear(1)}), Vec::Zero(1), 0.5,
                                   Orientation::forward, o),
               PreconditionError);
}

TEST(CorrectedPhase, ZeroCasesAndDecay) {
  auto lin = phases::linear(2);
  auto hw = phases::half_wave(2);
  Vec e = vec({1, 0});
  EXPECT_EQ(corrected_phase(lin, vec({0.3, 0.2}), vec({5, -2}), e), 0.0);
  EXPECT_NEAR(corrected_phase(hw, vec({0.3, 0.2}), vec({7, 0}), e), 0.0, 1e-14);
  auto d = corrected_phase_decay(hw, Vec::Zero(2), {3, 4, 5, 6, 7, 8});
  std::vector<double> s(d.levels.begin(), d.levels.end());
  auto slope = [&](const std::vector<double>& v) { return fit_line(s, [&] {
      std::vector<double> l;
      for (double a : v) l.push_back(std::log2(a));
      return l;
    }()).slope; };
  EXPECT_LE(slope(d.d_tau1), -(1 - 0.25));
  EXPECT_LE(slope(d.d_tau2), -(2 - 0.25));
  EXPECT_LE(slope(d.d_eta1), -(0.5 - 0.25));
  EXPECT_LE(slope(d.d_eta2), -(1 - 0.25));
}
