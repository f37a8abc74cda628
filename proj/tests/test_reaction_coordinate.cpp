#include "pabf/reaction_coordinate.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>

using namespace pabf;

namespace {

const PairPotentialParams kParams{};

std::vector<double> flatten(const ParticleConfiguration &c) {
  std::vector<double> x;
  for (const auto &p : c.positions) {
    x.push_back(p.x);
    x.push_back(p.y);
  }
  return x;
}

std::vector<Vec2> dense(const SparseGradient &g, std::size_t n) {
  std::vector<Vec2> out(n);
  for (std::size_t k = 0; k < g.count; ++k) out[g.index[k] / 2][g.index[k] % 2] += g.value[k];
  return out;
}

} // namespace

TEST(TrimerCoordinate, CompactAndStretchedValues) {
  const TrimerBondCoordinate rc(kParams);
  const double d0 = kParams.d0(), w = kParams.omega;
  ParticleConfiguration c{{{5, 5}, {5 + d0, 5}, {5 + d0, 5 + d0 + 2 * w}}, 15};
  const Vec2 z = rc.value(c);
  EXPECT_NEAR(z.x, 0.0, 1e-15);
  EXPECT_NEAR(z.y, 1.0, 1e-15);
}

TEST(TrimerCoordinate, GradientOnSimpleGeometry) {
  const TrimerBondCoordinate rc(kParams);
  ParticleConfiguration c{{{0, 0}, {1, 0}, {1, 1}}, 15};
  const auto g = rc.gradient(c);
  const auto g1 = dense(g[0], 3);
  EXPECT_NEAR(g1[0].x, -0.25, 1e-15);
  EXPECT_NEAR(g1[0].y, 0.0, 1e-15);
  EXPECT_NEAR(g1[1].x, 0.25, 1e-15);
  EXPECT_EQ(g1[2], Vec2{});
  const auto g2 = dense(g[1], 3);
  EXPECT_EQ(g2[0], Vec2{});
}

TEST(TrimerCoordinate, GradientMatchesFiniteDifferences) {
  const TrimerBondCoordinate rc(kParams);
  std::mt19937_64 rng(3);
  for (int t = 0; t < 50; ++t) {
    const ParticleConfiguration c = test::random_configuration(rng, 3, 15.0);
    const auto g = rc.gradient(c);
    for (int j = 0; j < 2; ++j) {
      const auto fd = test::fd_gradient(c, [&](const ParticleConfiguration &w) { return rc.value(w)[j]; });
      EXPECT_LT(test::relative_difference(dense(g[j], 3), fd), 1e-6);
    }
  }
}

TEST(TrimerCoordinate, GramMatchesGradientProducts) {
  const TrimerBondCoordinate rc(kParams);
  std::mt19937_64 rng(4);
  const double k2 = 1.0 / (4 * kParams.omega * kParams.omega);
  for (int t = 0; t < 50; ++t) {
    const ParticleConfiguration c = test::random_configuration(rng, 3, 15.0);
    const auto g = rc.gradient(c);
    const Gram2 G = rc.gram(c);
    EXPECT_NEAR(G.g11, g[0].dot(g[0]), 1e-14);
    EXPECT_NEAR(G.g12, g[0].dot(g[1]), 1e-14);
    EXPECT_NEAR(G.g22, g[1].dot(g[1]), 1e-14);
    EXPECT_NEAR(G.g11, 2 * k2, 1e-15);
    // The off-diagonal entry is +cos(theta) k^2, theta the angle at q1.
    const auto ang = trimer_angle(c.positions[0], c.positions[1], c.positions[2], 15.0);
    EXPECT_NEAR(G.g12, ang.cos_theta * k2, 1e-14);
    const auto fd1 = test::fd_gradient(c, [&](const ParticleConfiguration &w) { return rc.value(w).x; });
    const auto fd2 = test::fd_gradient(c, [&](const ParticleConfiguration &w) { return rc.value(w).y; });
    double prod = 0;
    for (int k = 0; k < 3; ++k) prod += dot(fd1[k], fd2[k]);
    EXPECT_NEAR(G.g12, prod, 1e-8);
  }
}

TEST(TrimerCoordinate, ZeroBondRejected) {
  const TrimerBondCoordinate rc(kParams);
  ParticleConfiguration c{{{3, 3}, {3, 3}, {4, 4}}, 15};
  EXPECT_THROW(rc.gradient(c), DomainError);
  EXPECT_THROW(rc.value(c), DomainError);
}

TEST(TrimerCoordinate, LocalMeanForceMatchesNumericAssembly) {
  const TrimerBondCoordinate rc(kParams);
  std::mt19937_64 rng(8);
  for (int t = 0; t < 50; ++t) {
    const ParticleConfiguration c = test::random_configuration(rng, 12, 15.0);
    std::vector<Vec2> grad(c.size());
    energy_and_gradient(c, kParams, grad);
    const Vec2 f = rc.local_mean_force(c, std::span<const Vec2>(grad.data(), 3), 1.0);
    const Vec2 ref = test::fd_local_mean_force(c, kParams, 1.0);
    EXPECT_LT(norm(f - ref) / std::max(norm(ref), 1e-8), 1e-4) << "configuration " << t;
  }
}

TEST(TrimerCoordinate, CollinearBondsStillInvertible) {
  const TrimerBondCoordinate rc(kParams);
  ParticleConfiguration c{{{2, 5}, {4, 5}, {7, 5}}, 15};
  const Gram2 G = rc.gram(c);
  const double k2 = 1.0 / 16.0;
  EXPECT_NEAR(G.g11, 2 * k2, 1e-15);
  EXPECT_NEAR(G.g22, 2 * k2, 1e-15);
  EXPECT_NEAR(std::abs(G.g12), k2, 1e-15);
  EXPECT_GT(G.det(), 0.0);
  std::vector<Vec2> grad(3);
  energy_and_gradient(c, kParams, grad);
  const Vec2 f = rc.local_mean_force(c, grad, 1.0);
  EXPECT_TRUE(is_finite(f));
}

TEST(TrimerCoordinate, DegenerateGramRejected) {
  // Tiny omega makes every entry of G huge, but a huge omega drives det G
  // below the threshold.
  const TrimerBondCoordinate rc(kParams.d0(), 1e3);
  ParticleConfiguration c{{{2, 5}, {4, 5}, {4, 7}}, 15};
  std::vector<Vec2> grad(3);
  EXPECT_THROW(rc.local_mean_force(c, grad, 1.0), DegenerateCoordinateError);
}

TEST(TrimerCoordinate, ZeroTemperatureDropsDivergence) {
  const TrimerBondCoordinate rc(kParams);
  std::mt19937_64 rng(9);
  const ParticleConfiguration c = test::random_configuration(rng, 3, 15.0);
  std::vector<Vec2> grad(3);
  energy_and_gradient(c, kParams, grad);
  const Vec2 f = rc.local_mean_force(c, grad, std::numeric_limits<double>::infinity());
  // G^{-1} (grad xi . grad V)
  const auto g = rc.gradient(c);
  const auto x = flatten(ParticleConfiguration{grad, 15});
  const double b1 = g[0].dot(x), b2 = g[1].dot(x);
  const Gram2 G = rc.gram(c);
  const double det = G.det();
  EXPECT_NEAR(f.x, (G.g22 * b1 - G.g12 * b2) / det, 1e-10 * std::max(1.0, norm(f)));
  EXPECT_NEAR(f.y, (G.g11 * b2 - G.g12 * b1) / det, 1e-10 * std::max(1.0, norm(f)));
}

TEST(IdentityCoordinate, ValueGradientAndForce) {
  const IdentityCoordinate rc;
  const std::vector<double> x{0.3, 0.7, 0.1};
  EXPECT_EQ(rc.value(x), (Vec2{0.3, 0.7}));
  const auto g = rc.gradient(x);
  EXPECT_EQ(g[0].count, 1u);
  EXPECT_EQ(g[0].index[0], 0u);
  EXPECT_EQ(g[0].value[0], 1.0);
  EXPECT_EQ(g[1].index[0], 1u);
  const Gram2 G = rc.gram(x);
  EXPECT_EQ(G.g11, 1.0);
  EXPECT_EQ(G.g12, 0.0);
  EXPECT_EQ(G.g22, 1.0);
  const std::vector<double> gv{1.5, -2.5, 9.0};
  EXPECT_EQ(rc.local_mean_force(gv), (Vec2{1.5, -2.5}));
}
