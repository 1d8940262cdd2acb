#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "oracles.hpp"
#include "pcsim/friction.hpp"

using namespace pcsim;

namespace {

std::vector<ContactPair> randomPairs(std::mt19937_64& rng, int n, double drift = 0.01) {
  std::uniform_real_distribution<double> pos(-1, 1), d(-drift, drift), w(0.2, 2.0);
  std::vector<ContactPair> out(n);
  for (auto& p : out) {
    p.prevX = pos(rng);
    p.prevZ = pos(rng);
    p.currX = p.prevX + d(rng);
    p.currZ = p.prevZ + d(rng);
    p.weight = w(rng);
  }
  return out;
}

std::vector<ContactPair> rotatedSquare(double alpha, double cx = 0, double cz = 0) {
  std::vector<ContactPair> out;
  const double c = std::cos(alpha), s = std::sin(alpha);
  for (auto [x, z] : {std::pair{-0.5, -0.5}, {0.5, -0.5}, {0.5, 0.5}, {-0.5, 0.5}})
    out.push_back({cx + x, cz + z, cx + c * x - s * z, cz + s * x + c * z, 1.0});
  return out;
}

// Gradient of the objective (halved), i.e. the normal-equation residual.
std::array<double, 3> gradient(const std::vector<ContactPair>& pairs, const AlignmentSolution& s) {
  std::array<double, 3> g{};
  for (const auto& p : pairs) {
    const double x = p.prevX - s.pivotX, z = p.prevZ - s.pivotZ;
    const double rx = x - s.a3 * z + s.a1 - (p.currX - s.pivotX);
    const double rz = s.a3 * x + z + s.a2 - (p.currZ - s.pivotZ);
    g[0] += p.weight * rx;
    g[1] += p.weight * rz;
    g[2] += p.weight * (-z * rx + x * rz);
  }
  return g;
}

}  // namespace

TEST(Alignment, NoMotionGivesZero) {
  std::mt19937_64 rng(1);
  auto pairs = randomPairs(rng, 6, 0);
  const auto s = solveAlignment(pairs);
  ASSERT_TRUE(s);
  EXPECT_NEAR(s->a1, 0, 1e-15);
  EXPECT_NEAR(s->a2, 0, 1e-15);
  EXPECT_NEAR(s->a3, 0, 1e-15);
}

TEST(Alignment, PureTranslation) {
  std::vector<ContactPair> pairs;
  for (auto [x, z] : {std::pair{0.0, 0.0}, {1.0, 0.2}, {0.3, -1.0}, {-0.4, 0.7}})
    pairs.push_back({x, z, x + 0.2, z - 0.1});
  const auto s = solveAlignment(pairs);
  ASSERT_TRUE(s);
  EXPECT_NEAR(s->a1, 0.2, 1e-12);
  EXPECT_NEAR(s->a2, -0.1, 1e-12);
  EXPECT_NEAR(s->a3, 0.0, 1e-12);
}

TEST(Alignment, SmallRotationAgreesWithExactRigidFit) {
  const auto pairs = rotatedSquare(0.01);
  const auto s = solveAlignment(pairs);
  ASSERT_TRUE(s);
  const auto exact = oracle::exactRigidFit(pairs);
  EXPECT_NEAR(exact.a3, std::sin(0.01), 1e-12);
  EXPECT_NEAR(s->a3, std::sin(0.01), 1e-5);
  EXPECT_LT(std::abs(s->a1), 1e-6);
  EXPECT_LT(std::abs(s->a2), 1e-6);
}

TEST(Alignment, RotationAboutOffsetCenterIsRecovered) {
  // The same rotation about (3, -2): the fit is expressed about the contact
  // centroid, so the translation part stays zero.
  const auto pairs = rotatedSquare(0.01, 3.0, -2.0);
  const auto s = solveAlignment(pairs);
  ASSERT_TRUE(s);
  EXPECT_NEAR(s->pivotX, 3.0, 1e-15);
  EXPECT_NEAR(s->pivotZ, -2.0, 1e-15);
  EXPECT_NEAR(s->a3, std::sin(0.01), 1e-5);
  EXPECT_LT(std::abs(s->a1), 1e-6);
}

TEST(Alignment, MatchesQrOracleOnRandomInstances) {
  std::mt19937_64 rng(42);
  for (int k = 0; k < 200; ++k) {
    const auto pairs = randomPairs(rng, 10);
    const auto s = solveAlignment(pairs);
    ASSERT_TRUE(s);
    const auto o = oracle::linearLeastSquaresQr(pairs);
    EXPECT_NEAR(s->a1, o.a1, 1e-9);
    EXPECT_NEAR(s->a2, o.a2, 1e-9);
    EXPECT_NEAR(s->a3, o.a3, 1e-9);
  }
}

TEST(Alignment, NormalEquationResidualsVanish) {
  std::mt19937_64 rng(5);
  for (int k = 0; k < 200; ++k) {
    const auto pairs = randomPairs(rng, 3 + k % 18, 0.1);
    const auto s = solveAlignment(pairs);
    ASSERT_TRUE(s);
    const auto sys = assembleNormalEquations(pairs, s->pivotX, s->pivotZ);
    double scale = 0;
    for (double v : sys.a) scale = std::max(scale, std::abs(v));
    for (double g : gradient(pairs, *s)) EXPECT_LT(std::abs(g), 1e-9 * std::max(1.0, scale));
  }
}

TEST(Alignment, IsLocalMinimumOfObjective) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> d(-1e-3, 1e-3);
  for (int k = 0; k < 20; ++k) {
    const auto pairs = randomPairs(rng, 8, 0.05);
    const auto s = solveAlignment(pairs);
    ASSERT_TRUE(s);
    const double e0 = alignmentObjective(pairs, *s);
    for (int t = 0; t < 100; ++t) {
      AlignmentSolution q = *s;
      q.a1 += d(rng);
      q.a2 += d(rng);
      q.a3 += d(rng);
      EXPECT_LE(e0, alignmentObjective(pairs, q));
    }
  }
}

TEST(Alignment, TranslationEquivariant) {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> shift(-50, 50);
  for (int k = 0; k < 100; ++k) {
    auto pairs = randomPairs(rng, 7, 0.05);
    const auto a = solveAlignment(pairs);
    const double dx = shift(rng), dz = shift(rng);
    for (auto& p : pairs) {
      p.prevX += dx;
      p.currX += dx;
      p.prevZ += dz;
      p.currZ += dz;
    }
    const auto b = solveAlignment(pairs);
    ASSERT_TRUE(a && b);
    EXPECT_NEAR(a->a1, b->a1, 1e-9);
    EXPECT_NEAR(a->a2, b->a2, 1e-9);
    EXPECT_NEAR(a->a3, b->a3, 1e-9);
  }
}

TEST(Alignment, DuplicatePairNeverIncreasesResidual) {
  // With a duplicated pair the objective is E' = E + e_k; the new optimum
  // cannot do worse on E' than the old solution does.
  std::mt19937_64 rng(17);
  for (int k = 0; k < 100; ++k) {
    auto pairs = randomPairs(rng, 5, 0.05);
    const auto s0 = solveAlignment(pairs);
    auto dup = pairs;
    dup.push_back(pairs[k % pairs.size()]);
    const auto s1 = solveAlignment(dup);
    ASSERT_TRUE(s0 && s1);
    AlignmentSolution s0OnDup = *s0;
    s0OnDup.pivotX = s1->pivotX;
    s0OnDup.pivotZ = s1->pivotZ;
    // Re-express s0 about the new pivot: the same motion, a different origin.
    const double dpx = s1->pivotX - s0->pivotX, dpz = s1->pivotZ - s0->pivotZ;
    s0OnDup.a1 = s0->a1 - s0->a3 * dpz;
    s0OnDup.a2 = s0->a2 + s0->a3 * dpx;
    EXPECT_LE(alignmentObjective(dup, *s1), alignmentObjective(dup, s0OnDup) + 1e-15);
  }
}

TEST(Alignment, CoincidentPointsAreSingular) {
  std::vector<ContactPair> pairs(4, ContactPair{1.0, 2.0, 1.1, 2.0});
  EXPECT_FALSE(solveAlignment(pairs));
  const auto r = alignContacts(pairs);
  EXPECT_EQ(r.status, AlignmentStatus::TranslationOnly);
  EXPECT_NEAR(r.solution.a1, 0.1, 1e-12);
  EXPECT_EQ(r.solution.a3, 0.0);
}

TEST(Alignment, CollinearPointsSolveOrReportSingular) {
  std::vector<ContactPair> pairs;
  for (int i = 0; i < 5; ++i) pairs.push_back({0.1 * i, 0.0, 0.1 * i + 0.01, 0.002 * i});
  const auto s = solveAlignment(pairs);
  if (s) {
    for (double g : gradient(pairs, *s)) EXPECT_LT(std::abs(g), 1e-9);
  }
}

TEST(Alignment, ZeroWeightsAreSingular) {
  std::vector<ContactPair> pairs = {{0, 0, 1, 1, 0}, {1, 0, 2, 1, 0}, {0, 1, 1, 2, 0}};
  EXPECT_FALSE(solveAlignment(pairs));
}

TEST(Alignment, FewerThanThreePairsUseMeanDrift) {
  const std::vector<ContactPair> two = {{0, 0, 0.1, 0.0}, {1, 0, 1.3, 0.2}};
  const auto r = alignContacts(two);
  EXPECT_EQ(r.status, AlignmentStatus::TranslationOnly);
  EXPECT_NEAR(r.solution.a1, 0.2, 1e-15);
  EXPECT_NEAR(r.solution.a2, 0.1, 1e-15);
  EXPECT_EQ(r.solution.a3, 0.0);
  EXPECT_EQ(alignContacts({}).status, AlignmentStatus::NoContacts);
}

TEST(ApplyAlignment, ZeroSolutionLeavesPoseUnchanged) {
  BodyPose pose{{1, 2, 3}, rotationY(0.3)};
  const BodyPose out = applyAlignment(pose, AlignmentSolution{});
  EXPECT_EQ(out.position, pose.position);
  for (int i = 0; i < 9; ++i) EXPECT_NEAR(out.rotation.m[i], pose.rotation.m[i], 1e-16);
}

TEST(ApplyAlignment, TranslationShiftsByNegativeDisplacement) {
  BodyPose pose{{1, 2, 3}, Mat3::identity()};
  AlignmentSolution s{0.25, -0.5, 0.0, 7.0, 7.0};
  const BodyPose out = applyAlignment(pose, s);
  EXPECT_DOUBLE_EQ(out.position.x, 0.75);
  EXPECT_DOUBLE_EQ(out.position.y, 2.0);
  EXPECT_DOUBLE_EQ(out.position.z, 3.5);
}

TEST(ApplyAlignment, RealignedContactsAreAFixedPoint) {
  std::mt19937_64 rng(23);
  for (int k = 0; k < 100; ++k) {
    auto pairs = randomPairs(rng, 6, 0.01);
    // Add a small rotation so the yaw part is exercised.
    for (auto& p : pairs) {
      const double c = std::cos(0.005), s = std::sin(0.005);
      const double x = p.currX, z = p.currZ;
      p.currX = c * x - s * z;
      p.currZ = s * x + c * z;
    }
    const auto sol = solveAlignment(pairs);
    ASSERT_TRUE(sol);
    auto after = pairs;
    for (auto& p : after) {
      const Vec3 q = applyAlignment(Vec3{p.currX, 0, p.currZ}, *sol);
      p.currX = q.x;
      p.currZ = q.z;
    }
    const auto again = solveAlignment(after);
    ASSERT_TRUE(again);
    // The fit is linearized while the correction is a true rotation, so what
    // is left over is second order in the first correction.
    const double m = std::max({std::abs(sol->a1), std::abs(sol->a2), std::abs(sol->a3)});
    EXPECT_LT(std::abs(again->a1), 4 * m * m);
    EXPECT_LT(std::abs(again->a2), 4 * m * m);
    EXPECT_LT(std::abs(again->a3), 4 * m * m);
  }
}

TEST(Solve3x3, MatchesKnownSystem) {
  const auto x = solve3x3({2, 1, -1, -3, -1, 2, -2, 1, 2}, {8, -11, -3});
  ASSERT_TRUE(x);
  EXPECT_NEAR((*x)[0], 2, 1e-14);
  EXPECT_NEAR((*x)[1], 3, 1e-14);
  EXPECT_NEAR((*x)[2], -1, 1e-14);
  EXPECT_FALSE(solve3x3({1, 2, 3, 2, 4, 6, 1, 1, 1}, {1, 2, 3}));
}
