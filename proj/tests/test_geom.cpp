#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "pcsim/geom.hpp"

using namespace pcsim;

namespace {

void expectVec(const Vec3& a, const Vec3& b, double tol = 1e-12) {
  EXPECT_NEAR(a.x, b.x, tol);
  EXPECT_NEAR(a.y, b.y, tol);
  EXPECT_NEAR(a.z, b.z, tol);
}

}  // namespace

TEST(Rotate, QuarterTurnAboutZ) {
  expectVec(rotateRpy({1, 0, 0}, {0, 0, std::numbers::pi / 2}), {0, 1, 0});
}

TEST(Rotate, QuarterTurnAboutX) {
  expectVec(rotateRpy({0, 1, 0}, {std::numbers::pi / 2, 0, 0}), {0, 0, 1});
}

TEST(Rotate, ZeroAnglesIsIdentity) {
  const Vec3 p{0.3, -2.5, 7.25};
  const Vec3 q = rotateRpy(p, {});
  EXPECT_EQ(q.x, p.x);
  EXPECT_EQ(q.y, p.y);
  EXPECT_EQ(q.z, p.z);
}

TEST(Rotate, AppliesXThenYThenZ) {
  const RpyRotation r{0.3, -0.7, 1.1};
  const Vec3 p{0.5, 1.5, -2.0};
  const Vec3 expected = rotationZ(1.1) * (rotationY(-0.7) * (rotationX(0.3) * p));
  expectVec(rotateRpy(p, r), expected, 1e-14);
}

TEST(Rotate, IsometryOnRandomInputs) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> ang(-10, 10), coord(-100, 100);
  for (int k = 0; k < 1000; ++k) {
    const Vec3 p{coord(rng), coord(rng), coord(rng)};
    const RpyRotation r{ang(rng), ang(rng), ang(rng)};
    const double n0 = norm(p);
    EXPECT_NEAR(norm(rotateRpy(p, r)), n0, 1e-12 * n0);
  }
}

TEST(Rotate, InverseComposesToIdentity) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> ang(-4, 4);
  for (int k = 0; k < 200; ++k) {
    const RpyRotation r{ang(rng), ang(rng), ang(rng)};
    const Mat3 m = r.matrix() * r.inverseMatrix();
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) EXPECT_NEAR(m(i, j), i == j ? 1.0 : 0.0, 1e-12);
  }
}

TEST(Rotate, AxisAngleMatchesElementaryRotations) {
  for (double a : {-2.0, -0.1, 0.0, 0.4, 3.0}) {
    const Mat3 x = axisAngle({1, 0, 0}, a), y = axisAngle({0, 1, 0}, a), z = axisAngle({0, 0, 1}, a);
    const Mat3 rx = rotationX(a), ry = rotationY(a), rz = rotationZ(a);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        EXPECT_NEAR(x(i, j), rx(i, j), 1e-15);
        EXPECT_NEAR(y(i, j), ry(i, j), 1e-15);
        EXPECT_NEAR(z(i, j), rz(i, j), 1e-15);
      }
  }
}

TEST(CenterOfGravity, SymmetricPair) {
  const std::vector<MassPoint> pts = {{{0, 0, 0}, 1}, {{2, 0, 0}, 1}};
  expectVec(centerOfGravity(pts), {1, 0, 0}, 0);
}

TEST(CenterOfGravity, SinglePoint) {
  const std::vector<MassPoint> pts = {{{1, 2, 3}, 5}};
  expectVec(centerOfGravity(pts), {1, 2, 3}, 0);
}

TEST(CenterOfGravity, WeightedMean) {
  // (1 * 0 + 3 * 4) / 4 = 3
  const std::vector<MassPoint> pts = {{{0, 0, 0}, 1}, {{4, 0, 0}, 3}};
  expectVec(centerOfGravity(pts), {3, 0, 0}, 0);
}

TEST(CenterOfGravity, ZeroMassThrows) {
  const std::vector<MassPoint> pts = {{{0, 0, 0}, 0}, {{1, 0, 0}, 0}};
  try {
    centerOfGravity(pts);
    FAIL() << "expected ZeroMass";
  } catch (const SimError& e) {
    EXPECT_EQ(e.code(), ErrorCode::ZeroMass);
  }
  EXPECT_THROW(centerOfGravity(std::vector<MassPoint>{}), SimError);
}

TEST(CenterOfGravity, TranslationEquivariant) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> c(-5, 5), m(0.01, 3);
  for (int k = 0; k < 200; ++k) {
    std::vector<MassPoint> pts(1 + k % 9);
    for (auto& p : pts) p = {{c(rng), c(rng), c(rng)}, m(rng)};
    const Vec3 t{c(rng), c(rng), c(rng)};
    auto moved = pts;
    for (auto& p : moved) p.position += t;
    const Vec3 a = centerOfGravity(pts) + t, b = centerOfGravity(moved);
    expectVec(a, b, 1e-12);
  }
}
