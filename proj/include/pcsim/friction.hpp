#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <span>

#include "pcsim/geom.hpp"

namespace pcsim {

// Static-friction model: the feet that touch the ground in two consecutive
// steps should not slide. Joint motion moves them anyway, so each step we fit
// a small planar rigid motion (a1, a2 translation, a3 ~ sin of the yaw angle)
// that maps the previous contact positions onto the current ones in the
// least-squares sense, and then move the body by the inverse of that motion.
//
// All coordinates are taken relative to the pivot, the weighted centroid of
// the previous contact positions. In those coordinates the linearized model is
//   x' = x - a3 z + a1,   z' = a3 x + z + a2
// and the fit minimizes
//   E(a) = sum_i w_i [ (x_i - a3 z_i + a1 - x'_i)^2 + (a3 x_i + z_i + a2 - z'_i)^2 ].

struct ContactPair {
  double prevX = 0.0;
  double prevZ = 0.0;
  double currX = 0.0;
  double currZ = 0.0;
  double weight = 1.0;
};

struct AlignmentSolution {
  double a1 = 0.0;  // x displacement, meters
  double a2 = 0.0;  // z displacement, meters
  double a3 = 0.0;  // small-angle sine of the yaw
  double pivotX = 0.0;
  double pivotZ = 0.0;
};

/// Row-major 3x3 normal-equation system A a = b (half the objective's gradient).
struct NormalSystem {
  std::array<double, 9> a{};
  std::array<double, 3> b{};
};

inline std::array<double, 2> alignmentPivot(std::span<const ContactPair> pairs) {
  double w = 0.0, sx = 0.0, sz = 0.0;
  for (const auto& p : pairs) {
    w += p.weight;
    sx += p.weight * p.prevX;
    sz += p.weight * p.prevZ;
  }
  if (!(w > 0)) return {0.0, 0.0};
  return {sx / w, sz / w};
}

inline NormalSystem assembleNormalEquations(std::span<const ContactPair> pairs, double pivotX,
                                            double pivotZ) {
  double sw = 0, sx = 0, sz = 0, srr = 0, dx = 0, dz = 0, torque = 0;
  for (const auto& p : pairs) {
    const double w = p.weight;
    const double x = p.prevX - pivotX, z = p.prevZ - pivotZ;
    const double xn = p.currX - pivotX, zn = p.currZ - pivotZ;
    sw += w;
    sx += w * x;
    sz += w * z;
    srr += w * (x * x + z * z);
    dx += w * (xn - x);
    dz += w * (zn - z);
    torque += w * (x * zn - z * xn);
  }
  NormalSystem s;
  s.a = {sw, 0.0, -sz, 0.0, sw, sx, -sz, sx, srr};
  s.b = {dx, dz, torque};
  return s;
}

/// E(a) evaluated term by term.
inline double alignmentObjective(std::span<const ContactPair> pairs, const AlignmentSolution& s) {
  double e = 0.0;
  for (const auto& p : pairs) {
    const double x = p.prevX - s.pivotX, z = p.prevZ - s.pivotZ;
    const double xn = p.currX - s.pivotX, zn = p.currZ - s.pivotZ;
    const double rx = x - s.a3 * z + s.a1 - xn;
    const double rz = x * s.a3 + z + s.a2 - zn;
    e += p.weight * (rx * rx + rz * rz);
  }
  return e;
}

/// Gaussian elimination with partial pivoting. Returns nullopt when a pivot
/// falls below 1e-12 times the largest coefficient.
inline std::optional<std::array<double, 3>> solve3x3(std::array<double, 9> a,
                                                     std::array<double, 3> b) {
  double scale = 0.0;
  for (double v : a) scale = std::max(scale, std::abs(v));
  if (!(scale > 0) || !std::isfinite(scale)) return std::nullopt;
  const double tiny = 1e-12 * scale;
  for (int col = 0; col < 3; ++col) {
    int best = col;
    for (int r = col + 1; r < 3; ++r)
      if (std::abs(a[r * 3 + col]) > std::abs(a[best * 3 + col])) best = r;
    if (!(std::abs(a[best * 3 + col]) >= tiny)) return std::nullopt;
    if (best != col) {
      for (int c = 0; c < 3; ++c) std::swap(a[col * 3 + c], a[best * 3 + c]);
      std::swap(b[col], b[best]);
    }
    for (int r = col + 1; r < 3; ++r) {
      const double f = a[r * 3 + col] / a[col * 3 + col];
      for (int c = col; c < 3; ++c) a[r * 3 + c] -= f * a[col * 3 + c];
      b[r] -= f * b[col];
    }
  }
  std::array<double, 3> x{};
  for (int r = 2; r >= 0; --r) {
    double acc = b[r];
    for (int c = r + 1; c < 3; ++c) acc -= a[r * 3 + c] * x[c];
    x[r] = acc / a[r * 3 + r];
  }
  return x;
}

/// Least-squares minimizer of E. nullopt means the system is singular
/// (no pairs, zero total weight, or all contact points coincident).
inline std::optional<AlignmentSolution> solveAlignment(std::span<const ContactPair> pairs) {
  if (pairs.empty()) return std::nullopt;
  const auto [px, pz] = alignmentPivot(pairs);
  const NormalSystem sys = assembleNormalEquations(pairs, px, pz);
  const auto x = solve3x3(sys.a, sys.b);
  if (!x) return std::nullopt;
  return AlignmentSolution{(*x)[0], (*x)[1], (*x)[2], px, pz};
}

/// Weighted mean drift, no rotation.
inline AlignmentSolution translationOnlyAlignment(std::span<const ContactPair> pairs) {
  AlignmentSolution s;
  double w = 0.0;
  for (const auto& p : pairs) {
    w += p.weight;
    s.a1 += p.weight * (p.currX - p.prevX);
    s.a2 += p.weight * (p.currZ - p.prevZ);
    s.pivotX += p.weight * p.prevX;
    s.pivotZ += p.weight * p.prevZ;
  }
  if (!(w > 0)) return {};
  s.a1 /= w;
  s.a2 /= w;
  s.pivotX /= w;
  s.pivotZ /= w;
  return s;
}

enum class AlignmentStatus { Solved, TranslationOnly, NoContacts };

struct AlignmentResult {
  AlignmentSolution solution;
  AlignmentStatus status = AlignmentStatus::NoContacts;
};

/// The policy used by the simulator: a full fit with three or more pairs,
/// translation-only with fewer pairs or a singular system.
inline AlignmentResult alignContacts(std::span<const ContactPair> pairs) {
  if (pairs.empty()) return {};
  if (pairs.size() >= 3) {
    if (auto s = solveAlignment(pairs)) return {*s, AlignmentStatus::Solved};
  }
  return {translationOnlyAlignment(pairs), AlignmentStatus::TranslationOnly};
}

/// Rigid placement of the robot's base in the world.
struct BodyPose {
  Vec3 position;
  Mat3 rotation;
};

/// Yaw angle undone by applyAlignment (right-hand about +y).
inline double alignmentYaw(const AlignmentSolution& s) {
  return std::asin(std::clamp(s.a3, -1.0, 1.0));
}

/// The inverse of the fitted contact motion, applied to a world point:
/// translate by -(a1, 0, a2), then yaw by -asin(a3) about the vertical axis
/// through the pivot. Contact points that moved as fitted return to where
/// they were.
inline Vec3 applyAlignment(const Vec3& p, const AlignmentSolution& s, double cosYaw,
                           double sinYaw) {
  const double u = p.x - s.pivotX - s.a1;
  const double w = p.z - s.pivotZ - s.a2;
  return {s.pivotX + cosYaw * u + sinYaw * w, p.y, s.pivotZ - sinYaw * u + cosYaw * w};
}

inline Vec3 applyAlignment(const Vec3& p, const AlignmentSolution& s) {
  const double yaw = alignmentYaw(s);
  return applyAlignment(p, s, std::cos(yaw), std::sin(yaw));
}

inline BodyPose applyAlignment(const BodyPose& pose, const AlignmentSolution& s) {
  const double yaw = alignmentYaw(s);
  return {applyAlignment(pose.position, s, std::cos(yaw), std::sin(yaw)),
          rotationY(yaw) * pose.rotation};
}

}  // namespace pcsim
