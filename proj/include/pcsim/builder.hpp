#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numbers>
#include <numeric>
#include <queue>
#include <string>
#include <vector>

#include "pcsim/error.hpp"
#include "pcsim/geom.hpp"
#include "pcsim/model.hpp"

namespace pcsim {

struct BuildOptions {
  int cylinderRingPoints = 8;  // points per cap ring, mode 0
  int sphereSubdivision = 1;   // cube-lattice level of the sphere shell; 1 -> 26 points
};

/// Robot construction API. Bodies are created in the construction frame,
/// glued into rigid segments with connectBodies(), linked by hinge joints
/// and finally frozen into a RobotModel.
///
/// Every body carries a frame that starts out equal to the construction
/// frame. moveBody() and rotateBody() move that frame (and the frames of all
/// bodies glued to it); joint anchors and axes are stored in the frame of
/// their first body and resolved at finalization.
class RobotBuilder {
 public:
  explicit RobotBuilder(BuildOptions options = {}) : options_(options) {
    if (options_.cylinderRingPoints < 3 || options_.sphereSubdivision < 1)
      throw SimError(ErrorCode::InvalidDimension, "tessellation options out of range");
  }

  BodyId createPoint(double x, double y, double z, double m, Color color = {}) {
    checkOpen();
    checkMass(m);
    checkFinite({x, y, z});
    Body& b = newBody(color);
    b.local.push_back({x, y, z});
    b.mass.push_back(m);
    return lastId();
  }

  BodyId createBox(double w, double h, double d, double x, double y, double z, double m,
                   Color color = {}) {
    checkOpen();
    checkMass(m);
    checkFinite({x, y, z});
    if (!(w > 0) || !(h > 0) || !(d > 0) || !std::isfinite(w + h + d))
      throw SimError(ErrorCode::InvalidDimension, "box extents must be positive");
    Body& b = newBody(color);
    addBox(b, {x, y, z}, {w / 2, 0, 0}, {0, h / 2, 0}, {0, 0, d / 2}, m);
    return lastId();
  }

  BodyId createCylinder(double x1, double y1, double z1, double x2, double y2, double z2,
                        double rr, double m, Color color = {}) {
    checkOpen();
    checkMass(m);
    const Vec3 c1{x1, y1, z1}, c2{x2, y2, z2};
    checkFinite(c1);
    checkFinite(c2);
    const Vec3 axis = c2 - c1;
    const double len = norm(axis);
    if (!(len > 0)) throw SimError(ErrorCode::DegenerateAxis, "cylinder endpoints coincide");
    if (!(rr > 0) || !std::isfinite(rr))
      throw SimError(ErrorCode::InvalidDimension, "cylinder radius must be positive");
    const Vec3 dir = axis / len;
    const auto [u, v] = perpendicularBasis(dir);
    Body& b = newBody(color);
    if (mode_ == 0) {
      const int n = options_.cylinderRingPoints;
      for (int cap = 0; cap < 2; ++cap) {
        const Vec3 c = cap == 0 ? c1 : c2;
        for (int k = 0; k < n; ++k) {
          const double t = 2.0 * std::numbers::pi * k / n;
          b.local.push_back(c + (u * std::cos(t) + v * std::sin(t)) * rr);
          b.mass.push_back(m / (2 * n));
        }
      }
      const auto un = static_cast<std::uint32_t>(n);
      for (std::uint32_t k = 0; k < un; ++k) {
        const std::uint32_t k1 = (k + 1) % un;
        b.tris.push_back({{k, k1, un + k1}, color});
        b.tris.push_back({{k, un + k1, un + k}, color});
      }
      for (std::uint32_t k = 1; k + 1 < un; ++k) {
        b.tris.push_back({{0, k + 1, k}, color});
        b.tris.push_back({{un, un + k, un + k + 1}, color});
      }
    } else if (mode_ == 1) {
      addBox(b, (c1 + c2) * 0.5, axis * 0.5, u * rr, v * rr, m);
    } else if (mode_ == 2) {
      b.local.push_back(c1);
      b.local.push_back(c2);
      b.mass.assign(2, m / 2);
    } else {
      b.local.push_back((c1 + c2) * 0.5);
      b.mass.push_back(m);
    }
    return lastId();
  }

  BodyId createSphere(double x, double y, double z, double rr, double m, Color color = {}) {
    checkOpen();
    checkMass(m);
    const Vec3 c{x, y, z};
    checkFinite(c);
    if (!(rr > 0) || !std::isfinite(rr))
      throw SimError(ErrorCode::InvalidDimension, "sphere radius must be positive");
    Body& b = newBody(color);
    if (mode_ == 0) {
      addSphereShell(b, c, rr, m);
    } else if (mode_ == 1) {
      addBox(b, c, {rr, 0, 0}, {0, rr, 0}, {0, 0, rr}, m);
    } else if (mode_ == 2) {
      b.local.push_back(c - Vec3{0, rr, 0});
      b.local.push_back(c + Vec3{0, rr, 0});
      b.mass.assign(2, m / 2);
    } else {
      b.local.push_back(c);
      b.mass.push_back(m);
    }
    return lastId();
  }

  /// Massless, non-colliding probe; becomes a distance sensor.
  BodyId createRay(double x1, double y1, double z1, double x2, double y2, double z2,
                   Color color = {}) {
    checkOpen();
    const Vec3 a{x1, y1, z1}, e{x2, y2, z2};
    checkFinite(a);
    checkFinite(e);
    if (a == e) throw SimError(ErrorCode::DegenerateAxis, "ray endpoints coincide");
    Body& b = newBody(color);
    b.local = {a, e};
    b.mass = {0.0, 0.0};
    b.isRay = true;
    return lastId();
  }

  /// 0: none, 1: cylinders/spheres become boxes, 2: two points, >=3: one point.
  /// Affects bodies created afterwards; boxes are never simplified.
  void simplifyMode(int mode) { mode_ = std::max(mode, 0); }
  int simplifyModeValue() const { return mode_; }

  void connectBodies(BodyId id1, BodyId id2) {
    checkOpen();
    checkBody(id1);
    checkBody(id2);
    const int r1 = find(id1), r2 = find(id2);
    if (r1 == r2) return;
    if (jointConnected(r1, r2))
      throw SimError(ErrorCode::CycleWouldForm, "bodies are already linked through joints");
    parent_[r2] = r1;
  }

  JointId createJoint(BodyId id1, BodyId id2, double anX, double anY, double anZ, double aX,
                      double aY, double aZ) {
    checkOpen();
    checkBody(id1);
    checkBody(id2);
    const Vec3 anchor{anX, anY, anZ}, axis{aX, aY, aZ};
    checkFinite(anchor);
    checkFinite(axis);
    const double len = norm(axis);
    if (!(len > 0)) throw SimError(ErrorCode::ZeroAxis, "joint axis has zero length");
    const int r1 = find(id1), r2 = find(id2);
    if (r1 == r2) throw SimError(ErrorCode::SameSegment, "joint bodies are glued together");
    if (jointConnected(r1, r2))
      throw SimError(ErrorCode::CycleWouldForm, "joint would close a loop");
    const Body& b1 = bodies_[id1];
    // Store the anchor and axis in body 1's frame.
    PendingJoint j;
    j.body1 = id1;
    j.body2 = id2;
    j.anchorLocal = b1.rotation.transposed() * (anchor - b1.origin);
    j.axisLocal = b1.rotation.transposed() * (axis / len);
    joints_.push_back(j);
    return static_cast<JointId>(joints_.size() - 1);
  }

  void setJointLimits(JointId id, double minAngle, double maxAngle) {
    checkOpen();
    checkJoint(id);
    if (!(minAngle <= 0.0 && 0.0 <= maxAngle) || !std::isfinite(minAngle) ||
        !std::isfinite(maxAngle))
      throw SimError(ErrorCode::InvalidDimension, "joint limits must bracket the zero angle");
    joints_[id].minAngle = minAngle;
    joints_[id].maxAngle = maxAngle;
  }

  /// Binds a foot-contact sensor to the rigid segment containing `id`.
  int addContactSensor(BodyId id) {
    checkOpen();
    checkBody(id);
    contactSensorBodies_.push_back(id);
    return static_cast<int>(contactSensorBodies_.size() - 1);
  }

  void moveBody(BodyId id, double tx, double ty, double tz) {
    checkOpen();
    checkBody(id);
    const Vec3 t{tx, ty, tz};
    checkFinite(t);
    const int root = find(id);
    for (std::size_t b = 0; b < bodies_.size(); ++b)
      if (find(static_cast<int>(b)) == root) bodies_[b].origin += t;
  }

  /// Rotates the segment of `id` about the axes of body `id`'s frame, pivoting
  /// at that frame's origin.
  void rotateBody(BodyId id, double alpha, double beta, double gamma) {
    checkOpen();
    checkBody(id);
    checkFinite({alpha, beta, gamma});
    const Body pivot = bodies_[id];
    const Mat3 q = pivot.rotation * RpyRotation{alpha, beta, gamma}.matrix() *
                   pivot.rotation.transposed();
    const int root = find(id);
    for (std::size_t b = 0; b < bodies_.size(); ++b) {
      if (find(static_cast<int>(b)) != root) continue;
      Body& body = bodies_[b];
      body.origin = pivot.origin + q * (body.origin - pivot.origin);
      body.rotation = q * body.rotation;
    }
  }

  int getMaxBodyID() const { return static_cast<int>(bodies_.size()); }
  int jointCount() const { return static_cast<int>(joints_.size()); }
  bool finalized() const { return finalized_; }
  bool sameSegment(BodyId a, BodyId b) {
    checkBody(a);
    checkBody(b);
    return find(a) == find(b);
  }

  /// Current construction-frame positions of a body's mass points.
  std::vector<Vec3> bodyPoints(BodyId id) const {
    checkBody(id);
    const Body& b = bodies_[id];
    std::vector<Vec3> out;
    out.reserve(b.local.size());
    for (const auto& p : b.local) out.push_back(b.origin + b.rotation * p);
    return out;
  }
  std::vector<double> bodyMasses(BodyId id) const {
    checkBody(id);
    return bodies_[id].mass;
  }
  std::size_t bodyTriangleCount(BodyId id) const {
    checkBody(id);
    return bodies_[id].tris.size();
  }
  /// Joint anchor and axis in the construction frame as currently posed.
  std::pair<Vec3, Vec3> jointFrame(JointId id) const {
    checkJoint(id);
    const PendingJoint& j = joints_[id];
    const Body& b1 = bodies_[j.body1];
    return {b1.origin + b1.rotation * j.anchorLocal, b1.rotation * j.axisLocal};
  }

  RobotModel finalizeConstruction() {
    checkOpen();
    std::size_t pointTotal = 0;
    double massTotal = 0.0;
    for (const auto& b : bodies_) {
      pointTotal += b.local.size();
      for (double m : b.mass) massTotal += m;
    }
    if (pointTotal == 0) throw SimError(ErrorCode::EmptyRobot, "no mass points were created");
    if (!(massTotal > 0)) throw SimError(ErrorCode::ZeroMass, "robot has no mass");

    RobotModel model;
    // Dense segment numbering; the segment of body 0 is the base.
    std::map<int, int> segOf;
    for (std::size_t b = 0; b < bodies_.size(); ++b) {
      const int r = find(static_cast<int>(b));
      if (!segOf.count(r)) {
        const int next = static_cast<int>(segOf.size());
        segOf[r] = next;
      }
    }
    const int segCount = static_cast<int>(segOf.size());
    auto seg = [&](int body) { return segOf.at(find(body)); };

    // Construction-frame points and CoG.
    Vec3 weighted;
    for (std::size_t bi = 0; bi < bodies_.size(); ++bi) {
      const Body& b = bodies_[bi];
      const auto base = static_cast<std::uint32_t>(model.positions_.size());
      for (std::size_t k = 0; k < b.local.size(); ++k) {
        const Vec3 p = b.origin + b.rotation * b.local[k];
        model.positions_.push_back(p);
        model.masses_.push_back(b.mass[k]);
        model.pointSegment_.push_back(seg(static_cast<int>(bi)));
        model.collides_.push_back(b.isRay ? 0 : 1);
        model.colors_.push_back(b.color);
        weighted += p * b.mass[k];
      }
      for (const auto& t : b.tris)
        model.triangles_.push_back({{base + t.v[0], base + t.v[1], base + t.v[2]}, t.color});
      if (b.isRay) model.rays_.push_back({base, base + 1});
    }
    const Vec3 origin = weighted / massTotal;
    model.origin_ = origin;
    model.totalMass_ = massTotal;
    for (auto& p : model.positions_) p -= origin;

    model.segmentMass_.assign(segCount, 0.0);
    model.segmentCoG_.assign(segCount, Vec3{});
    std::vector<Vec3> unweighted(segCount);
    std::vector<int> counts(segCount, 0);
    for (std::size_t i = 0; i < model.positions_.size(); ++i) {
      const int s = model.pointSegment_[i];
      model.segmentMass_[s] += model.masses_[i];
      model.segmentCoG_[s] += model.positions_[i] * model.masses_[i];
      unweighted[s] += model.positions_[i];
      ++counts[s];
    }
    for (int s = 0; s < segCount; ++s) {
      if (model.segmentMass_[s] > 0)
        model.segmentCoG_[s] = model.segmentCoG_[s] / model.segmentMass_[s];
      else if (counts[s] > 0)
        model.segmentCoG_[s] = unweighted[s] / counts[s];
    }

    // Orient the joint forest away from the base segment.
    std::vector<std::vector<int>> incident(segCount);
    for (std::size_t j = 0; j < joints_.size(); ++j) {
      incident[seg(joints_[j].body1)].push_back(static_cast<int>(j));
      incident[seg(joints_[j].body2)].push_back(static_cast<int>(j));
    }
    model.joints_.resize(joints_.size());
    std::vector<char> seen(segCount, 0);
    for (int root = 0; root < segCount; ++root) {
      if (seen[root]) continue;
      seen[root] = 1;
      std::queue<int> frontier;
      frontier.push(root);
      while (!frontier.empty()) {
        const int s = frontier.front();
        frontier.pop();
        for (int j : incident[s]) {
          const PendingJoint& pj = joints_[j];
          const int s1 = seg(pj.body1), s2 = seg(pj.body2);
          const int other = s1 == s ? s2 : s1;
          if (seen[other]) continue;
          seen[other] = 1;
          frontier.push(other);
          const Body& b1 = bodies_[pj.body1];
          JointDef def;
          def.parent = s;
          def.child = other;
          def.anchor = b1.origin + b1.rotation * pj.anchorLocal - origin;
          def.axis = b1.rotation * pj.axisLocal;
          def.axis = def.axis / norm(def.axis);
          // Joint angle turns body 2 relative to body 1; flip when body 1 is the child.
          if (other == s1) def.axis = -def.axis;
          def.minAngle = pj.minAngle;
          def.maxAngle = pj.maxAngle;
          model.joints_[j] = def;
          model.jointOrder_.push_back(j);
        }
      }
    }

    for (BodyId b : contactSensorBodies_) model.contactSensors_.push_back(seg(b));
    finalized_ = true;
    return model;
  }

 private:
  struct Body {
    std::vector<Vec3> local;
    std::vector<double> mass;
    std::vector<Triangle> tris;  // indices into `local`
    Color color;
    bool isRay = false;
    Vec3 origin;
    Mat3 rotation;
  };

  struct PendingJoint {
    BodyId body1 = 0;
    BodyId body2 = 0;
    Vec3 anchorLocal;
    Vec3 axisLocal;
    double minAngle = -std::numbers::pi;
    double maxAngle = std::numbers::pi;
  };

  void checkOpen() const {
    if (finalized_) throw SimError(ErrorCode::Finalized, "construction already finalized");
  }
  void checkBody(BodyId id) const {
    if (id < 0 || id >= getMaxBodyID())
      throw SimError(ErrorCode::UnknownBody, "body id " + std::to_string(id));
  }
  void checkJoint(JointId id) const {
    if (id < 0 || id >= jointCount())
      throw SimError(ErrorCode::UnknownJoint, "joint id " + std::to_string(id));
  }
  static void checkMass(double m) {
    if (!(m >= 0) || !std::isfinite(m))
      throw SimError(ErrorCode::InvalidMass, "mass must be finite and non-negative");
  }
  static void checkFinite(const Vec3& v) {
    if (!isFinite(v)) throw SimError(ErrorCode::InvalidDimension, "non-finite coordinate");
  }

  Body& newBody(Color color) {
    bodies_.emplace_back();
    bodies_.back().color = color;
    parent_.push_back(static_cast<int>(parent_.size()));
    return bodies_.back();
  }
  BodyId lastId() const { return static_cast<BodyId>(bodies_.size() - 1); }

  int find(int b) {
    while (parent_[b] != b) {
      parent_[b] = parent_[parent_[b]];
      b = parent_[b];
    }
    return b;
  }

  // True if the segments rooted at r1 and r2 are linked by a chain of joints.
  bool jointConnected(int r1, int r2) {
    std::vector<int> reach{r1};
    std::vector<char> visited(bodies_.size(), 0);
    visited[r1] = 1;
    for (std::size_t k = 0; k < reach.size(); ++k) {
      for (const auto& j : joints_) {
        const int a = find(j.body1), b = find(j.body2);
        int next = -1;
        if (a == reach[k]) next = b;
        else if (b == reach[k]) next = a;
        if (next < 0 || visited[next]) continue;
        if (next == r2) return true;
        visited[next] = 1;
        reach.push_back(next);
      }
    }
    return false;
  }

  static std::pair<Vec3, Vec3> perpendicularBasis(const Vec3& dir) {
    const Vec3 helper = std::abs(dir.y) < 0.9 ? Vec3{0, 1, 0} : Vec3{1, 0, 0};
    Vec3 u = cross(dir, helper);
    u = u / norm(u);
    return {u, cross(dir, u)};
  }

  // Eight corners center +- ex +- ey +- ez, twelve triangles.
  static void addBox(Body& b, const Vec3& center, const Vec3& ex, const Vec3& ey, const Vec3& ez,
                     double m) {
    const auto base = static_cast<std::uint32_t>(b.local.size());
    for (int ix = 0; ix < 2; ++ix)
      for (int iy = 0; iy < 2; ++iy)
        for (int iz = 0; iz < 2; ++iz) {
          b.local.push_back(center + ex * (ix ? 1.0 : -1.0) + ey * (iy ? 1.0 : -1.0) +
                            ez * (iz ? 1.0 : -1.0));
          b.mass.push_back(m / 8);
        }
    static constexpr std::uint32_t quads[6][4] = {{0, 1, 3, 2}, {4, 6, 7, 5}, {0, 4, 5, 1},
                                                  {2, 3, 7, 6}, {0, 2, 6, 4}, {1, 5, 7, 3}};
    for (const auto& q : quads) {
      b.tris.push_back({{base + q[0], base + q[1], base + q[2]}, b.color});
      b.tris.push_back({{base + q[0], base + q[2], base + q[3]}, b.color});
    }
  }

  // Surface lattice of the cube [-k,k]^3 projected onto the sphere.
  void addSphereShell(Body& b, const Vec3& center, double rr, double m) const {
    const int k = options_.sphereSubdivision;
    std::map<std::array<int, 3>, std::uint32_t> index;
    for (int i = -k; i <= k; ++i)
      for (int j = -k; j <= k; ++j)
        for (int l = -k; l <= k; ++l) {
          if (std::max({std::abs(i), std::abs(j), std::abs(l)}) != k) continue;
          index[{i, j, l}] = static_cast<std::uint32_t>(b.local.size());
          const Vec3 d{double(i), double(j), double(l)};
          b.local.push_back(center + d * (rr / norm(d)));
        }
    b.mass.assign(b.local.size(), m / static_cast<double>(b.local.size()));
    // Each cube face: fixed coordinate `axis` at +-k, grid over the other two.
    for (int axis = 0; axis < 3; ++axis)
      for (int side : {-k, k})
        for (int a = -k; a < k; ++a)
          for (int c = -k; c < k; ++c) {
            auto at = [&](int p, int q) {
              std::array<int, 3> key{};
              key[axis] = side;
              key[(axis + 1) % 3] = p;
              key[(axis + 2) % 3] = q;
              return index.at(key);
            };
            const std::uint32_t v00 = at(a, c), v10 = at(a + 1, c), v11 = at(a + 1, c + 1),
                                v01 = at(a, c + 1);
            b.tris.push_back({{v00, v10, v11}, b.color});
            b.tris.push_back({{v00, v11, v01}, b.color});
          }
  }

  BuildOptions options_;
  int mode_ = 0;
  bool finalized_ = false;
  std::vector<Body> bodies_;
  std::vector<int> parent_;
  std::vector<PendingJoint> joints_;
  std::vector<BodyId> contactSensorBodies_;
};

}  // namespace pcsim
