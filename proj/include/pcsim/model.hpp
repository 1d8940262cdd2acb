#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "pcsim/geom.hpp"

namespace pcsim {

using BodyId = int;
using JointId = int;

struct Triangle {
  std::array<std::uint32_t, 3> v{};
  Color color;
};

/// Hinge joint resolved into the model frame. `child` rotates relative to
/// `parent` by the joint angle about `axis` through `anchor`.
struct JointDef {
  int parent = 0;
  int child = 0;
  Vec3 anchor;
  Vec3 axis{0, 1, 0};
  double minAngle = 0.0;
  double maxAngle = 0.0;
};

struct RaySensor {
  std::uint32_t startPoint = 0;
  std::uint32_t endPoint = 0;
};

/// Immutable robot description produced by RobotBuilder::finalizeConstruction().
///
/// Point positions are expressed in the model frame: the construction frame
/// shifted so that the robot's center of gravity (all joints at zero) is the
/// origin. Segment 0 is the base segment. Joint indices equal the JointIds
/// returned during construction; `jointOrder()` lists them parent-first.
/// Sensor indices enumerate contact sensors first, then rays.
class RobotModel {
 public:
  std::size_t pointCount() const { return positions_.size(); }
  std::span<const Vec3> pointPositions() const { return positions_; }
  std::span<const double> pointMasses() const { return masses_; }
  std::span<const int> pointSegments() const { return pointSegment_; }
  std::span<const std::uint8_t> pointCollides() const { return collides_; }
  std::span<const Color> pointColors() const { return colors_; }
  std::span<const Triangle> triangles() const { return triangles_; }

  std::size_t segmentCount() const { return segmentMass_.size(); }
  std::span<const double> segmentMasses() const { return segmentMass_; }
  std::span<const Vec3> segmentCenters() const { return segmentCoG_; }

  std::size_t jointCount() const { return joints_.size(); }
  std::span<const JointDef> joints() const { return joints_; }
  std::span<const int> jointOrder() const { return jointOrder_; }

  std::span<const int> contactSensorSegments() const { return contactSensors_; }
  std::span<const RaySensor> raySensors() const { return rays_; }
  std::size_t sensorCount() const { return contactSensors_.size() + rays_.size(); }

  double totalMass() const { return totalMass_; }
  /// Offset that was subtracted from construction coordinates.
  Vec3 constructionOrigin() const { return origin_; }

 private:
  friend class RobotBuilder;

  std::vector<Vec3> positions_;
  std::vector<double> masses_;
  std::vector<int> pointSegment_;
  std::vector<std::uint8_t> collides_;
  std::vector<Color> colors_;
  std::vector<Triangle> triangles_;
  std::vector<double> segmentMass_;
  std::vector<Vec3> segmentCoG_;
  std::vector<JointDef> joints_;
  std::vector<int> jointOrder_;
  std::vector<int> contactSensors_;
  std::vector<RaySensor> rays_;
  double totalMass_ = 0.0;
  Vec3 origin_;
};

}  // namespace pcsim
