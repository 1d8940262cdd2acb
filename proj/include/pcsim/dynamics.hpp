#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <vector>

#include "pcsim/error.hpp"
#include "pcsim/friction.hpp"
#include "pcsim/geom.hpp"
#include "pcsim/model.hpp"
#include "pcsim/terrain.hpp"

namespace pcsim {

struct SimConfig {
  double dt = 0.010;            // seconds per step
  int jointUpdatePeriod = 8;    // controller runs every 8 steps (80 ms)
  double gravity = kGravity;
  double maxJointSpeed = 4.0;   // rad/s
  bool tipping = false;         // experimental, see Simulation::applyTipping
  double tippingRate = 1.0;     // rad/s
  bool weightByPenetration = false;
};

inline constexpr double kNoHit = -1.0;

struct SensorFrame {
  std::vector<std::uint8_t> footContacts;  // one per contact sensor
  std::vector<double> rayDistances;        // meters, kNoHit when the ray misses
};

/// User control hook, called every `jointUpdatePeriod` steps. It may only
/// change joint targets; the simulator slews the joints towards them.
class Controller {
 public:
  virtual ~Controller() = default;
  virtual void move(const SensorFrame& sensors, std::span<double> jointTargets) = 0;
};

class NullController final : public Controller {
 public:
  void move(const SensorFrame&, std::span<double>) override {}
};

struct PoseState {
  BodyPose base;  // world placement of the model frame
  double verticalVelocity = 0.0;
  std::vector<double> jointAngles;
  std::vector<double> jointTargets;
  std::int64_t stepCounter = 0;
  // Ground-plane positions of the points that were in contact last step.
  std::vector<std::uint8_t> prevInContact;
  std::vector<double> prevContactX;
  std::vector<double> prevContactZ;
  SensorFrame sensors;
  std::vector<Vec3> worldPoints;
};

inline double bodyYaw(const Mat3& r) { return std::atan2(r(0, 2), r(2, 2)); }

/// Wall-clock seconds spent per phase, accumulated over steps.
struct StepProfile {
  double controller = 0.0;
  double kinematics = 0.0;
  double contacts = 0.0;
  double friction = 0.0;
  double sensors = 0.0;
  std::int64_t steps = 0;
};

struct RunSummary {
  std::int64_t steps = 0;
  Vec3 startCoG;
  Vec3 endCoG;
  double walkedDistance = 0.0;  // planar start-to-end CoG distance
  std::vector<Vec3> cogSamples;
  PoseState finalState;
};

/// One robot on one terrain. Holds the evolving PoseState plus scratch
/// buffers; a step is a deterministic function of the state and the
/// controller's outputs.
class Simulation {
 public:
  Simulation(const RobotModel& model, const HeightField& terrain, SimConfig config = {})
      : model_(&model), terrain_(&terrain), config_(config) {
    if (!(config_.dt > 0) || config_.jointUpdatePeriod < 1)
      throw SimError(ErrorCode::InvalidDimension, "dt must be positive and period >= 1");
    segR_.resize(model.segmentCount());
    segT_.resize(model.segmentCount());
    jointRot_.resize(model.jointCount());
    jointRotAngle_.assign(model.jointCount(), std::numeric_limits<double>::quiet_NaN());
    reset({0, 0, 0});
  }

  const RobotModel& model() const { return *model_; }
  const HeightField& terrain() const { return *terrain_; }
  const SimConfig& config() const { return config_; }
  PoseState& state() { return state_; }
  const PoseState& state() const { return state_; }

  /// Places the model frame at `position` with zero joint angles and no motion.
  void reset(const Vec3& position, const Mat3& rotation = Mat3::identity()) {
    const std::size_t n = model_->pointCount();
    state_ = PoseState{};
    state_.base = {position, rotation};
    state_.jointAngles.assign(model_->jointCount(), 0.0);
    state_.jointTargets.assign(model_->jointCount(), 0.0);
    state_.prevInContact.assign(n, 0);
    state_.prevContactX.assign(n, 0.0);
    state_.prevContactZ.assign(n, 0.0);
    state_.worldPoints.resize(n);
    forwardKinematics();
    terrain_->findContacts(state_.worldPoints, model_->pointCollides(), contacts_);
    updateSensors();
  }

  void setState(PoseState s) {
    if (s.jointAngles.size() != model_->jointCount() ||
        s.worldPoints.size() != model_->pointCount() ||
        s.prevInContact.size() != model_->pointCount())
      throw SimError(ErrorCode::InvalidDimension, "state does not match model");
    state_ = std::move(s);
  }

  void simulateStep(Controller& controller, StepProfile* profile = nullptr) {
    using Clock = std::chrono::steady_clock;
    auto mark = profile ? Clock::now() : Clock::time_point{};
    auto lap = [&](double StepProfile::*field) {
      if (!profile) return;
      const auto now = Clock::now();
      profile->*field += std::chrono::duration<double>(now - mark).count();
      mark = now;
    };
    PoseState& s = state_;
    const auto joints = model_->joints();

    // (1) controller cadence
    if (s.stepCounter % config_.jointUpdatePeriod == 0) {
      controller.move(s.sensors, s.jointTargets);
      for (std::size_t j = 0; j < joints.size(); ++j) {
        double& t = s.jointTargets[j];
        if (!std::isfinite(t)) t = s.jointAngles[j];
        t = std::clamp(t, joints[j].minAngle, joints[j].maxAngle);
      }
    }
    lap(&StepProfile::controller);

    // (2) rate-limited joint slew, (3) forward kinematics
    const double maxDelta = config_.maxJointSpeed * config_.dt;
    for (std::size_t j = 0; j < joints.size(); ++j) {
      double& a = s.jointAngles[j];
      a += std::clamp(s.jointTargets[j] - a, -maxDelta, maxDelta);
      a = std::clamp(a, joints[j].minAngle, joints[j].maxAngle);
    }
    forwardKinematics();
    lap(&StepProfile::kinematics);

    // (4) vertical motion under gravity, exact for constant acceleration
    const double vNext = s.verticalVelocity - config_.gravity * config_.dt;
    shiftVertical(0.5 * (s.verticalVelocity + vNext) * config_.dt);
    s.verticalVelocity = vNext;

    // (5) contacts and inelastic penetration resolution
    terrain_->findContacts(s.worldPoints, model_->pointCollides(), contacts_);
    if (!contacts_.empty()) {
      double deepest = 0.0;
      for (const auto& c : contacts_) deepest = std::max(deepest, c.penetration);
      if (deepest > 0) shiftVertical(deepest);
      s.verticalVelocity = std::max(s.verticalVelocity, 0.0);
    }
    lap(&StepProfile::contacts);

    // (6) static friction on points in contact in both steps
    pairs_.clear();
    for (const auto& c : contacts_) {
      if (!s.prevInContact[c.pointIndex]) continue;
      const Vec3& p = s.worldPoints[c.pointIndex];
      const double w = config_.weightByPenetration ? c.penetration + 1e-6 : 1.0;
      pairs_.push_back({s.prevContactX[c.pointIndex], s.prevContactZ[c.pointIndex], p.x, p.z, w});
    }
    const AlignmentResult fit = alignContacts(pairs_);
    if (fit.status != AlignmentStatus::NoContacts) {
      const double yaw = alignmentYaw(fit.solution);
      const double cy = std::cos(yaw), sy = std::sin(yaw);
      s.base.position = applyAlignment(s.base.position, fit.solution, cy, sy);
      s.base.rotation = rotationY(yaw) * s.base.rotation;
      for (auto& p : s.worldPoints) p = applyAlignment(p, fit.solution, cy, sy);
    }

    // (7) optional tipping
    if (config_.tipping) applyTipping();

    // (8) remember this step's contacts
    std::fill(s.prevInContact.begin(), s.prevInContact.end(), std::uint8_t{0});
    for (const auto& c : contacts_) {
      const Vec3& p = s.worldPoints[c.pointIndex];
      s.prevInContact[c.pointIndex] = 1;
      s.prevContactX[c.pointIndex] = p.x;
      s.prevContactZ[c.pointIndex] = p.z;
    }
    lap(&StepProfile::friction);

    // (9) sensors
    updateSensors();
    lap(&StepProfile::sensors);

    ++s.stepCounter;
    if (profile) ++profile->steps;
    if (!isFinite(s.base.position) || !std::isfinite(s.verticalVelocity))
      throw SimError(ErrorCode::NumericalBlowup,
                     "non-finite state at step " + std::to_string(s.stepCounter));
  }

  SensorFrame readSensors() const { return state_.sensors; }
  std::span<const Contact> lastContacts() const { return contacts_; }

  Vec3 centerOfGravity() const {
    const auto masses = model_->pointMasses();
    Vec3 acc;
    for (std::size_t i = 0; i < masses.size(); ++i) acc += state_.worldPoints[i] * masses[i];
    return acc / model_->totalMass();
  }

  /// Runs round(seconds / dt) steps. `observer`, if set, is called after
  /// every step.
  RunSummary runFor(Controller& controller, double seconds, int sampleEvery = 100,
                    const std::function<void(const Simulation&)>& observer = {}) {
    if (!(seconds > 0)) throw SimError(ErrorCode::InvalidDimension, "run length must be positive");
    RunSummary out;
    out.steps = std::llround(seconds / config_.dt);
    out.startCoG = centerOfGravity();
    out.cogSamples.push_back(out.startCoG);
    for (std::int64_t k = 0; k < out.steps; ++k) {
      simulateStep(controller);
      if (observer) observer(*this);
      if (sampleEvery > 0 && (k + 1) % sampleEvery == 0) out.cogSamples.push_back(centerOfGravity());
    }
    out.endCoG = centerOfGravity();
    out.walkedDistance = std::hypot(out.endCoG.x - out.startCoG.x, out.endCoG.z - out.startCoG.z);
    out.finalState = state_;
    return out;
  }

 private:
  void forwardKinematics() {
    PoseState& s = state_;
    const auto joints = model_->joints();
    std::fill(segR_.begin(), segR_.end(), s.base.rotation);
    std::fill(segT_.begin(), segT_.end(), s.base.position);
    for (int j : model_->jointOrder()) {
      const JointDef& def = joints[j];
      if (s.jointAngles[j] != jointRotAngle_[j]) {
        jointRot_[j] = axisAngle(def.axis, s.jointAngles[j]);
        jointRotAngle_[j] = s.jointAngles[j];
      }
      const Mat3& q = jointRot_[j];
      const Mat3& rp = segR_[def.parent];
      segT_[def.child] = segT_[def.parent] + rp * (def.anchor - q * def.anchor);
      segR_[def.child] = rp * q;
    }
    const auto local = model_->pointPositions();
    const auto seg = model_->pointSegments();
    for (std::size_t i = 0; i < local.size(); ++i)
      s.worldPoints[i] = segR_[seg[i]] * local[i] + segT_[seg[i]];
  }

  void shiftVertical(double dy) {
    state_.base.position.y += dy;
    for (auto& p : state_.worldPoints) p.y += dy;
  }

  void updateSensors() {
    PoseState& s = state_;
    const auto sensorSegs = model_->contactSensorSegments();
    const auto pointSeg = model_->pointSegments();
    s.sensors.footContacts.assign(sensorSegs.size(), 0);
    for (const auto& c : contacts_) {
      const int seg = pointSeg[c.pointIndex];
      for (std::size_t k = 0; k < sensorSegs.size(); ++k)
        if (sensorSegs[k] == seg) s.sensors.footContacts[k] = 1;
    }
    const auto rays = model_->raySensors();
    s.sensors.rayDistances.resize(rays.size());
    for (std::size_t k = 0; k < rays.size(); ++k) {
      const auto hit = terrain_->castRay(s.worldPoints[rays[k].startPoint],
                                         s.worldPoints[rays[k].endPoint]);
      s.sensors.rayDistances[k] = hit ? *hit : kNoHit;
    }
  }

  // When the CoG's ground projection leaves the support polygon of the
  // current contacts, rotate the body about the nearest support point so the
  // CoG drops outwards, at most tippingRate * dt per step.
  void applyTipping() {
    if (contacts_.empty()) return;
    std::vector<std::array<double, 2>> support;
    support.reserve(contacts_.size());
    for (const auto& c : contacts_) {
      const Vec3& p = state_.worldPoints[c.pointIndex];
      support.push_back({p.x, p.z});
    }
    const auto hull = convexHull(std::move(support));
    const Vec3 cog = centerOfGravity();
    const std::array<double, 2> g{cog.x, cog.z};
    if (hull.size() >= 3 && insideConvex(hull, g)) return;
    const auto nearest = nearestOnPolygon(hull, g);
    const Vec3 d{g[0] - nearest[0], 0.0, g[1] - nearest[1]};
    const double dn = norm(d);
    if (!(dn > 1e-9)) return;
    const Vec3 axis = cross(Vec3{0, 1, 0}, d) / dn;
    const Mat3 q = axisAngle(axis, config_.tippingRate * config_.dt);
    double pivotY = 0.0;
    for (const auto& c : contacts_) pivotY += state_.worldPoints[c.pointIndex].y;
    const Vec3 pivot{nearest[0], pivotY / contacts_.size(), nearest[1]};
    state_.base.position = pivot + q * (state_.base.position - pivot);
    state_.base.rotation = q * state_.base.rotation;
    for (auto& p : state_.worldPoints) p = pivot + q * (p - pivot);
  }

  using P2 = std::array<double, 2>;

  static double cross2(const P2& o, const P2& a, const P2& b) {
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
  }

  // Andrew's monotone chain; counter-clockwise, no repeated endpoint.
  static std::vector<P2> convexHull(std::vector<P2> pts) {
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    if (pts.size() < 3) return pts;
    std::vector<P2> hull(2 * pts.size());
    std::size_t k = 0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      while (k >= 2 && cross2(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
      hull[k++] = pts[i];
    }
    for (std::size_t i = pts.size() - 1, t = k + 1; i > 0; --i) {
      while (k >= t && cross2(hull[k - 2], hull[k - 1], pts[i - 1]) <= 0) --k;
      hull[k++] = pts[i - 1];
    }
    hull.resize(k - 1);
    return hull;
  }

  static bool insideConvex(const std::vector<P2>& hull, const P2& p) {
    for (std::size_t i = 0; i < hull.size(); ++i)
      if (cross2(hull[i], hull[(i + 1) % hull.size()], p) < 0) return false;
    return true;
  }

  static P2 nearestOnPolygon(const std::vector<P2>& poly, const P2& p) {
    if (poly.size() == 1) return poly[0];
    P2 best = poly[0];
    double bestD = std::numeric_limits<double>::infinity();
    const std::size_t edges = poly.size() == 2 ? 1 : poly.size();
    for (std::size_t i = 0; i < edges; ++i) {
      const P2& a = poly[i];
      const P2& b = poly[(i + 1) % poly.size()];
      const double ex = b[0] - a[0], ez = b[1] - a[1];
      const double len2 = ex * ex + ez * ez;
      double t = len2 > 0 ? ((p[0] - a[0]) * ex + (p[1] - a[1]) * ez) / len2 : 0.0;
      t = std::clamp(t, 0.0, 1.0);
      const P2 q{a[0] + t * ex, a[1] + t * ez};
      const double d = (q[0] - p[0]) * (q[0] - p[0]) + (q[1] - p[1]) * (q[1] - p[1]);
      if (d < bestD) {
        bestD = d;
        best = q;
      }
    }
    return best;
  }

  const RobotModel* model_;
  const HeightField* terrain_;
  SimConfig config_;
  PoseState state_;
  std::vector<Mat3> segR_;
  std::vector<Vec3> segT_;
  std::vector<Mat3> jointRot_;
  std::vector<double> jointRotAngle_;
  std::vector<Contact> contacts_;
  std::vector<ContactPair> pairs_;
};

/// Drops the robot onto the terrain at (x, z) and lets it settle with all
/// joints at zero. The returned state is the spawn pose used for evaluation.
inline PoseState settledPose(const RobotModel& model, const HeightField& terrain,
                             const SimConfig& config, double x = 0.0, double z = 0.0,
                             double settleSeconds = 0.5) {
  Simulation sim(model, terrain, config);
  sim.reset({x, 0.0, z});
  double lift = -std::numeric_limits<double>::infinity();
  const auto collides = model.pointCollides();
  for (std::size_t i = 0; i < model.pointCount(); ++i) {
    if (!collides[i]) continue;
    const Vec3& p = sim.state().worldPoints[i];
    lift = std::max(lift, terrain.heightAt(p.x, p.z) - p.y);
  }
  if (!std::isfinite(lift)) lift = 0.0;
  sim.reset({x, lift + 0.01, z});
  NullController idle;
  const auto steps = std::llround(settleSeconds / config.dt);
  for (std::int64_t k = 0; k < steps; ++k) sim.simulateStep(idle);
  PoseState s = sim.state();
  s.stepCounter = 0;
  return s;
}

}  // namespace pcsim
