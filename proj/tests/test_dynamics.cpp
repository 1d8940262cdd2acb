#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "oracles.hpp"
#include "pcsim/dynamics.hpp"
#include "pcsim/hexapod.hpp"
#include "pcsim/vm.hpp"

using namespace pcsim;

namespace {

RobotModel singlePoint(double mass = 1.0) {
  RobotBuilder b;
  b.createPoint(0, 0, 0, mass);
  return b.finalizeConstruction();
}

RobotModel unitBox() {
  RobotBuilder b;
  b.createBox(0.2, 0.1, 0.3, 0, 0, 0, 2.0);
  return b.finalizeConstruction();
}

class CountingController final : public Controller {
 public:
  std::vector<std::int64_t> calls;
  const Simulation* sim = nullptr;
  void move(const SensorFrame&, std::span<double>) override { calls.push_back(sim->state().stepCounter); }
};

class GarbageController final : public Controller {
 public:
  void move(const SensorFrame&, std::span<double> t) override {
    for (std::size_t k = 0; k < t.size(); ++k)
      t[k] = k % 3 == 0 ? std::numeric_limits<double>::quiet_NaN() : (k % 3 == 1 ? 1e9 : -1e9);
  }
};

}  // namespace

TEST(FreeFall, MatchesAnalyticDrop) {
  const RobotModel m = singlePoint();
  const HeightField ground = HeightField::flat(4, 4, 1.0, -100.0, {-2, 0, -2});
  Simulation sim(m, ground);
  sim.reset({0, 10, 0});
  NullController idle;
  for (int k = 0; k < 100; ++k) sim.simulateStep(idle);
  const double drop = 10.0 - sim.centerOfGravity().y;
  const double expected = oracle::freeFallDrop(kGravity, 0.01, 100);
  EXPECT_NEAR(expected, 4.905, 1e-12);
  EXPECT_NEAR(drop, expected, 0.05);
  EXPECT_NEAR(drop, expected, 0.01 * expected);
  EXPECT_NEAR(sim.state().verticalVelocity, -kGravity, 1e-9);
}

TEST(FreeFall, NeverTunnelsThroughGround) {
  const RobotModel m = singlePoint();
  const HeightField ground = HeightField::flatCentered(4.0);
  Simulation sim(m, ground);
  sim.reset({0.05, 1.0, 0.05});
  NullController idle;
  for (int k = 0; k < 300; ++k) {
    const double v = std::abs(sim.state().verticalVelocity - kGravity * 0.01);
    sim.simulateStep(idle);
    EXPECT_GE(sim.state().worldPoints[0].y, -v * 0.01);
    EXPECT_GE(sim.state().worldPoints[0].y, 0.0);
  }
  EXPECT_EQ(sim.state().worldPoints[0].y, 0.0);
  EXPECT_EQ(sim.state().verticalVelocity, 0.0);
}

TEST(Resting, BoxDoesNotDrift) {
  const RobotModel m = unitBox();
  const HeightField ground = HeightField::flatCentered(4.0);
  Simulation sim(m, ground);
  sim.reset({0.013, 0.05, -0.021});
  NullController idle;
  for (int k = 0; k < 100; ++k) sim.simulateStep(idle);
  const Vec3 settled = sim.centerOfGravity();
  for (int k = 0; k < 10000; ++k) sim.simulateStep(idle);
  const Vec3 end = sim.centerOfGravity();
  EXPECT_LT(std::abs(end.y - settled.y), 1e-6);
  EXPECT_LT(std::hypot(end.x - settled.x, end.z - settled.z), 1e-6);
}

TEST(Cadence, ControllerRunsEveryEighthStep) {
  const RobotModel m = buildHexapod();
  const HeightField ground = HeightField::flatCentered(4.0);
  Simulation sim(m, ground);
  CountingController c;
  c.sim = &sim;
  for (int k = 0; k < 100; ++k) {
    const auto before = sim.state().stepCounter;
    sim.simulateStep(c);
    EXPECT_EQ(sim.state().stepCounter, before + 1);
  }
  ASSERT_EQ(c.calls.size(), 13u);
  for (std::size_t k = 0; k < c.calls.size(); ++k) EXPECT_EQ(c.calls[k], 8 * static_cast<long>(k));
}

TEST(Joints, SlewIsRateLimitedAndClamped) {
  const RobotModel m = buildHexapod();
  const HeightField ground = HeightField::flatCentered(4.0);
  Simulation sim(m, ground);
  GarbageController g;
  sim.simulateStep(g);
  for (std::size_t j = 0; j < m.jointCount(); ++j) {
    EXPECT_LE(std::abs(sim.state().jointAngles[j]), 4.0 * 0.01 + 1e-15);
    EXPECT_TRUE(std::isfinite(sim.state().jointTargets[j]));
    EXPECT_GE(sim.state().jointTargets[j], m.joints()[j].minAngle);
    EXPECT_LE(sim.state().jointTargets[j], m.joints()[j].maxAngle);
  }
  for (int k = 0; k < 200; ++k) sim.simulateStep(g);
  for (std::size_t j = 0; j < m.jointCount(); ++j) {
    EXPECT_GE(sim.state().jointAngles[j], m.joints()[j].minAngle);
    EXPECT_LE(sim.state().jointAngles[j], m.joints()[j].maxAngle);
  }
}

TEST(Kinematics, HipRotationMovesOnlyItsLeg) {
  const RobotModel m = buildHexapod();
  const HeightField ground = HeightField::flat(4, 4, 1.0, -10.0, {-2, 0, -2});
  Simulation sim(m, ground);
  sim.reset({0, 1, 0});
  const auto before = sim.state().worldPoints;
  PoseState s = sim.state();
  s.jointAngles[0] = 0.3;
  s.jointTargets[0] = 0.3;
  sim.setState(s);
  NullController idle;
  sim.simulateStep(idle);
  const auto after = sim.state().worldPoints;
  const double fall = before[0].y - after[0].y;
  const auto seg = m.pointSegments();
  for (std::size_t i = 0; i < after.size(); ++i) {
    const bool leg0 = seg[i] >= 1 && seg[i] <= 3;
    const Vec3 d = after[i] - before[i];
    if (!leg0) {
      EXPECT_NEAR(d.x, 0, 1e-15);
      EXPECT_NEAR(d.y, -fall, 1e-12);
      EXPECT_NEAR(d.z, 0, 1e-15);
    }
    // Every point keeps its distance from the hip axis (vertical through the hip).
    const Vec3 hip = m.joints()[0].anchor;
    const double r0 = std::hypot(before[i].x - hip.x, before[i].z - hip.z);
    const double r1 = std::hypot(after[i].x - hip.x, after[i].z - hip.z);
    if (leg0) EXPECT_NEAR(r0, r1, 1e-12);
  }
}

TEST(Hexapod, StandsWithAllFeetDown) {
  const RobotModel m = buildHexapod();
  const HeightField ground = HeightField::flatCentered(4.0);
  const PoseState s = settledPose(m, ground, {});
  ASSERT_EQ(s.sensors.footContacts.size(), 6u);
  for (auto bit : s.sensors.footContacts) EXPECT_EQ(bit, 1);
  EXPECT_EQ(s.stepCounter, 0);
}

TEST(Hexapod, LiftedReadsNoContacts) {
  const RobotModel m = buildHexapod();
  const HeightField ground = HeightField::flatCentered(4.0);
  Simulation sim(m, ground);
  sim.reset({0, 1, 0});
  NullController idle;
  sim.simulateStep(idle);
  for (auto bit : sim.readSensors().footContacts) EXPECT_EQ(bit, 0);
}

TEST(Hexapod, PitUnderOneFootClearsOnlyThatSensor) {
  const RobotModel m = buildHexapod();
  const HeightField flat = HeightField::flatCentered(4.0);
  const PoseState spawn = settledPose(m, flat, {});
  for (std::size_t leg = 0; leg < 6; ++leg) {
    // Dig a 0.5 m pit around the lowest point of this leg's foot segment.
    const int footSeg = m.contactSensorSegments()[leg];
    Vec3 foot{0, 1e9, 0};
    for (std::size_t i = 0; i < m.pointCount(); ++i)
      if (m.pointSegments()[i] == footSeg && spawn.worldPoints[i].y < foot.y) foot = spawn.worldPoints[i];
    std::vector<double> h(flat.heights().begin(), flat.heights().end());
    for (int i = 0; i < flat.rows(); ++i)
      for (int j = 0; j < flat.cols(); ++j) {
        const double cx = flat.origin().x + (i + 0.5) / flat.scale();
        const double cz = flat.origin().z + (j + 0.5) / flat.scale();
        if (std::abs(cx - foot.x) < 0.06 && std::abs(cz - foot.z) < 0.06) h[i * flat.cols() + j] = -0.5;
      }
    const HeightField pit(flat.rows(), flat.cols(), flat.scale(), h, flat.origin());
    Simulation sim(m, pit);
    sim.setState(spawn);
    NullController idle;
    sim.simulateStep(idle);
    const auto bits = sim.readSensors().footContacts;
    for (std::size_t k = 0; k < 6; ++k) EXPECT_EQ(bits[k], k == leg ? 0 : 1) << "leg " << leg;
  }
}

TEST(Hexapod, IdleIsStable) {
  const RobotModel m = buildHexapod();
  const HeightField ground = HeightField::flatCentered(4.0);
  Simulation sim(m, ground);
  sim.setState(settledPose(m, ground, {}));
  NullController idle;
  const RunSummary r = sim.runFor(idle, 1000.0);
  EXPECT_EQ(r.steps, 100000);
  EXPECT_LT(r.walkedDistance, 0.01);
  EXPECT_LT(std::abs(r.endCoG.y - r.startCoG.y), 0.01);
}

TEST(RunFor, StepCountAndSamples) {
  const RobotModel m = unitBox();
  const HeightField ground = HeightField::flatCentered(4.0);
  Simulation sim(m, ground);
  sim.reset({0, 0.05, 0});
  NullController idle;
  const RunSummary r = sim.runFor(idle, 120.0);
  EXPECT_EQ(r.steps, 12000);
  EXPECT_EQ(sim.state().stepCounter, 12000);
  EXPECT_EQ(r.cogSamples.size(), 121u);
  EXPECT_THROW(sim.runFor(idle, 0.0), SimError);
}

TEST(Determinism, RepeatedRunsAreBitIdentical) {
  const RobotModel m = buildHexapod();
  const HeightField ground = HeightField::flatCentered(20.0);
  const PoseState spawn = settledPose(m, ground, {});
  auto run = [&] {
    Simulation sim(m, ground);
    sim.setState(spawn);
    vm::VmController c(tripodGaitProgram());
    sim.runFor(c, 5.0);
    return sim.state();
  };
  const PoseState a = run(), b = run();
  ASSERT_EQ(a.worldPoints.size(), b.worldPoints.size());
  for (std::size_t i = 0; i < a.worldPoints.size(); ++i) EXPECT_EQ(a.worldPoints[i], b.worldPoints[i]);
  EXPECT_EQ(a.jointAngles, b.jointAngles);
  EXPECT_EQ(a.base.rotation.m, b.base.rotation.m);
}

TEST(Locomotion, TripodGaitWalks) {
  const RobotModel m = buildHexapod();
  const HeightField ground = HeightField::flatCentered(20.0);
  Simulation sim(m, ground);
  sim.setState(settledPose(m, ground, {}));
  vm::VmController c(tripodGaitProgram());
  const RunSummary r = sim.runFor(c, 10.0);
  EXPECT_GT(r.walkedDistance, 0.1);
}

TEST(Tipping, OverhangingMassTipsOverWhenEnabled) {
  RobotBuilder b;
  b.createBox(0.2, 0.1, 0.2, 0, 0, 0, 1.0);
  b.createPoint(1.0, 0.5, 0, 10.0);
  b.connectBodies(0, 1);
  const RobotModel m = b.finalizeConstruction();
  const HeightField ground = HeightField::flatCentered(6.0);
  for (bool tipping : {false, true}) {
    SimConfig cfg;
    cfg.tipping = tipping;
    Simulation sim(m, ground, cfg);
    sim.reset({0, 0.2, 0});
    NullController idle;
    for (int k = 0; k < 20; ++k) sim.simulateStep(idle);
    const double y0 = sim.state().worldPoints[8].y;
    for (int k = 0; k < 50; ++k) sim.simulateStep(idle);
    const double y1 = sim.state().worldPoints[8].y;
    if (tipping)
      EXPECT_LT(y1, y0 - 0.1);
    else
      EXPECT_NEAR(y1, y0, 1e-12);
    for (const auto& p : sim.state().worldPoints) EXPECT_TRUE(isFinite(p));
  }
}

TEST(Tipping, HexapodGaitStaysFinite) {
  const RobotModel m = buildHexapod();
  const HeightField ground = HeightField::flatCentered(20.0);
  SimConfig cfg;
  cfg.tipping = true;
  Simulation sim(m, ground, cfg);
  sim.setState(settledPose(m, ground, cfg));
  vm::VmController c(tripodGaitProgram());
  const RunSummary r = sim.runFor(c, 10.0);
  EXPECT_TRUE(isFinite(r.endCoG));
}

TEST(Blowup, NonFiniteStateIsReported) {
  const RobotModel m = singlePoint();
  const HeightField ground = HeightField::flat(4, 4, 1.0, -100.0, {-2, 0, -2});
  SimConfig cfg;
  cfg.gravity = std::numeric_limits<double>::infinity();
  Simulation sim(m, ground, cfg);
  sim.reset({0, 1, 0});
  NullController idle;
  try {
    sim.simulateStep(idle);
    FAIL() << "expected NumericalBlowup";
  } catch (const SimError& e) {
    EXPECT_EQ(e.code(), ErrorCode::NumericalBlowup);
  }
}

TEST(State, SetStateRejectsMismatchedSizes) {
  const RobotModel hex = buildHexapod();
  const RobotModel box = unitBox();
  const HeightField ground = HeightField::flatCentered(4.0);
  Simulation a(hex, ground), b(box, ground);
  EXPECT_THROW(b.setState(a.state()), SimError);
}

TEST(Sensors, RayDistanceReported) {
  RobotBuilder b;
  b.createBox(0.2, 0.1, 0.2, 0, 0, 0, 1.0);
  const BodyId ray = b.createRay(0, 0, 0, 0, -2, 0);
  b.connectBodies(0, ray);
  const RobotModel m = b.finalizeConstruction();
  const HeightField ground = HeightField::flatCentered(4.0);
  Simulation sim(m, ground);
  sim.reset({0, 1.0, 0});
  ASSERT_EQ(sim.readSensors().rayDistances.size(), 1u);
  EXPECT_NEAR(sim.readSensors().rayDistances[0], 1.0, 1e-3);
  sim.reset({0, 3.0, 0});
  EXPECT_EQ(sim.readSensors().rayDistances[0], kNoHit);
}
