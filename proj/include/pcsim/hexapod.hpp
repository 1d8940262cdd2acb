#pragma once

#include <array>
#include <string>

#include "pcsim/builder.hpp"
#include "pcsim/vm.hpp"
#include "pcsim/vm_asm.hpp"

namespace pcsim {

// Six-legged walker with 18 hinge joints and a contact sensor on each foot.
// x is forward, z points to the robot's right. Legs are numbered
//   0 front-right, 1 middle-right, 2 rear-right,
//   3 front-left,  4 middle-left,  5 rear-left,
// and leg l owns motors 3l (coxa), 3l+1 (femur), 3l+2 (tibia). Positive
// coxa angles swing the leg forward, positive femur angles lift it, positive
// tibia angles fold the foot outwards. Sensor l is the foot of leg l.
struct HexapodOptions {
  int simplifyMode = 2;
  double bodyMass = 1.2;
  double coxaLimit = 0.4;
  double femurMin = -0.3;
  double femurMax = 0.6;
  double tibiaLimit = 0.5;
};

inline RobotModel buildHexapod(const HexapodOptions& opt = {}) {
  RobotBuilder b;
  const BodyId body = b.createBox(0.30, 0.06, 0.16, 0, 0, 0, opt.bodyMass, {0.2, 0.4, 0.8});
  b.simplifyMode(opt.simplifyMode);
  constexpr std::array<double, 3> legX{0.12, 0.0, -0.12};
  for (int side : {1, -1}) {
    for (double x : legX) {
      const double s = side;
      const BodyId coxa = b.createCylinder(x, 0, s * 0.08, x, 0, s * 0.12, 0.015, 0.04);
      const BodyId femur = b.createCylinder(x, 0, s * 0.12, x, 0, s * 0.20, 0.012, 0.06);
      const BodyId tibia =
          b.createCylinder(x, 0, s * 0.20, x, -0.14, s * 0.20, 0.010, 0.05, {0.9, 0.3, 0.2});
      const JointId hip = b.createJoint(body, coxa, x, 0, s * 0.08, 0, s, 0);
      const JointId knee = b.createJoint(coxa, femur, x, 0, s * 0.12, -s, 0, 0);
      const JointId ankle = b.createJoint(femur, tibia, x, 0, s * 0.20, -s, 0, 0);
      b.setJointLimits(hip, -opt.coxaLimit, opt.coxaLimit);
      b.setJointLimits(knee, opt.femurMin, opt.femurMax);
      b.setJointLimits(ankle, -opt.tibiaLimit, opt.tibiaLimit);
      b.addContactSensor(tibia);
    }
  }
  return b.finalizeConstruction();
}

// Alternating tripod: legs {0, 2, 4} are raised and lowered; legs {1, 3, 5}
// keep their femurs at zero. Lowered, the first tripod carries the robot;
// raised, the second one does.
inline constexpr const char* kTripodGaitSource = R"(# tripod gait for the built-in hexapod
load 31          # lower tripod {0,2,4}: it takes the weight
move_left 1
move_left 7
move_left 13
dec
jump_if 1
load 31          # stance sweep back, swing tripod forward
move_left 0
move_left 6
move_left 12
move_right 3
move_right 9
move_right 15
dec
jump_if 7
load 31          # raise tripod {0,2,4}: {1,3,5} takes the weight
move_right 1
move_right 7
move_right 13
dec
jump_if 16
load 31          # swing tripod forward, stance sweep back
move_right 0
move_right 6
move_right 12
move_left 3
move_left 9
move_left 15
dec
jump_if 22
inc
inc
)";

inline vm::Program tripodGaitProgram() { return vm::assemble(kTripodGaitSource); }

}  // namespace pcsim
