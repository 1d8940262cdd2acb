#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "pcsim/dynamics.hpp"

namespace pcsim::vm {

inline constexpr std::size_t kProgramSize = 32;

// Upper three bits of an opcode select the command, the lower five carry
// its operand.
enum class Command : std::uint8_t {
  MoveLeft = 0,    // operand: motor
  MoveRight = 1,   // operand: motor
  ReadSensor = 2,  // operand: sensor
  Load = 3,        // operand: immediate value
  JumpIfTrue = 4,  // operand: address
  Not = 5,
  Inc = 6,
  Dec = 7,
};

struct Instruction {
  Command command = Command::MoveLeft;
  std::uint8_t operand = 0;  // 0..31
  friend constexpr bool operator==(const Instruction&, const Instruction&) = default;
};

constexpr Instruction decode(std::uint8_t opcode) {
  return {static_cast<Command>(opcode >> 5), static_cast<std::uint8_t>(opcode & 0x1f)};
}

constexpr std::uint8_t encode(const Instruction& ins) {
  return static_cast<std::uint8_t>((static_cast<unsigned>(ins.command) << 5) | (ins.operand & 0x1f));
}

using Program = std::array<std::uint8_t, kProgramSize>;

struct VmState {
  std::int32_t accumulator = 0;
  std::uint8_t programCounter = 0;  // always < kProgramSize
  int stepsExecutedThisTick = 0;
};

struct VmConfig {
  int instructionBudget = 64;
  double motorStep = 0.1;  // radians per executed move instruction
};

/// Sensor value as seen by the program: contact sensors read 0/1, rays read
/// their distance in decimeters rounded and clamped to 0..31 (a miss reads
/// 31), unknown sensors read 0.
inline std::int32_t sensorValue(const SensorFrame& sensors, std::size_t id) {
  if (id < sensors.footContacts.size()) return sensors.footContacts[id] ? 1 : 0;
  id -= sensors.footContacts.size();
  if (id < sensors.rayDistances.size()) {
    const double d = sensors.rayDistances[id];
    if (d == kNoHit || !std::isfinite(d)) return 31;
    const long dm = std::lround(d * 10.0);
    return static_cast<std::int32_t>(std::clamp<long>(dm, 0, 31));
  }
  return 0;
}

/// Runs the program from the saved program counter until the instruction
/// budget is used up or execution runs past the last instruction. Total on
/// every program.
inline void execTick(const Program& prog, VmState& vm, const SensorFrame& sensors,
                     std::span<double> jointTargets, const VmConfig& config = {}) {
  if (vm.programCounter >= kProgramSize) vm.programCounter = 0;
  vm.stepsExecutedThisTick = 0;
  while (vm.stepsExecutedThisTick < config.instructionBudget) {
    const Instruction ins = decode(prog[vm.programCounter]);
    ++vm.stepsExecutedThisTick;
    std::uint8_t next = static_cast<std::uint8_t>(vm.programCounter + 1);
    const auto acc = static_cast<std::uint32_t>(vm.accumulator);
    switch (ins.command) {
      case Command::MoveLeft:
        if (ins.operand < jointTargets.size()) jointTargets[ins.operand] -= config.motorStep;
        break;
      case Command::MoveRight:
        if (ins.operand < jointTargets.size()) jointTargets[ins.operand] += config.motorStep;
        break;
      case Command::ReadSensor:
        vm.accumulator = sensorValue(sensors, ins.operand);
        break;
      case Command::Load:
        vm.accumulator = ins.operand;
        break;
      case Command::JumpIfTrue:
        if (vm.accumulator != 0) next = ins.operand;
        break;
      case Command::Not:
        vm.accumulator = static_cast<std::int32_t>(~acc);
        break;
      case Command::Inc:
        vm.accumulator = static_cast<std::int32_t>(acc + 1u);
        break;
      case Command::Dec:
        vm.accumulator = static_cast<std::int32_t>(acc - 1u);
        break;
    }
    vm.programCounter = next;
    if (vm.programCounter >= kProgramSize) {
      // Resume from the top on the next tick.
      vm.programCounter = 0;
      break;
    }
  }
}

// Bytes are drawn from the top bits of a mt19937_64 and probabilities from
// 53-bit fractions so that programs are identical across standard libraries.
inline std::uint8_t randomByte(std::mt19937_64& rng) { return static_cast<std::uint8_t>(rng() >> 56); }
inline double randomUnit(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline Program randomProgram(std::mt19937_64& rng) {
  Program p{};
  for (auto& b : p) b = randomByte(rng);
  return p;
}

inline constexpr double kDefaultMutationRate = 2.0 / 32.0;

/// Each byte is independently replaced by a uniform random byte with
/// probability `rate`.
inline Program mutate(const Program& parent, std::mt19937_64& rng,
                      double rate = kDefaultMutationRate) {
  Program child = parent;
  for (auto& b : child) {
    const bool hit = randomUnit(rng) < rate;
    const std::uint8_t fresh = randomByte(rng);
    if (hit) b = fresh;
  }
  return child;
}

/// Binds a program to a robot: every move() call executes one tick.
class VmController final : public Controller {
 public:
  explicit VmController(const Program& program, VmConfig config = {})
      : program_(program), config_(config) {}

  void move(const SensorFrame& sensors, std::span<double> jointTargets) override {
    execTick(program_, state_, sensors, jointTargets, config_);
  }

  const VmState& vmState() const { return state_; }
  const Program& program() const { return program_; }

 private:
  Program program_;
  VmConfig config_;
  VmState state_;
};

}  // namespace pcsim::vm
