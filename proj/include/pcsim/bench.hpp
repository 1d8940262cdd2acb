#pragma once

#include <algorithm>
#include <chrono>
#include <cstdint>

#include "pcsim/dynamics.hpp"
#include "pcsim/model.hpp"
#include "pcsim/terrain.hpp"

namespace pcsim {

struct BenchReport {
  std::int64_t steps = 0;
  double wallSeconds = 0.0;
  double stepsPerSecond = 0.0;
  double realtimeMultiple = 0.0;  // simulated seconds per wall-clock second
  StepProfile profile;            // from a separate instrumented pass
  std::size_t points = 0;
  std::size_t joints = 0;
};

inline constexpr std::int64_t kBenchWarmupSteps = 1000;

/// Times `steps` simulateStep calls on the current thread after a discarded
/// warm-up. `makeController` is invoked once per pass so every pass starts
/// from the same controller state.
template <typename ControllerFactory>
BenchReport runBench(const RobotModel& model, const HeightField& terrain, std::int64_t steps,
                     const SimConfig& config, ControllerFactory&& makeController) {
  const PoseState spawn = settledPose(model, terrain, config);
  BenchReport report;
  report.steps = steps;
  report.points = model.pointCount();
  report.joints = model.jointCount();

  {
    Simulation sim(model, terrain, config);
    sim.setState(spawn);
    auto controller = makeController();
    for (std::int64_t k = 0; k < kBenchWarmupSteps; ++k) sim.simulateStep(controller);
    const auto t0 = std::chrono::steady_clock::now();
    for (std::int64_t k = 0; k < steps; ++k) sim.simulateStep(controller);
    report.wallSeconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  }
  report.stepsPerSecond = report.wallSeconds > 0 ? steps / report.wallSeconds : 0.0;
  report.realtimeMultiple = report.stepsPerSecond * config.dt;

  Simulation sim(model, terrain, config);
  sim.setState(spawn);
  auto controller = makeController();
  for (std::int64_t k = 0; k < std::min<std::int64_t>(steps, 100'000); ++k)
    sim.simulateStep(controller, &report.profile);
  return report;
}

}  // namespace pcsim
