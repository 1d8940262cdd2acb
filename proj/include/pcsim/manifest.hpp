#pragma once

#include <cstdint>
#include <fstream>
#include <optional>
#include <string>

#include "json.hpp"
#include "pcsim/error.hpp"
#include "pcsim/evolution.hpp"
#include "pcsim/hexapod.hpp"
#include "pcsim/robot_script.hpp"
#include "pcsim/terrain_io.hpp"

namespace pcsim {

/// Everything that determines an evolution run. Unset fields fall back to
/// EvolutionConfig / SimConfig / VmConfig defaults.
struct RunManifest {
  std::string robot = "hexapod";  // "hexapod" or a robot script path
  int simplify = 2;               // simplify mode of the built-in hexapod
  std::string terrain = "flat";   // "flat" or a height map path
  std::string output = "run";
  EvolutionConfig evolution;
  int checkpointEvery = 10;
};

inline RobotModel loadRobot(const std::string& spec, int simplify = 2) {
  if (spec == "hexapod" || spec == "builtin:hexapod") {
    HexapodOptions o;
    o.simplifyMode = simplify;
    return buildHexapod(o);
  }
  return loadRobotScript(spec);
}

/// "flat" is a 40 m x 40 m level field at scale 10 centered on the origin.
inline HeightField loadTerrain(const std::string& spec) {
  if (spec == "flat" || spec == "builtin:flat") return HeightField::flatCentered(40.0);
  return loadHeightField(spec);
}

inline nlohmann::json manifestToJson(const RunManifest& m) {
  const auto& e = m.evolution;
  nlohmann::json j;
  j["robot"] = m.robot;
  j["simplify"] = m.simplify;
  j["terrain"] = m.terrain;
  j["output"] = m.output;
  j["seed"] = e.seed;
  j["population"] = e.populationSize;
  j["survivors"] = e.survivors;
  j["generations"] = e.generations;
  j["eval_seconds"] = e.evalSeconds;
  j["settle_seconds"] = e.settleSeconds;
  j["mutation_rate"] = e.mutationRate;
  j["parallelism"] = e.parallelism;
  j["reevaluate_survivors"] = e.reevaluateSurvivors;
  j["checkpoint_every"] = m.checkpointEvery;
  j["dt"] = e.sim.dt;
  j["joint_update_period"] = e.sim.jointUpdatePeriod;
  j["max_joint_speed"] = e.sim.maxJointSpeed;
  j["tipping"] = e.sim.tipping;
  j["instruction_budget"] = e.vm.instructionBudget;
  j["motor_step"] = e.vm.motorStep;
  return j;
}

inline RunManifest manifestFromJson(const nlohmann::json& j, RunManifest m = {}) {
  auto& e = m.evolution;
  auto take = [&](const char* key, auto& field) {
    if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
  };
  try {
    if (!j.is_object()) throw SimError(ErrorCode::ParseError, "manifest must be a JSON object");
    static const char* known[] = {"robot", "simplify", "terrain", "output", "seed", "population",
                                  "survivors", "generations", "eval_seconds", "settle_seconds",
                                  "mutation_rate", "parallelism", "reevaluate_survivors",
                                  "checkpoint_every", "dt", "joint_update_period",
                                  "max_joint_speed", "tipping", "instruction_budget",
                                  "motor_step"};
    for (const auto& [key, value] : j.items()) {
      bool ok = false;
      for (const char* k : known) ok = ok || key == k;
      if (!ok) throw SimError(ErrorCode::ParseError, "unknown manifest key '" + key + "'");
    }
    take("robot", m.robot);
    take("simplify", m.simplify);
    take("terrain", m.terrain);
    take("output", m.output);
    take("seed", e.seed);
    take("population", e.populationSize);
    take("survivors", e.survivors);
    take("generations", e.generations);
    take("eval_seconds", e.evalSeconds);
    take("settle_seconds", e.settleSeconds);
    take("mutation_rate", e.mutationRate);
    take("parallelism", e.parallelism);
    take("reevaluate_survivors", e.reevaluateSurvivors);
    take("checkpoint_every", m.checkpointEvery);
    take("dt", e.sim.dt);
    take("joint_update_period", e.sim.jointUpdatePeriod);
    take("max_joint_speed", e.sim.maxJointSpeed);
    take("tipping", e.sim.tipping);
    take("instruction_budget", e.vm.instructionBudget);
    take("motor_step", e.vm.motorStep);
  } catch (const nlohmann::json::exception& ex) {
    throw SimError(ErrorCode::ParseError, std::string("manifest: ") + ex.what());
  }
  return m;
}

inline RunManifest loadManifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SimError(ErrorCode::IoError, "cannot open " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& ex) {
    throw SimError(ErrorCode::ParseError, path + ": " + ex.what());
  }
  return manifestFromJson(j);
}

}  // namespace pcsim
