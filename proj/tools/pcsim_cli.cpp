// pcsim command line: bench, evolve, replay, asm/disasm, validate.
#include <atomic>
#include <csignal>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "pcsim/pcsim.hpp"

namespace fs = std::filesystem;
using namespace pcsim;

namespace {

enum Exit { kOk = 0, kUsage = 1, kInput = 2, kNumerical = 3 };

std::atomic<bool> gStop{false};

extern "C" void onSignal(int) { gStop.store(true); }

std::string readText(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SimError(ErrorCode::IoError, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void writeText(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw SimError(ErrorCode::IoError, "cannot write " + path.string());
  out << text;
}

// A program is either a raw 32-byte image or assembly text (*.asm).
vm::Program loadProgram(const std::string& path) {
  if (path == "tripod" || path == "builtin:tripod") return tripodGaitProgram();
  if (fs::path(path).extension() == ".asm") return vm::assemble(readText(path));
  return vm::readProgramFile(path);
}

struct BenchArgs {
  std::string robot = "hexapod";
  std::string terrain = "flat";
  int simplify = 2;
  long long steps = 1'000'000;
  std::string program = "tripod";
  bool idle = false;
};

int runBenchCommand(const BenchArgs& a) {
  const RobotModel model = loadRobot(a.robot, a.simplify);
  const HeightField terrain = loadTerrain(a.terrain);
  SimConfig config;
  BenchReport r;
  if (a.idle) {
    r = runBench(model, terrain, a.steps, config, [] { return NullController{}; });
  } else {
    const vm::Program prog = loadProgram(a.program);
    r = runBench(model, terrain, a.steps, config, [&] { return vm::VmController(prog); });
  }
  const auto& p = r.profile;
  const double total = p.controller + p.kinematics + p.contacts + p.friction + p.sensors;
  std::printf("robot        %zu points, %zu joints\n", r.points, r.joints);
  std::printf("steps        %lld\n", static_cast<long long>(r.steps));
  std::printf("wall         %.3f s\n", r.wallSeconds);
  std::printf("throughput   %.0f steps/s\n", r.stepsPerSecond);
  std::printf("real time    %.0fx\n", r.realtimeMultiple);
  std::printf("phases over %lld profiled steps:\n", static_cast<long long>(p.steps));
  auto phase = [&](const char* name, double s) {
    std::printf("  %-11s %7.1f ns/step %5.1f%%\n", name, p.steps ? 1e9 * s / p.steps : 0.0,
                total > 0 ? 100.0 * s / total : 0.0);
  };
  phase("controller", p.controller);
  phase("kinematics", p.kinematics);
  phase("contacts", p.contacts);
  phase("friction", p.friction);
  phase("sensors", p.sensors);
  return kOk;
}

struct EvolveArgs {
  std::string manifest;
  std::string resume;
  std::string output;
  std::string robot;
  std::string terrain;
  int simplify = 2;
  std::uint64_t seed = 1;
  int population = 0;
  int survivors = 0;
  int generations = 0;
  double evalSeconds = 0;
  double mutationRate = 0;
  int parallelism = 1;
  int checkpointEvery = 10;
};

int runEvolveCommand(const EvolveArgs& a, const CLI::App& cmd) {
  RunManifest m = a.manifest.empty() ? RunManifest{} : loadManifest(a.manifest);
  auto given = [&](const char* name) { return cmd.get_option(name)->count() > 0; };
  if (given("--output")) m.output = a.output;
  if (given("--robot")) m.robot = a.robot;
  if (given("--terrain")) m.terrain = a.terrain;
  if (given("--simplify")) m.simplify = a.simplify;
  if (given("--seed")) m.evolution.seed = a.seed;
  if (given("--population")) m.evolution.populationSize = a.population;
  if (given("--survivors")) m.evolution.survivors = a.survivors;
  if (given("--generations")) m.evolution.generations = a.generations;
  if (given("--eval-seconds")) m.evolution.evalSeconds = a.evalSeconds;
  if (given("--mutation-rate")) m.evolution.mutationRate = a.mutationRate;
  if (given("--parallelism")) m.evolution.parallelism = a.parallelism;
  if (given("--checkpoint-every")) m.checkpointEvery = a.checkpointEvery;
  m.evolution.validate();

  const RobotModel model = loadRobot(m.robot, m.simplify);
  const HeightField terrain = loadTerrain(m.terrain);
  const fs::path out(m.output);
  fs::create_directories(out);
  writeText(out / "manifest.json", manifestToJson(m).dump(2) + "\n");

  std::optional<EvolutionCheckpoint> resume;
  if (!a.resume.empty()) {
    resume = readCheckpoint(a.resume);
    std::fprintf(stderr, "resuming after generation %d\n", resume->generation);
  }

  EvolutionHooks hooks;
  hooks.stop = &gStop;
  hooks.checkpointEvery = m.checkpointEvery;
  hooks.onCheckpoint = [&](const EvolutionCheckpoint& cp) {
    writeCheckpoint(out / "checkpoint", cp);
    writeText(out / "curve.csv", formatCurveCsv(cp.curve));
  };
  hooks.onGeneration = [](const GenerationStats& g) {
    std::fprintf(stderr, "gen %4d best %.4f mean %.4f median %.4f\n", g.generation, g.best, g.mean,
                 g.median);
  };
  std::signal(SIGINT, onSignal);
  std::signal(SIGTERM, onSignal);

  const EvolutionResult result = runEvolution(m.evolution, model, terrain, hooks, resume);
  writeText(out / "curve.csv", formatCurveCsv(result.curve));
  vm::writeProgramFile((out / "best.bin").string(), result.best.genome);
  writeText(out / "best.asm", vm::disassemble(result.best.genome));
  std::printf("best %s\n", formatDouble(result.best.fitness.value_or(0.0)).c_str());
  if (result.interrupted) {
    std::fprintf(stderr, "interrupted; checkpoint in %s\n", (out / "checkpoint").string().c_str());
    return 130;
  }
  return kOk;
}

struct ReplayArgs {
  std::string genome;
  std::string manifest;
  std::string robot = "hexapod";
  std::string terrain = "flat";
  int simplify = 2;
  double seconds = 0;
  std::string trajectory;
  std::string scene;
  int sceneEvery = 10;
};

int runReplayCommand(const ReplayArgs& a, const CLI::App& cmd) {
  RunManifest m = a.manifest.empty() ? RunManifest{} : loadManifest(a.manifest);
  auto given = [&](const char* name) { return cmd.get_option(name)->count() > 0; };
  if (given("--robot")) m.robot = a.robot;
  if (given("--terrain")) m.terrain = a.terrain;
  if (given("--simplify")) m.simplify = a.simplify;
  const RobotModel model = loadRobot(m.robot, m.simplify);
  const HeightField terrain = loadTerrain(m.terrain);
  const vm::Program prog = loadProgram(a.genome);
  const Evaluator evaluator(model, terrain, m.evolution);

  std::ofstream traj, scene;
  std::optional<TrajectoryWriter> writer;
  if (!a.trajectory.empty()) {
    traj.open(a.trajectory, std::ios::trunc);
    if (!traj) throw SimError(ErrorCode::IoError, "cannot write " + a.trajectory);
    writer.emplace(traj);
  }
  if (!a.scene.empty()) {
    scene.open(a.scene, std::ios::trunc);
    if (!scene) throw SimError(ErrorCode::IoError, "cannot write " + a.scene);
  }
  bool first = true;
  const RunSummary run = evaluator.run(prog, a.seconds, [&](const Simulation& sim) {
    if (writer) {
      if (first) writer->header(sim);
      writer->record(sim);
    }
    if (scene.is_open() && (first || sim.state().stepCounter % a.sceneEvery == 0))
      writeSceneFrame(scene, sim);
    first = false;
  });
  std::printf("steps %lld\n", static_cast<long long>(run.steps));
  std::printf("distance %s\n", formatDouble(run.walkedDistance).c_str());
  return kOk;
}

int runValidateCommand(const std::string& robot, int simplify, const std::string& terrainPath,
                       const std::string& program) {
  const RobotModel model = loadRobot(robot, simplify);
  std::printf("robot: %zu points, %zu segments, %zu joints, %zu sensors, mass %.6g kg\n",
              model.pointCount(), model.segmentCount(), model.jointCount(), model.sensorCount(),
              model.totalMass());
  const HeightField terrain = loadTerrain(terrainPath);
  std::printf("terrain: %d x %d cells, scale %.6g\n", terrain.rows(), terrain.cols(),
              terrain.scale());
  if (!program.empty()) {
    loadProgram(program);
    std::printf("program: ok\n");
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"point-cloud robot simulator and controller evolution"};
  app.require_subcommand(1);

  BenchArgs bench;
  auto* cBench = app.add_subcommand("bench", "measure single-thread simulation throughput");
  cBench->add_option("--robot", bench.robot, "robot script path or 'hexapod'");
  cBench->add_option("--terrain", bench.terrain, "height map path or 'flat'");
  cBench->add_option("--simplify", bench.simplify, "simplify mode for the built-in hexapod");
  cBench->add_option("--steps", bench.steps, "timed steps")->check(CLI::PositiveNumber);
  cBench->add_option("--program", bench.program, "controller program (.bin, .asm or 'tripod')");
  cBench->add_flag("--idle", bench.idle, "hold all joints at rest instead of running a program");

  EvolveArgs evolve;
  auto* cEvolve = app.add_subcommand("evolve", "evolve controller programs");
  cEvolve->add_option("--manifest", evolve.manifest, "JSON run manifest")->check(CLI::ExistingFile);
  cEvolve->add_option("--resume", evolve.resume, "checkpoint directory to continue from")
      ->check(CLI::ExistingDirectory);
  cEvolve->add_option("--output,-o", evolve.output, "output directory");
  cEvolve->add_option("--robot", evolve.robot);
  cEvolve->add_option("--terrain", evolve.terrain);
  cEvolve->add_option("--simplify", evolve.simplify);
  cEvolve->add_option("--seed", evolve.seed);
  cEvolve->add_option("--population", evolve.population);
  cEvolve->add_option("--survivors", evolve.survivors);
  cEvolve->add_option("--generations", evolve.generations);
  cEvolve->add_option("--eval-seconds", evolve.evalSeconds);
  cEvolve->add_option("--mutation-rate", evolve.mutationRate);
  cEvolve->add_option("--parallelism,-j", evolve.parallelism);
  cEvolve->add_option("--checkpoint-every", evolve.checkpointEvery, "generations between checkpoints");

  ReplayArgs replay;
  auto* cReplay = app.add_subcommand("replay", "re-run one program and report its fitness");
  cReplay->add_option("genome", replay.genome, "program (.bin, .asm or 'tripod')")->required();
  cReplay->add_option("--manifest", replay.manifest, "run manifest to take settings from")
      ->check(CLI::ExistingFile);
  cReplay->add_option("--robot", replay.robot);
  cReplay->add_option("--terrain", replay.terrain);
  cReplay->add_option("--simplify", replay.simplify);
  cReplay->add_option("--seconds", replay.seconds, "simulated time (default: evaluation length)");
  cReplay->add_option("--trajectory", replay.trajectory, "write per-step trajectory here");
  cReplay->add_option("--dump-scene", replay.scene, "write point positions here");
  cReplay->add_option("--scene-every", replay.sceneEvery, "steps between scene frames")
      ->check(CLI::PositiveNumber);

  std::string disasmIn;
  auto* cDisasm = app.add_subcommand("disasm", "print a 32-byte program as assembly");
  cDisasm->add_option("program", disasmIn)->required();

  std::string asmIn, asmOut;
  auto* cAsm = app.add_subcommand("asm", "assemble a program into its 32-byte image");
  cAsm->add_option("source", asmIn)->required()->check(CLI::ExistingFile);
  cAsm->add_option("-o,--output", asmOut)->required();

  std::string vRobot = "hexapod", vTerrain = "flat", vProgram;
  int vSimplify = 2;
  auto* cValidate = app.add_subcommand("validate", "load and check input files");
  cValidate->add_option("--robot", vRobot);
  cValidate->add_option("--simplify", vSimplify);
  cValidate->add_option("--terrain", vTerrain);
  cValidate->add_option("--program", vProgram);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  try {
    if (*cBench) return runBenchCommand(bench);
    if (*cEvolve) return runEvolveCommand(evolve, *cEvolve);
    if (*cReplay) return runReplayCommand(replay, *cReplay);
    if (*cDisasm) {
      std::fputs(vm::disassemble(loadProgram(disasmIn)).c_str(), stdout);
      return kOk;
    }
    if (*cAsm) {
      vm::writeProgramFile(asmOut, vm::assemble(readText(asmIn)));
      return kOk;
    }
    if (*cValidate) return runValidateCommand(vRobot, vSimplify, vTerrain, vProgram);
  } catch (const SimError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    if (e.code() == ErrorCode::NumericalBlowup) return kNumerical;
    if (e.code() == ErrorCode::InvalidDimension) return kUsage;
    return kInput;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kInput;
  }
  return kUsage;
}
