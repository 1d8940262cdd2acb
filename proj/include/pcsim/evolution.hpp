#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <functional>
#include <mutex>
#include <numeric>
#include <optional>
#include <random>
#include <thread>
#include <vector>

#include "pcsim/dynamics.hpp"
#include "pcsim/error.hpp"
#include "pcsim/model.hpp"
#include "pcsim/terrain.hpp"
#include "pcsim/vm.hpp"

namespace pcsim {

struct Individual {
  vm::Program genome{};
  std::optional<double> fitness;  // walked distance in meters once evaluated
};

struct EvolutionConfig {
  int populationSize = 100;
  int survivors = 50;
  double evalSeconds = 120.0;
  int generations = 100;  // including the random generation 0
  std::uint64_t seed = 1;
  int parallelism = 1;
  double mutationRate = vm::kDefaultMutationRate;
  double settleSeconds = 0.5;
  bool reevaluateSurvivors = false;
  double spawnX = 0.0;
  double spawnZ = 0.0;
  SimConfig sim;
  vm::VmConfig vm;

  void validate() const {
    if (populationSize < 1 || survivors < 1 || survivors > populationSize)
      throw SimError(ErrorCode::InvalidDimension, "need 1 <= survivors <= populationSize");
    if (!(evalSeconds > 0)) throw SimError(ErrorCode::InvalidDimension, "evalSeconds must be > 0");
    if (generations < 1) throw SimError(ErrorCode::InvalidDimension, "generations must be >= 1");
    if (!(mutationRate >= 0 && mutationRate <= 1))
      throw SimError(ErrorCode::InvalidDimension, "mutation rate must lie in [0, 1]");
    if (parallelism < 1) throw SimError(ErrorCode::InvalidDimension, "parallelism must be >= 1");
  }
};

struct GenerationStats {
  int generation = 0;
  double best = 0.0;
  double mean = 0.0;
  double median = 0.0;
};

/// Runs genomes on one robot and terrain from a shared, pre-settled spawn pose.
class Evaluator {
 public:
  Evaluator(const RobotModel& model, const HeightField& terrain, const EvolutionConfig& config)
      : model_(&model),
        terrain_(&terrain),
        config_(config),
        spawn_(settledPose(model, terrain, config.sim, config.spawnX, config.spawnZ,
                           config.settleSeconds)) {}

  const PoseState& spawn() const { return spawn_; }

  /// Simulates `seconds` (default: evalSeconds) of the genome's behaviour.
  RunSummary run(const vm::Program& genome, double seconds = 0.0,
                 const std::function<void(const Simulation&)>& observer = {}) const {
    Simulation sim(*model_, *terrain_, config_.sim);
    sim.setState(spawn_);
    vm::VmController controller(genome, config_.vm);
    return sim.runFor(controller, seconds > 0 ? seconds : config_.evalSeconds, 0, observer);
  }

  /// Fitness: planar walked distance of the CoG; numerical failure scores 0.
  double evaluate(const vm::Program& genome) const {
    try {
      const double d = run(genome).walkedDistance;
      return std::isfinite(d) ? d : 0.0;
    } catch (const SimError& e) {
      if (e.code() == ErrorCode::NumericalBlowup) return 0.0;
      throw;
    }
  }

 private:
  const RobotModel* model_;
  const HeightField* terrain_;
  EvolutionConfig config_;
  PoseState spawn_;
};

/// Evaluates every individual without a fitness (all of them when `all`).
/// Results do not depend on `parallelism`.
inline void evaluatePopulation(std::vector<Individual>& population, const Evaluator& evaluator,
                               int parallelism, bool all = false) {
  std::vector<std::size_t> todo;
  for (std::size_t i = 0; i < population.size(); ++i)
    if (all || !population[i].fitness) todo.push_back(i);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failureLock;
  auto worker = [&] {
    for (;;) {
      const std::size_t k = next.fetch_add(1);
      if (k >= todo.size()) return;
      try {
        population[todo[k]].fitness = evaluator.evaluate(population[todo[k]].genome);
      } catch (...) {
        std::lock_guard lock(failureLock);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  const int threads = std::max(1, std::min<int>(parallelism, static_cast<int>(todo.size())));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);
}

/// Indices sorted by fitness, best first; ties keep the lower index first.
inline std::vector<std::size_t> rankByFitness(const std::vector<Individual>& population) {
  std::vector<std::size_t> order(population.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return population[a].fitness.value_or(0.0) > population[b].fitness.value_or(0.0);
  });
  return order;
}

/// Keeps the best `survivors` unchanged and fills the remaining slots with
/// mutated copies of them, parents taken round-robin from the best down.
inline std::vector<Individual> stepGeneration(const std::vector<Individual>& population,
                                              const EvolutionConfig& config,
                                              std::mt19937_64& rng) {
  for (const auto& ind : population)
    if (!ind.fitness)
      throw SimError(ErrorCode::InvalidDimension, "stepGeneration needs an evaluated population");
  const auto order = rankByFitness(population);
  const std::size_t keep = std::min<std::size_t>(config.survivors, population.size());
  std::vector<Individual> next;
  next.reserve(config.populationSize);
  for (std::size_t k = 0; k < keep; ++k) next.push_back(population[order[k]]);
  for (std::size_t k = 0; next.size() < static_cast<std::size_t>(config.populationSize); ++k) {
    const Individual& parent = population[order[k % keep]];
    next.push_back({vm::mutate(parent.genome, rng, config.mutationRate), std::nullopt});
  }
  return next;
}

inline GenerationStats generationStats(int generation, const std::vector<Individual>& population) {
  std::vector<double> f;
  f.reserve(population.size());
  for (const auto& ind : population) f.push_back(ind.fitness.value_or(0.0));
  std::sort(f.begin(), f.end());
  GenerationStats s;
  s.generation = generation;
  if (f.empty()) return s;
  s.best = f.back();
  double sum = 0.0;
  for (double v : f) sum += v;
  s.mean = sum / static_cast<double>(f.size());
  const std::size_t n = f.size();
  s.median = n % 2 ? f[n / 2] : 0.5 * (f[n / 2 - 1] + f[n / 2]);
  return s;
}

/// Everything needed to continue a run bit-exactly after `generation`'s
/// population has been evaluated.
struct EvolutionCheckpoint {
  int generation = 0;
  std::vector<Individual> population;
  std::vector<GenerationStats> curve;
  std::mt19937_64 rng;
};

struct EvolutionResult {
  std::vector<GenerationStats> curve;
  Individual best;
  std::vector<Individual> population;
  bool interrupted = false;
};

struct EvolutionHooks {
  const std::atomic<bool>* stop = nullptr;
  int checkpointEvery = 0;
  std::function<void(const EvolutionCheckpoint&)> onCheckpoint;
  std::function<void(const GenerationStats&)> onGeneration;
};

inline EvolutionResult runEvolution(const EvolutionConfig& config, const RobotModel& model,
                                    const HeightField& terrain, const EvolutionHooks& hooks = {},
                                    std::optional<EvolutionCheckpoint> resume = std::nullopt) {
  config.validate();
  const Evaluator evaluator(model, terrain, config);
  EvolutionCheckpoint cp;
  if (resume) {
    cp = std::move(*resume);
    if (cp.population.size() != static_cast<std::size_t>(config.populationSize))
      throw SimError(ErrorCode::CorruptCheckpoint, "checkpoint population size differs from config");
  } else {
    cp.rng.seed(config.seed);
    cp.population.resize(config.populationSize);
    for (auto& ind : cp.population) ind.genome = vm::randomProgram(cp.rng);
    evaluatePopulation(cp.population, evaluator, config.parallelism);
    cp.curve.push_back(generationStats(0, cp.population));
    if (hooks.onGeneration) hooks.onGeneration(cp.curve.back());
    if (hooks.checkpointEvery > 0 && hooks.onCheckpoint) hooks.onCheckpoint(cp);
  }

  EvolutionResult result;
  while (cp.generation + 1 < config.generations) {
    if (hooks.stop && hooks.stop->load()) {
      result.interrupted = true;
      if (hooks.onCheckpoint) hooks.onCheckpoint(cp);
      break;
    }
    cp.population = stepGeneration(cp.population, config, cp.rng);
    evaluatePopulation(cp.population, evaluator, config.parallelism, config.reevaluateSurvivors);
    ++cp.generation;
    cp.curve.push_back(generationStats(cp.generation, cp.population));
    if (hooks.onGeneration) hooks.onGeneration(cp.curve.back());
    const bool last = cp.generation + 1 >= config.generations;
    if (hooks.onCheckpoint && hooks.checkpointEvery > 0 &&
        (cp.generation % hooks.checkpointEvery == 0 || last))
      hooks.onCheckpoint(cp);
  }
  result.curve = cp.curve;
  result.population = cp.population;
  result.best = cp.population[rankByFitness(cp.population).front()];
  return result;
}

}  // namespace pcsim
