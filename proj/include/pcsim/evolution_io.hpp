#pragma once

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "pcsim/error.hpp"
#include "pcsim/evolution.hpp"
#include "pcsim/vm_asm.hpp"

namespace pcsim {

inline std::string hexDouble(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%a", v);
  return buf;
}

inline double parseHexDouble(const std::string& s) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size())
    throw SimError(ErrorCode::CorruptCheckpoint, "bad number '" + s + "'");
  return v;
}

inline std::string formatDouble(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// Learning curve as CSV: header `generation,best,mean,median`, values %.17g.
inline std::string formatCurveCsv(const std::vector<GenerationStats>& curve) {
  std::string out = "generation,best,mean,median\n";
  for (const auto& g : curve)
    out += std::to_string(g.generation) + "," + formatDouble(g.best) + "," + formatDouble(g.mean) +
           "," + formatDouble(g.median) + "\n";
  return out;
}

inline std::uint64_t fnv1a(const vm::Program& p) {
  std::uint64_t h = 1469598103934665603ULL;
  for (auto b : p) {
    h ^= b;
    h *= 1099511628211ULL;
  }
  return h;
}

// Checkpoint directory layout:
//   manifest.json       generation, rng state, per-individual fitness and hash, curve
//   genome_NNN.bin      32-byte raw programs, population order
// Doubles are stored as C99 hex-float strings so they round-trip exactly.
inline void writeCheckpoint(const std::filesystem::path& dir, const EvolutionCheckpoint& cp) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  nlohmann::json manifest;
  manifest["format"] = "pcsim-checkpoint-1";
  manifest["generation"] = cp.generation;
  manifest["population_size"] = cp.population.size();
  std::ostringstream rng;
  rng << cp.rng;
  manifest["rng_state"] = rng.str();
  auto& inds = manifest["individuals"] = nlohmann::json::array();
  char name[32];
  for (std::size_t i = 0; i < cp.population.size(); ++i) {
    std::snprintf(name, sizeof name, "genome_%03zu.bin", i);
    vm::writeProgramFile((dir / name).string(), cp.population[i].genome);
    nlohmann::json entry;
    entry["file"] = name;
    entry["fnv1a"] = std::to_string(fnv1a(cp.population[i].genome));
    if (cp.population[i].fitness) {
      entry["fitness"] = hexDouble(*cp.population[i].fitness);
      entry["fitness_decimal"] = *cp.population[i].fitness;
    } else {
      entry["fitness"] = nullptr;
    }
    inds.push_back(entry);
  }
  auto& curve = manifest["curve"] = nlohmann::json::array();
  for (const auto& g : cp.curve)
    curve.push_back({g.generation, hexDouble(g.best), hexDouble(g.mean), hexDouble(g.median)});
  const fs::path tmp = dir / "manifest.json.tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    if (!out) throw SimError(ErrorCode::IoError, "cannot write " + tmp.string());
    out << manifest.dump(2) << '\n';
  }
  fs::rename(tmp, dir / "manifest.json");
}

inline EvolutionCheckpoint readCheckpoint(const std::filesystem::path& dir) {
  const auto manifestPath = dir / "manifest.json";
  auto corrupt = [&](const std::string& why) {
    return SimError(ErrorCode::CorruptCheckpoint, manifestPath.string() + ": " + why);
  };
  std::ifstream in(manifestPath);
  if (!in) throw corrupt("missing manifest");
  nlohmann::json m;
  try {
    in >> m;
  } catch (const std::exception& e) {
    throw corrupt(std::string("unparseable JSON: ") + e.what());
  }
  try {
    if (m.at("format") != "pcsim-checkpoint-1") throw corrupt("unknown format tag");
    EvolutionCheckpoint cp;
    cp.generation = m.at("generation").get<int>();
    if (cp.generation < 0) throw corrupt("negative generation");
    std::istringstream rng(m.at("rng_state").get<std::string>());
    rng >> cp.rng;
    if (!rng) throw corrupt("unreadable rng state");
    const auto& inds = m.at("individuals");
    if (inds.size() != m.at("population_size").get<std::size_t>())
      throw corrupt("population_size does not match individual count");
    for (const auto& entry : inds) {
      Individual ind;
      const auto file = entry.at("file").get<std::string>();
      try {
        ind.genome = vm::readProgramFile((dir / file).string());
      } catch (const SimError& e) {
        throw corrupt(e.what());
      }
      if (std::to_string(fnv1a(ind.genome)) != entry.at("fnv1a").get<std::string>())
        throw corrupt(file + " does not match its recorded hash");
      if (!entry.at("fitness").is_null())
        ind.fitness = parseHexDouble(entry.at("fitness").get<std::string>());
      else
        throw corrupt(file + " has no fitness; checkpoints hold evaluated populations");
      cp.population.push_back(ind);
    }
    for (const auto& row : m.at("curve")) {
      GenerationStats g;
      g.generation = row.at(0).get<int>();
      g.best = parseHexDouble(row.at(1).get<std::string>());
      g.mean = parseHexDouble(row.at(2).get<std::string>());
      g.median = parseHexDouble(row.at(3).get<std::string>());
      cp.curve.push_back(g);
    }
    if (cp.curve.size() != static_cast<std::size_t>(cp.generation) + 1)
      throw corrupt("learning curve length does not match generation");
    return cp;
  } catch (const nlohmann::json::exception& e) {
    throw corrupt(std::string("malformed manifest: ") + e.what());
  }
}

}  // namespace pcsim
