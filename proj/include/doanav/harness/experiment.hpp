#pragma once

#include <cstdint>
#include <filesystem>
#include <json.hpp>
#include <stdexcept>
#include <string>
#include <vector>

#include "doanav/model/config.hpp"
#include "doanav/sim/types.hpp"
#include "doanav/train/trainer.hpp"

namespace doanav::harness {

/// Bad or missing configuration input; maps to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct EvalSettings {
  int n_episodes = 100;
  std::vector<std::uint64_t> seeds{1, 2, 3};
  /// Explicit held-out world seeds; when empty, held_out_worlds seeds are
  /// derived from world_seed_root so every training seed sees the same test set.
  std::vector<std::uint64_t> held_out_world_seeds;
  int held_out_worlds = 16;
  std::uint64_t world_seed_root = 9001;
  bool greedy = false;

  std::vector<std::uint64_t> world_seeds() const;
};

struct ExperimentConfig {
  std::string preset = "desk";
  sim::WorldConfig world;
  model::ModelConfig model;
  train::TrainConfig train;
  EvalSettings eval;
  std::string output_dir = "runs/default";

  void validate() const;
  /// output_dir, placed under $DOANAV_OUTPUT_ROOT when that is set and output_dir is relative.
  std::filesystem::path output_path() const;
};

inline constexpr const char* kOutputRootEnv = "DOANAV_OUTPUT_ROOT";

/// "paper" or "desk". Throws ConfigError for other names.
ExperimentConfig preset(const std::string& name);

/// Preset named by "preset" (default desk) with the document's sections
/// layered on top. Throws ConfigError on unknown keys or invalid values.
ExperimentConfig experiment_from_json(const nlohmann::json& j);
nlohmann::json experiment_to_json(const ExperimentConfig& c);
ExperimentConfig load_experiment(const std::filesystem::path& path);

std::vector<sim::World> held_out_worlds(const ExperimentConfig& c);

}  // namespace doanav::harness
