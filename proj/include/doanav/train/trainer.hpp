#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <json.hpp>
#include <string>
#include <vector>

#include "doanav/model/params.hpp"
#include "doanav/sim/world.hpp"
#include "doanav/train/adam.hpp"

namespace doanav::train {

enum class SyncMode { Synchronous, Asynchronous };

std::string to_string(SyncMode m);
SyncMode sync_mode_from_string(const std::string& s);

struct TrainConfig {
  int workers = 4;
  std::int64_t total_episodes = 20000;
  std::int64_t max_env_steps = 0;  // 0: no step budget
  int rollout_len = 20;
  double gamma = 0.99;
  double beta_entropy = 0.01;
  double value_coef = 0.5;
  AdamConfig adam;
  double grad_clip = 40.0;
  std::uint64_t seed = 1;
  SyncMode sync_mode = SyncMode::Synchronous;
  int train_worlds = 32;
  int val_worlds = 16;
  std::int64_t val_interval = 500;  // episodes between validations
  int val_episodes = 32;
  int sr_window = 100;
  bool record_wall_time = true;

  void validate() const;
};

void to_json(nlohmann::json& j, const TrainConfig& c);
void from_json(const nlohmann::json& j, TrainConfig& c);

struct CurveRow {
  std::int64_t episodes = 0;
  double train_sr_ma = 0.0;
  double val_sr = 0.0;
  double val_spl = 0.0;
  double val_sae = 0.0;
  double loss = 0.0;
  double wall_s = 0.0;
};

void write_curve_csv(const std::filesystem::path& path, const std::vector<CurveRow>& rows);

struct TrainResult {
  model::ModelParams final_params;
  model::ModelParams best_params;
  double best_val_sr = -1.0;
  std::vector<CurveRow> curve;
  std::int64_t episodes = 0;
  std::int64_t env_steps = 0;
};

/// count worlds seeded from a named substream of root.
std::vector<sim::World> make_worlds(const sim::WorldConfig& cfg, std::uint64_t root,
                                    const std::string& stream, int count);

using CurveSink = std::function<void(const CurveRow&)>;

/// Trains a fresh model. The model's shape fields are taken from the world config.
/// Throws std::invalid_argument on bad configs before any work.
TrainResult train(const TrainConfig& cfg, const sim::WorldConfig& world_cfg,
                  const model::ModelConfig& model_cfg, const CurveSink& sink = {});

/// Same, on caller-built world pools (train_worlds/val_worlds counts are ignored).
TrainResult train(const TrainConfig& cfg, const std::vector<sim::World>& train_worlds,
                  const std::vector<sim::World>& val_worlds, const model::ModelConfig& model_cfg,
                  const CurveSink& sink = {});

}  // namespace doanav::train
