#pragma once

#include <filesystem>
#include <json.hpp>
#include <stdexcept>

#include "doanav/model/params.hpp"

namespace doanav::model {

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Checkpoint document:
///   {"format": "doanav-checkpoint", "version": 1, "model_config": {...},
///    "params": [{"name": str, "shape": [rows, cols], "data": [flat row-major]}, ...]}
nlohmann::json checkpoint_to_json(const ModelParams& params);
ModelParams checkpoint_from_json(const nlohmann::json& j);

void save_checkpoint(const ModelParams& params, const std::filesystem::path& path);
ModelParams load_checkpoint(const std::filesystem::path& path);

/// Throws CheckpointError when the checkpoint's shapes disagree with expected.
void ensure_compatible(const ModelParams& loaded, const ModelConfig& expected);

}  // namespace doanav::model
