#pragma once

#include <json.hpp>

#include "doanav/sim/world.hpp"

namespace doanav::sim {

/// Missing keys keep their defaults; unknown keys are rejected.
void to_json(nlohmann::json& j, const WorldConfig& cfg);
void from_json(const nlohmann::json& j, WorldConfig& cfg);

/// {"format": "doanav-world", "version": 1, "seed", "config", "obstacles": [[0/1 x W] x H],
///  "objects": [{"class_id", "x", "y", "height_band": "low"|"mid"|"high", "size"}]}
nlohmann::json world_to_json(const World& world);
World world_from_json(const nlohmann::json& j);

}  // namespace doanav::sim
