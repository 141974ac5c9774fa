#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "doanav/ad/tensor.hpp"
#include "doanav/sim/types.hpp"

namespace doanav::sim {

/// Per-class appearance shared across all worlds built from one config.
struct ClassCatalog {
  ad::Tensor visual_signature;  // N x d_vis
  ad::Tensor image_signature;   // N x d_img
  std::vector<HeightBand> height_band;

  static ClassCatalog build(const WorldConfig& cfg);
};

struct World {
  WorldConfig cfg;  // resolved
  std::uint64_t seed = 0;
  std::vector<std::uint8_t> obstacles;  // grid_h rows of grid_w cells
  std::vector<ObjectInstance> objects;
  ClassCatalog catalog;

  bool in_bounds(int x, int y) const { return x >= 0 && y >= 0 && x < cfg.grid_w && y < cfg.grid_h; }
  bool is_obstacle(int x, int y) const { return obstacles[y * cfg.grid_w + x] != 0; }
  bool has_object(int x, int y) const;
  /// Walls, obstacles and object cells all block movement.
  bool blocked(int x, int y) const;
  std::vector<int> classes_present() const;
  bool class_present(int class_id) const;
  std::vector<std::pair<int, int>> free_cells() const;
};

/// Deterministic in (seed, cfg). Throws GenerationError on infeasible configs.
World generate_world(std::uint64_t seed, const WorldConfig& cfg);

/// World from explicit layout, for hand-built fixtures.
World make_world(const WorldConfig& cfg, std::vector<std::uint8_t> obstacles,
                 std::vector<ObjectInstance> objects, std::uint64_t seed = 0);

/// Geometric visibility of one instance from a pose (range, FOV, height band).
struct Sighting {
  bool visible = false;
  double distance = 0.0;
  double bearing_deg = 0.0;  // signed, positive toward yaw + 90
};
Sighting sight(const World& world, const AgentState& state, const ObjectInstance& obj);

/// True iff some instance of target_class is visible within success_dist.
bool success_predicate(const World& world, const AgentState& state, int target_class);

/// Euclidean distance to the nearest instance of target_class (infinity if absent).
double distance_to_class(const World& world, const AgentState& state, int target_class);
bool class_visible(const World& world, const AgentState& state, int target_class);

}  // namespace doanav::sim
