#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "doanav/ad/tensor.hpp"

namespace doanav::sim {

enum class Action : int { MoveAhead = 0, RotateLeft, RotateRight, LookDown, LookUp, Done };
inline constexpr int kNumActions = 6;

std::string to_string(Action a);
Action action_from_index(int index);

enum class Pitch : int { Down = 0, Level = 1, Up = 2 };
enum class HeightBand : int { Low = 0, Mid = 1, High = 2 };

/// Raised when a WorldConfig cannot produce a world (e.g. more objects than cells).
class GenerationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when an episode is requested for a target the world does not contain.
class EpisodeSpecError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct WorldConfig {
  int grid_w = 10;
  int grid_h = 10;
  int num_classes = 22;
  /// Per-class detectability prior in [0.3, 1]; empty means a linear spread.
  std::vector<double> class_base_size;
  /// Symmetric co-location prior; empty means interleaved block groups.
  std::vector<std::vector<double>> class_affinity;
  /// Per-class height band; empty means class q gets band q % 3.
  std::vector<HeightBand> class_height_band;
  double view_range = 5.0;
  double fov_deg = 90.0;
  double success_dist = 2.0;
  int max_steps = 100;
  double conf_noise_sigma = 0.05;
  double visual_noise_sigma = 0.5;
  double image_noise_sigma = 0.05;
  int d_img = 32;
  int d_vis = 32;
  /// Image feature grid is image_grid x image_grid cells (M = image_grid^2).
  int image_grid = 4;
  bool ground_truth_detections = false;
  int objects_per_world = 12;
  int min_classes_present = 4;
  double obstacle_density = 0.1;
  /// Seeds the class signatures, which are shared by every world.
  std::uint64_t catalog_seed = 1234;
  double reward_success = 5.0;
  double reward_step = -0.01;

  int image_cells() const { return image_grid * image_grid; }
  /// Columns of a detection row: visual | bbox(4) | conf | target.
  int detection_width() const { return d_vis + 6; }

  /// Fills empty priors with defaults and checks every field.
  WorldConfig resolved() const;
  void validate() const;
};

std::vector<double> default_base_sizes(int num_classes);
/// Classes c and c' are related iff c % groups == c' % groups.
std::vector<std::vector<double>> default_affinity(int num_classes);
std::vector<HeightBand> default_height_bands(int num_classes);

struct AgentState {
  int x = 0;
  int y = 0;
  int yaw = 0;  // degrees, one of 0, 90, 180, 270; 0 faces +x, 90 faces +y
  Pitch pitch = Pitch::Level;

  friend bool operator==(const AgentState&, const AgentState&) = default;
};

struct ObjectInstance {
  int class_id = 0;
  int x = 0;
  int y = 0;
  HeightBand height_band = HeightBand::Mid;
  double size = 1.0;

  friend bool operator==(const ObjectInstance&, const ObjectInstance&) = default;
};

/// One detector row; absent classes are all zero.
struct Detection {
  int class_id = 0;
  std::vector<double> visual;
  std::array<double, 4> bbox{};  // center x, center y, width, height
  double conf = 0.0;
  double target_flag = 0.0;
};

struct Observation {
  ad::Tensor image;    // M x d_img
  ad::Tensor objects;  // N x (d_vis + 6), rows laid out as Detection

  int num_classes() const { return static_cast<int>(objects.rows()); }
  int d_vis() const { return static_cast<int>(objects.cols()) - 6; }
  double conf(int q) const { return objects(q, objects.cols() - 2); }
  double target_flag(int q) const { return objects(q, objects.cols() - 1); }
  Detection detection(int q) const;
};

struct StepInfo {
  bool collided = false;
  bool target_visible = false;
  double dist_to_target = 0.0;
};

struct StepOutcome {
  AgentState next_state;
  Observation observation;
  double reward = 0.0;
  bool done = false;
  bool success = false;
  StepInfo info;
};

}  // namespace doanav::sim
