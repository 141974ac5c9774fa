#pragma once

#include <json.hpp>
#include <string>

#include "doanav/sim/types.hpp"

namespace doanav::model {

enum class PixelEmbed { None, OneD, TwoD, Relative };
enum class BranchToken { Ed, Bs, None };

std::string to_string(PixelEmbed m);
std::string to_string(BranchToken m);
PixelEmbed pixel_embed_from_string(const std::string& s);
BranchToken branch_token_from_string(const std::string& s);

struct ModelConfig {
  int num_classes = 22;
  int image_grid = 7;  // M = image_grid^2
  int d_img = 512;
  int d_vis = 512;
  int embed_dim = 64;
  int head_dim = 64;
  int num_heads = 4;
  int reducer_hidden = 128;
  int lstm_input = 64;
  int lstm_hidden = 128;
  int gcn_dim = 64;
  double conf_threshold = 0.6;
  double dropout_rate = 0.3;
  double done_boost = 2.0;

  bool use_uaoa = true;
  bool use_uaia = true;
  bool use_ig = true;
  bool use_vag = true;
  bool use_cf = true;
  PixelEmbed pixel_embed = PixelEmbed::OneD;
  bool undirected_doa = false;
  /// ABED is the Ed mode; None is plain concatenation.
  BranchToken branch_token = BranchToken::Ed;
  bool use_gcn_baseline = false;
  bool done_reminder = true;

  int image_cells() const { return image_grid * image_grid; }
  int detection_width() const { return d_vis + 6; }
  bool use_abed() const { return branch_token == BranchToken::Ed; }

  void validate() const;
  /// Copies the shape fields a world dictates.
  void match_world(const sim::WorldConfig& w);
  bool same_shapes(const ModelConfig& other) const;
};

/// Applies one named boolean toggle ("use_uaoa", "use_abed", ...). Throws
/// std::invalid_argument for unknown names.
void set_toggle(ModelConfig& cfg, const std::string& name, bool on);
bool get_toggle(const ModelConfig& cfg, const std::string& name);

void to_json(nlohmann::json& j, const ModelConfig& cfg);
void from_json(const nlohmann::json& j, ModelConfig& cfg);

}  // namespace doanav::model
