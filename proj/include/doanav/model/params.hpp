#pragma once

#include <cstdint>
#include <limits>

#include "doanav/ad/params.hpp"
#include "doanav/model/config.hpp"

namespace doanav::model {

inline constexpr ad::ParamId kNoParam = std::numeric_limits<ad::ParamId>::max();

/// Parameter ids of every learnable tensor. Ids are kNoParam for parts the
/// config leaves out (e.g. GCN weights on a DOA model).
struct ParamIds {
  ad::ParamId intrinsic_graph = kNoParam;  // N x N; row p holds logits of edges ending at p
  ad::ParamId weight_intrinsic = kNoParam;  // 1 x 1
  ad::ParamId weight_view = kNoParam;       // 1 x 1
  ad::ParamId oi_fc1 = kNoParam, oi_b1 = kNoParam, oi_fc2 = kNoParam, oi_b2 = kNoParam;
  ad::ParamId vag_query = kNoParam;  // (d_img + E) x (NH * HD), head i in column block i
  ad::ParamId vag_key = kNoParam;    // (d_vis + 6) x (NH * HD)
  ad::ParamId vag_out = kNoParam;    // NH x 1
  ad::ParamId obj_fc1 = kNoParam, obj_b1 = kNoParam, obj_fc2 = kNoParam, obj_b2 = kNoParam;
  ad::ParamId obj_pool = kNoParam, obj_pool_b = kNoParam;  // (N * E) x E
  ad::ParamId img_w1 = kNoParam, img_w2 = kNoParam;
  ad::ParamId pixel_index = kNoParam;              // M x E
  ad::ParamId pixel_row = kNoParam, pixel_col = kNoParam;  // g x E
  ad::ParamId pixel_relative = kNoParam;           // 1 x (g/2 + 1)^2
  ad::ParamId uaia_query = kNoParam, uaia_key = kNoParam, uaia_value = kNoParam;  // E x (NH * HD)
  ad::ParamId uaia_out = kNoParam;  // (NH * HD) x E
  ad::ParamId abed_r1 = kNoParam, abed_r2 = kNoParam, abed_r3 = kNoParam;
  ad::ParamId token_object = kNoParam, token_image = kNoParam, token_action = kNoParam;
  ad::ParamId prev_action = kNoParam;  // 7 x E; row 6 is the episode-start token
  ad::ParamId fusion = kNoParam;       // 3E x lstm_input, no bias
  ad::ParamId lstm_ih = kNoParam, lstm_hh = kNoParam, lstm_b = kNoParam;
  ad::ParamId actor_w = kNoParam, actor_b = kNoParam;
  ad::ParamId critic_w = kNoParam, critic_b = kNoParam;
  ad::ParamId gcn_adj = kNoParam, gcn_node = kNoParam;
};

inline constexpr int kStartActionToken = 6;

struct ModelParams {
  ModelConfig cfg;
  ad::ParamStore store;
  ParamIds ids;

  /// Builds every tensor the config needs with seeded Glorot-uniform init.
  /// G_n starts at zero, (w_n, w_v) at (0.95, 0.05) and ABED r at (1, 1, 1).
  static ModelParams create(const ModelConfig& cfg, std::uint64_t seed);

  /// Rebinds ids by name against store (used after loading a checkpoint).
  void relink();
};

}  // namespace doanav::model
