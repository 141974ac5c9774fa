#include "doanav/model/params.hpp"

#include <cmath>
#include <functional>
#include <random>
#include <stdexcept>
#include <utility>
#include <vector>

#include "doanav/common/rng.hpp"

namespace doanav::model {
namespace {

using ad::ParamId;
using ad::Tensor;

// (name, member) table shared by create() and relink().
std::vector<std::pair<const char*, ParamId ParamIds::*>> id_table() {
  return {{"intrinsic_graph", &ParamIds::intrinsic_graph},
          {"weight_intrinsic", &ParamIds::weight_intrinsic},
          {"weight_view", &ParamIds::weight_view},
          {"object_index.fc1", &ParamIds::oi_fc1},
          {"object_index.b1", &ParamIds::oi_b1},
          {"object_index.fc2", &ParamIds::oi_fc2},
          {"object_index.b2", &ParamIds::oi_b2},
          {"vag.query", &ParamIds::vag_query},
          {"vag.key", &ParamIds::vag_key},
          {"vag.out", &ParamIds::vag_out},
          {"object.fc1", &ParamIds::obj_fc1},
          {"object.b1", &ParamIds::obj_b1},
          {"object.fc2", &ParamIds::obj_fc2},
          {"object.b2", &ParamIds::obj_b2},
          {"object.pool", &ParamIds::obj_pool},
          {"object.pool_b", &ParamIds::obj_pool_b},
          {"image.w1", &ParamIds::img_w1},
          {"image.w2", &ParamIds::img_w2},
          {"pixel.index", &ParamIds::pixel_index},
          {"pixel.row", &ParamIds::pixel_row},
          {"pixel.col", &ParamIds::pixel_col},
          {"pixel.relative", &ParamIds::pixel_relative},
          {"uaia.query", &ParamIds::uaia_query},
          {"uaia.key", &ParamIds::uaia_key},
          {"uaia.value", &ParamIds::uaia_value},
          {"uaia.out", &ParamIds::uaia_out},
          {"abed.r1", &ParamIds::abed_r1},
          {"abed.r2", &ParamIds::abed_r2},
          {"abed.r3", &ParamIds::abed_r3},
          {"token.object", &ParamIds::token_object},
          {"token.image", &ParamIds::token_image},
          {"token.action", &ParamIds::token_action},
          {"prev_action", &ParamIds::prev_action},
          {"fusion", &ParamIds::fusion},
          {"lstm.w_ih", &ParamIds::lstm_ih},
          {"lstm.w_hh", &ParamIds::lstm_hh},
          {"lstm.b", &ParamIds::lstm_b},
          {"actor.w", &ParamIds::actor_w},
          {"actor.b", &ParamIds::actor_b},
          {"critic.w", &ParamIds::critic_w},
          {"critic.b", &ParamIds::critic_b},
          {"gcn.adj", &ParamIds::gcn_adj},
          {"gcn.node", &ParamIds::gcn_node}};
}

}  // namespace

ModelParams ModelParams::create(const ModelConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  ModelParams mp;
  mp.cfg = cfg;
  Rng rng = make_rng(seed, "init");
  auto& s = mp.store;
  auto& ids = mp.ids;

  auto glorot = [&](const char* name, std::size_t r, std::size_t c, double gain = 1.0) {
    const double limit = gain * std::sqrt(6.0 / static_cast<double>(r + c));
    std::uniform_real_distribution<double> u(-limit, limit);
    Tensor t(r, c);
    for (double& v : t.values()) v = u(rng);
    return s.add(name, std::move(t));
  };
  auto zeros = [&](const char* name, std::size_t r, std::size_t c) { return s.add(name, Tensor(r, c)); };
  auto constant = [&](const char* name, double v) { return s.add(name, Tensor::scalar(v)); };

  const std::size_t n = cfg.num_classes, e = cfg.embed_dim, hd = cfg.head_dim, nh = cfg.num_heads;
  const std::size_t m = cfg.image_cells(), g = cfg.image_grid;
  const std::size_t dw = cfg.detection_width(), hidden = cfg.lstm_hidden;

  ids.intrinsic_graph = zeros("intrinsic_graph", n, n);
  ids.weight_intrinsic = constant("weight_intrinsic", 0.95);
  ids.weight_view = constant("weight_view", 0.05);
  ids.oi_fc1 = glorot("object_index.fc1", n, e);
  ids.oi_b1 = zeros("object_index.b1", 1, e);
  ids.oi_fc2 = glorot("object_index.fc2", e, e);
  ids.oi_b2 = zeros("object_index.b2", 1, e);
  ids.vag_query = glorot("vag.query", cfg.d_img + e, nh * hd);
  ids.vag_key = glorot("vag.key", dw, nh * hd);
  {
    // Heads start as an even average so G_v begins as a distribution.
    Tensor t(nh, 1, 1.0 / static_cast<double>(nh));
    ids.vag_out = s.add("vag.out", std::move(t));
  }
  if (cfg.use_gcn_baseline) {
    ids.gcn_adj = glorot("gcn.adj", 6, cfg.gcn_dim);
    ids.gcn_node = glorot("gcn.node", dw, e);
  } else {
    ids.obj_fc1 = glorot("object.fc1", dw, cfg.reducer_hidden);
    ids.obj_b1 = zeros("object.b1", 1, cfg.reducer_hidden);
    ids.obj_fc2 = glorot("object.fc2", cfg.reducer_hidden, e);
    ids.obj_b2 = zeros("object.b2", 1, e);
  }
  ids.obj_pool = glorot("object.pool", n * e, e);
  ids.obj_pool_b = zeros("object.pool_b", 1, e);
  ids.img_w1 = glorot("image.w1", cfg.d_img, cfg.reducer_hidden);
  ids.img_w2 = glorot("image.w2", cfg.reducer_hidden, e);
  switch (cfg.pixel_embed) {
    case PixelEmbed::None: break;
    case PixelEmbed::OneD: ids.pixel_index = glorot("pixel.index", m, e, 0.5); break;
    case PixelEmbed::TwoD:
      ids.pixel_row = glorot("pixel.row", g, e, 0.5);
      ids.pixel_col = glorot("pixel.col", g, e, 0.5);
      break;
    case PixelEmbed::Relative: {
      const std::size_t k = g / 2 + 1;
      ids.pixel_relative = zeros("pixel.relative", 1, k * k);
      break;
    }
  }
  ids.uaia_query = glorot("uaia.query", e, nh * hd);
  ids.uaia_key = glorot("uaia.key", e, nh * hd);
  ids.uaia_value = glorot("uaia.value", e, nh * hd);
  ids.uaia_out = glorot("uaia.out", nh * hd, e);
  if (cfg.branch_token == BranchToken::Ed) {
    ids.abed_r1 = constant("abed.r1", 1.0);
    ids.abed_r2 = constant("abed.r2", 1.0);
    ids.abed_r3 = constant("abed.r3", 1.0);
  } else if (cfg.branch_token == BranchToken::Bs) {
    ids.token_object = glorot("token.object", 1, e, 0.5);
    ids.token_image = glorot("token.image", 1, e, 0.5);
    ids.token_action = glorot("token.action", 1, e, 0.5);
  }
  ids.prev_action = glorot("prev_action", sim::kNumActions + 1, e, 0.5);
  ids.fusion = glorot("fusion", 3 * e, cfg.lstm_input);
  ids.lstm_ih = glorot("lstm.w_ih", cfg.lstm_input, 4 * hidden);
  ids.lstm_hh = glorot("lstm.w_hh", hidden, 4 * hidden);
  {
    Tensor b(1, 4 * hidden);
    for (std::size_t i = hidden; i < 2 * hidden; ++i) b[i] = 1.0;  // forget gate
    ids.lstm_b = s.add("lstm.b", std::move(b));
  }
  ids.actor_w = glorot("actor.w", hidden, sim::kNumActions, 0.1);
  ids.actor_b = zeros("actor.b", 1, sim::kNumActions);
  ids.critic_w = glorot("critic.w", hidden, 1, 0.1);
  ids.critic_b = zeros("critic.b", 1, 1);
  return mp;
}

void ModelParams::relink() {
  ids = ParamIds{};
  for (const auto& [name, member] : id_table()) {
    if (auto id = store.find(name)) ids.*member = *id;
  }
}

}  // namespace doanav::model
