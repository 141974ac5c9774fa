#include "doanav/model/policy.hpp"

#include <stdexcept>

namespace doanav::model {

ForwardPass::ForwardPass(const ModelParams& params, ad::ParamBinding& bind)
    : params_(params), bind_(bind) {}

Var ForwardPass::object_index() {
  if (!object_index_) {
    const auto& ids = params_.ids;
    object_index_ = object_index_embedding(p(ids.oi_fc1), p(ids.oi_b1), p(ids.oi_fc2), p(ids.oi_b2));
  }
  return *object_index_;
}

PolicyOutput ForwardPass::step(const sim::Observation& obs, int target, int prev_action, Var h,
                               Var c, bool training, Rng* dropout_rng, ForwardTrace* trace) {
  const ModelConfig& cfg = params_.cfg;
  const ParamIds& ids = params_.ids;
  const int n = cfg.num_classes;
  if (static_cast<int>(obs.objects.rows()) != n ||
      static_cast<int>(obs.objects.cols()) != cfg.detection_width() ||
      static_cast<int>(obs.image.rows()) != cfg.image_cells() ||
      static_cast<int>(obs.image.cols()) != cfg.d_img) {
    throw ad::DimensionError("observation shape does not match the model config");
  }
  if (target < 0 || target >= n) throw std::out_of_range("target class out of range");
  if (prev_action < 0 || prev_action > kStartActionToken) throw std::out_of_range("previous action out of range");

  ad::Tape& tape = bind_.tape();
  Var image = tape.constant(obs.image);
  Var objects = tape.constant(obs.objects);
  const DropoutSpec drop{cfg.dropout_rate, dropout_rng, training};

  // Confidence filter; with CF off every detected object survives.
  const ConfidenceMask mask = confidence_filter(obs.objects, cfg.use_cf ? cfg.conf_threshold : 0.0);

  // DOA graph.
  Var g_int = cfg.use_ig ? intrinsic_attention(p(ids.intrinsic_graph), target, cfg.undirected_doa)
                         : tape.constant(ad::Tensor(1, n));
  Var g_view = tape.constant(ad::Tensor(1, n));
  if (cfg.use_vag) {
    Var query = image_query(image, object_index(), target);
    g_view = view_adaptive_graph(query, objects, mask, p(ids.vag_query), p(ids.vag_key),
                                 p(ids.vag_out), cfg.num_heads, cfg.head_dim, drop,
                                 trace ? &trace->vag : nullptr);
  }
  Var attention = object_attention(g_int, g_view, p(ids.weight_intrinsic), p(ids.weight_view));

  PolicyOutput out;
  out.attention.mask = mask.mask;

  // Object branch.
  Var object_feats;
  if (cfg.use_gcn_baseline) {
    Var adjacency;
    object_feats = gcn_baseline(objects, p(ids.gcn_adj), p(ids.gcn_node), cfg.d_vis, &adjacency);
    // The comparator's attention is the adjacency row of the sought target.
    const auto& a = adjacency.value();
    out.attention.values.assign(&a.data()[target * n], &a.data()[(target + 1) * n]);
    if (trace) trace->gcn_adjacency = adjacency;
  } else {
    object_feats = reduce_objects(objects, p(ids.obj_fc1), p(ids.obj_b1), p(ids.obj_fc2), p(ids.obj_b2));
    if (cfg.use_uaoa) object_feats = uaoa(object_feats, attention);
    out.attention.values.assign(attention.value().data().begin(), attention.value().data().end());
  }
  Var object_branch = pool_objects(object_feats, p(ids.obj_pool), p(ids.obj_pool_b));

  // Image branch.
  PixelEmbedding pe;
  pe.mode = cfg.pixel_embed;
  pe.grid = cfg.image_grid;
  if (ids.pixel_index != kNoParam) pe.index = p(ids.pixel_index);
  if (ids.pixel_row != kNoParam) pe.row = p(ids.pixel_row);
  if (ids.pixel_col != kNoParam) pe.col = p(ids.pixel_col);
  Var image_feats = position_aware_image(image, p(ids.img_w1), p(ids.img_w2), pe);
  Var image_branch;
  if (cfg.use_uaia) {
    Var semantics = object_semantics(attention, object_index(), mask);
    std::optional<Var> bias;
    if (cfg.pixel_embed == PixelEmbed::Relative) bias = relative_score_bias(p(ids.pixel_relative), cfg.image_grid);
    image_branch = uaia(semantics, image_feats, p(ids.uaia_query), p(ids.uaia_key), p(ids.uaia_value),
                        p(ids.uaia_out), cfg.num_heads, cfg.head_dim, bias, drop,
                        trace ? &trace->uaia : nullptr);
  } else {
    image_branch = ad::mean_pool_rows(image_feats);
  }
  if (dropout_rng) image_branch = ad::dropout(image_branch, cfg.dropout_rate, *dropout_rng, training);

  // Previous-action branch and fusion.
  Var action_branch = ad::row(p(ids.prev_action), static_cast<std::size_t>(prev_action));
  BranchWeights bw;
  bw.mode = cfg.branch_token;
  bw.fusion = p(ids.fusion);
  if (cfg.branch_token == BranchToken::Ed) {
    bw.r1 = p(ids.abed_r1);
    bw.r2 = p(ids.abed_r2);
    bw.r3 = p(ids.abed_r3);
  } else if (cfg.branch_token == BranchToken::Bs) {
    bw.token_object = p(ids.token_object);
    bw.token_image = p(ids.token_image);
    bw.token_action = p(ids.token_action);
  }
  Var joint = abed_fuse(object_branch, image_branch, action_branch, bw);

  const ad::LstmWeights lw{p(ids.lstm_ih), p(ids.lstm_hh), p(ids.lstm_b)};
  auto [h_next, c_next] = ad::lstm_step(lw, joint, h, c);
  out.h = h_next;
  out.c = c_next;
  out.logits = ad::add_row_bias(ad::matmul(h_next, p(ids.actor_w)), p(ids.actor_b));
  out.value = ad::add_row_bias(ad::matmul(h_next, p(ids.critic_w)), p(ids.critic_b));

  if (trace) {
    trace->g_intrinsic = g_int;
    trace->g_view = g_view;
    trace->attention = attention;
    trace->image_embedding = image_branch;
    trace->joint = joint;
  }
  return out;
}

double target_confidence(const sim::Observation& obs, int target) { return obs.conf(target); }

std::vector<double> action_logits(const ModelConfig& cfg, const PolicyOutput& out,
                                  const sim::Observation& obs, int target) {
  const auto& l = out.logits.value();
  if (!cfg.done_reminder) return {l.data().begin(), l.data().end()};
  return done_reminder(l.data(), target_confidence(obs, target), cfg.conf_threshold, cfg.done_boost);
}

}  // namespace doanav::model
