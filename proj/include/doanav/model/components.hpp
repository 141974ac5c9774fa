#pragma once

#include <optional>
#include <span>
#include <vector>

#include "doanav/ad/ops.hpp"
#include "doanav/common/rng.hpp"
#include "doanav/model/config.hpp"

namespace doanav::model {

using ad::Var;

/// Logits the intrinsic graph normalizes; ½(G + Gᵀ) when undirected.
Var intrinsic_logits(Var graph, bool undirected);

/// Normalized weights of every edge ending at target: entry q is softmax over
/// row target of the logits, i.e. the weight of edge q -> target. 1 x N.
Var intrinsic_attention(Var graph, int target, bool undirected);

/// Object-index embeddings: two dense layers applied to one-hot class indices. N x E.
Var object_index_embedding(Var fc1, Var b1, Var fc2, Var b2);

/// [mean over the M image rows | OI[target]], 1 x (d_img + E).
Var image_query(Var image, Var object_index, int target);

struct ConfidenceMask {
  std::vector<bool> mask;
  std::vector<std::size_t> kept;
  bool empty() const { return kept.empty(); }
};

/// mask[q] = conf_q > threshold (strict). conf is the second-to-last column.
ConfidenceMask confidence_filter(const ad::Tensor& objects, double threshold);

struct DropoutSpec {
  double rate = 0.0;
  Rng* rng = nullptr;
  bool training = false;
};

/// Softmax rows produced inside an attention block, one per head.
struct AttentionTrace {
  std::vector<ad::Tensor> rows;
};

/// Multi-head scores of the image query against surviving detector rows,
/// softmax per head, heads combined by w_out and scattered to length N with
/// zeros at filtered slots. Empty mask yields all zeros.
Var view_adaptive_graph(Var query, Var objects, const ConfidenceMask& mask, Var w_query, Var w_key,
                        Var w_out, int heads, int head_dim, DropoutSpec dropout = {},
                        AttentionTrace* trace = nullptr);

/// G_t = g_intrinsic * w_n + g_view * w_v.
Var object_attention(Var g_intrinsic, Var g_view, Var w_n, Var w_v);

/// FC -> ReLU -> FC on detector rows, N x E.
Var reduce_objects(Var objects, Var fc1, Var b1, Var fc2, Var b2);

/// Row q of the reduced object features scaled by attention[q].
Var uaoa(Var reduced, Var attention);

/// D = sum_q mask[q] * G_t[q] * OI[q], 1 x E.
Var object_semantics(Var attention, Var object_index, const ConfidenceMask& mask);

struct PixelEmbedding {
  PixelEmbed mode = PixelEmbed::None;
  int grid = 1;
  std::optional<Var> index;  // 1d: M x E
  std::optional<Var> row;    // 2d: g x E
  std::optional<Var> col;    // 2d: g x E
};

/// ReLU(ReLU(I W1) W2) + positional embedding, M x E. Relative mode adds
/// nothing here; its bias enters the attention scores instead.
Var position_aware_image(Var image, Var w1, Var w2, const PixelEmbedding& pe);

/// Bias per pixel from its offset to the view centre, 1 x M. Table is 1 x (g/2+1)^2.
Var relative_score_bias(Var table, int grid);

/// Single-query multi-head attention of D over the image features, 1 x E.
Var uaia(Var semantics, Var image_features, Var w_query, Var w_key, Var w_value, Var w_out,
         int heads, int head_dim, std::optional<Var> score_bias = std::nullopt,
         DropoutSpec dropout = {}, AttentionTrace* trace = nullptr);

/// Flatten N x E then linear to 1 x E.
Var pool_objects(Var objects, Var pool_w, Var pool_b);

struct BranchWeights {
  BranchToken mode = BranchToken::None;
  std::optional<Var> r1, r2, r3;
  std::optional<Var> token_object, token_image, token_action;
  Var fusion;
};

/// H_t = F_pw(concat(r1 * S, r2 * I, r3 * PA)) in ed mode; bs adds a learned
/// token to each branch instead; none is a plain concat.
Var abed_fuse(Var object_branch, Var image_branch, Var action_branch, const BranchWeights& w);

/// Adds kappa * target_conf to the Done logit when target_conf >= threshold.
std::vector<double> done_reminder(std::span<const double> logits, double target_conf,
                                  double threshold, double kappa);

/// Biased object-GCN comparator. Adjacency is softmax_rows((X W_a)(X W_a)^T)
/// over the six non-visual columns X; output is A * ReLU(S W_g), N x E.
Var gcn_baseline(Var objects, Var w_adj, Var w_node, int d_vis, Var* adjacency_out = nullptr);

}  // namespace doanav::model
