#include "doanav/model/components.hpp"

#include <cmath>
#include <stdexcept>

namespace doanav::model {

using ad::Tensor;

Var intrinsic_logits(Var graph, bool undirected) {
  if (!undirected) return graph;
  return ad::scale(ad::add(graph, ad::transpose(graph)), 0.5);
}

Var intrinsic_attention(Var graph, int target, bool undirected) {
  const int n = static_cast<int>(graph.rows());
  if (target < 0 || target >= n) throw std::out_of_range("intrinsic_attention: target index out of range");
  // Only row `target` is normalized: edges ending elsewhere never reach the result.
  Var logits = ad::row(intrinsic_logits(graph, undirected), static_cast<std::size_t>(target));
  return ad::softmax_rows(logits);
}

Var object_index_embedding(Var fc1, Var b1, Var fc2, Var b2) {
  // One-hot index matrix times fc1 is fc1 itself.
  return ad::add_row_bias(ad::matmul(ad::relu(ad::add_row_bias(fc1, b1)), fc2), b2);
}

Var image_query(Var image, Var object_index, int target) {
  if (target < 0 || static_cast<std::size_t>(target) >= object_index.rows())
    throw std::out_of_range("image_query: target index out of range");
  return ad::concat({ad::mean_pool_rows(image), ad::row(object_index, target)}, 1);
}

ConfidenceMask confidence_filter(const Tensor& objects, double threshold) {
  ConfidenceMask m;
  const std::size_t n = objects.rows(), w = objects.cols();
  m.mask.assign(n, false);
  for (std::size_t q = 0; q < n; ++q) {
    if (objects(q, w - 2) > threshold) {
      m.mask[q] = true;
      m.kept.push_back(q);
    }
  }
  return m;
}

Var view_adaptive_graph(Var query, Var objects, const ConfidenceMask& mask, Var w_query, Var w_key,
                        Var w_out, int heads, int head_dim, DropoutSpec dropout,
                        AttentionTrace* trace) {
  const std::size_t n = objects.rows();
  if (mask.empty()) return query.tape->constant(Tensor(1, n));
  Var kept = ad::gather_rows(objects, mask.kept);
  Var q = ad::matmul(query, w_query);
  Var k = ad::matmul(kept, w_key);
  const double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(head_dim));
  std::vector<Var> rows;
  rows.reserve(heads);
  for (int i = 0; i < heads; ++i) {
    Var qi = ad::slice_cols(q, i * head_dim, head_dim);
    Var ki = ad::slice_cols(k, i * head_dim, head_dim);
    Var a = ad::softmax_rows(ad::scale(ad::matmul(qi, ad::transpose(ki)), inv_sqrt));
    if (trace) trace->rows.push_back(a.value());
    if (dropout.rng) a = ad::dropout(a, dropout.rate, *dropout.rng, dropout.training);
    rows.push_back(a);
  }
  Var stacked = ad::concat(rows, 0);                                 // NH x k
  Var combined = ad::matmul(ad::transpose(w_out), stacked);          // 1 x k
  return ad::scatter_cols(combined, mask.kept, n);
}

Var object_attention(Var g_intrinsic, Var g_view, Var w_n, Var w_v) {
  return ad::add(ad::scale_by(g_intrinsic, w_n), ad::scale_by(g_view, w_v));
}

Var reduce_objects(Var objects, Var fc1, Var b1, Var fc2, Var b2) {
  Var hidden = ad::relu(ad::add_row_bias(ad::matmul(objects, fc1), b1));
  return ad::add_row_bias(ad::matmul(hidden, fc2), b2);
}

Var uaoa(Var reduced, Var attention) { return ad::scale_rows(reduced, attention); }

Var object_semantics(Var attention, Var object_index, const ConfidenceMask& mask) {
  const std::size_t n = object_index.rows();
  Tensor m(1, n);
  for (std::size_t q = 0; q < n; ++q) m[q] = mask.mask.at(q) ? 1.0 : 0.0;
  Var masked = ad::mul(attention, attention.tape->constant(std::move(m)));
  return ad::matmul(masked, object_index);
}

Var position_aware_image(Var image, Var w1, Var w2, const PixelEmbedding& pe) {
  Var feats = ad::relu(ad::matmul(ad::relu(ad::matmul(image, w1)), w2));
  const std::size_t m = image.rows();
  switch (pe.mode) {
    case PixelEmbed::None:
    case PixelEmbed::Relative: return feats;
    case PixelEmbed::OneD:
      if (!pe.index || pe.index->rows() != m) throw ad::DimensionError("1d pixel embedding needs M rows");
      return ad::add(feats, *pe.index);
    case PixelEmbed::TwoD: {
      if (!pe.row || !pe.col || static_cast<std::size_t>(pe.grid * pe.grid) != m)
        throw ad::DimensionError("2d pixel embedding needs a g x g image grid");
      std::vector<std::size_t> rows(m), cols(m);
      for (std::size_t i = 0; i < m; ++i) {
        rows[i] = i / pe.grid;
        cols[i] = i % pe.grid;
      }
      return ad::add(feats, ad::add(ad::gather_rows(*pe.row, rows), ad::gather_rows(*pe.col, cols)));
    }
  }
  throw std::invalid_argument("position_aware_image: invalid pixel embedding mode");
}

Var relative_score_bias(Var table, int grid) {
  const std::size_t k = grid / 2 + 1;
  if (table.value().size() != k * k) throw ad::DimensionError("relative bias table size mismatch");
  std::vector<std::size_t> idx;
  for (int r = 0; r < grid; ++r)
    for (int c = 0; c < grid; ++c) {
      const std::size_t dr = std::abs(2 * r + 1 - grid) / 2;
      const std::size_t dc = std::abs(2 * c + 1 - grid) / 2;
      idx.push_back(dr * k + dc);
    }
  Var col = ad::gather_rows(ad::reshape(table, k * k, 1), idx);
  return ad::reshape(col, 1, idx.size());
}

Var uaia(Var semantics, Var image_features, Var w_query, Var w_key, Var w_value, Var w_out,
         int heads, int head_dim, std::optional<Var> score_bias, DropoutSpec dropout,
         AttentionTrace* trace) {
  Var q = ad::matmul(semantics, w_query);
  Var k = ad::matmul(image_features, w_key);
  Var v = ad::matmul(image_features, w_value);
  const double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(head_dim));
  std::vector<Var> outs;
  outs.reserve(heads);
  for (int i = 0; i < heads; ++i) {
    Var qi = ad::slice_cols(q, i * head_dim, head_dim);
    Var ki = ad::slice_cols(k, i * head_dim, head_dim);
    Var vi = ad::slice_cols(v, i * head_dim, head_dim);
    Var scores = ad::scale(ad::matmul(qi, ad::transpose(ki)), inv_sqrt);
    if (score_bias) scores = ad::add(scores, *score_bias);
    Var a = ad::softmax_rows(scores);
    if (trace) trace->rows.push_back(a.value());
    if (dropout.rng) a = ad::dropout(a, dropout.rate, *dropout.rng, dropout.training);
    outs.push_back(ad::matmul(a, vi));
  }
  return ad::matmul(ad::concat(outs, 1), w_out);
}

Var pool_objects(Var objects, Var pool_w, Var pool_b) {
  Var flat = ad::reshape(objects, 1, objects.value().size());
  return ad::add_row_bias(ad::matmul(flat, pool_w), pool_b);
}

Var abed_fuse(Var object_branch, Var image_branch, Var action_branch, const BranchWeights& w) {
  Var joint;
  switch (w.mode) {
    case BranchToken::Ed:
      if (!w.r1 || !w.r2 || !w.r3) throw std::invalid_argument("abed_fuse: ed mode needs r1..r3");
      joint = ad::concat({ad::scale_by(object_branch, *w.r1), ad::scale_by(image_branch, *w.r2),
                          ad::scale_by(action_branch, *w.r3)},
                         1);
      break;
    case BranchToken::Bs:
      if (!w.token_object || !w.token_image || !w.token_action)
        throw std::invalid_argument("abed_fuse: bs mode needs branch tokens");
      joint = ad::concat({ad::add(object_branch, *w.token_object),
                          ad::add(image_branch, *w.token_image),
                          ad::add(action_branch, *w.token_action)},
                         1);
      break;
    case BranchToken::None:
      joint = ad::concat({object_branch, image_branch, action_branch}, 1);
      break;
    default: throw std::invalid_argument("abed_fuse: invalid branch mode");
  }
  return ad::matmul(joint, w.fusion);
}

std::vector<double> done_reminder(std::span<const double> logits, double target_conf,
                                  double threshold, double kappa) {
  if (logits.size() != static_cast<std::size_t>(sim::kNumActions))
    throw ad::DimensionError("done_reminder expects 6 logits");
  std::vector<double> out(logits.begin(), logits.end());
  if (target_conf >= threshold) out[static_cast<int>(sim::Action::Done)] += kappa * target_conf;
  return out;
}

Var gcn_baseline(Var objects, Var w_adj, Var w_node, int d_vis, Var* adjacency_out) {
  Var rel = ad::slice_cols(objects, d_vis, 6);
  Var z = ad::matmul(rel, w_adj);
  Var adjacency = ad::softmax_rows(ad::matmul(z, ad::transpose(z)));
  if (adjacency_out) *adjacency_out = adjacency;
  return ad::matmul(adjacency, ad::relu(ad::matmul(objects, w_node)));
}

}  // namespace doanav::model
