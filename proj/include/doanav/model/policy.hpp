#pragma once

#include <optional>
#include <vector>

#include "doanav/ad/params.hpp"
#include "doanav/model/components.hpp"
#include "doanav/model/params.hpp"
#include "doanav/sim/types.hpp"

namespace doanav::model {

/// G_t for one step plus the confidence-filter survivors.
struct AttentionVector {
  std::vector<double> values;
  std::vector<bool> mask;
};

struct LstmState {
  ad::Tensor h;
  ad::Tensor c;
  static LstmState zeros(int hidden) { return {ad::Tensor(1, hidden), ad::Tensor(1, hidden)}; }
};

struct PolicyOutput {
  Var logits;  // 1 x 6, before the done reminder
  Var value;   // 1 x 1
  AttentionVector attention;
  Var h;
  Var c;
};

/// Intermediate values of one forward step, for tests and diagnostics.
struct ForwardTrace {
  std::optional<Var> g_intrinsic;
  std::optional<Var> g_view;
  std::optional<Var> attention;
  std::optional<Var> gcn_adjacency;
  std::optional<Var> image_embedding;
  std::optional<Var> joint;
  AttentionTrace vag;
  AttentionTrace uaia;
};

/// Evaluates the policy network on one tape. Parameter leaves and per-tape
/// constants (object-index embeddings, normalized intrinsic graph) are built
/// once and reused across the unrolled steps.
class ForwardPass {
 public:
  ForwardPass(const ModelParams& params, ad::ParamBinding& bind);

  PolicyOutput step(const sim::Observation& obs, int target, int prev_action, Var h, Var c,
                    bool training, Rng* dropout_rng, ForwardTrace* trace = nullptr);

  Var constant(const ad::Tensor& t) { return bind_.tape().constant(t); }
  const ModelConfig& cfg() const { return params_.cfg; }

 private:
  Var p(ad::ParamId id) { return bind_[id]; }
  Var object_index();

  const ModelParams& params_;
  ad::ParamBinding& bind_;
  std::optional<Var> object_index_;
};

/// Done-reminder confidence: the target row's detector confidence.
double target_confidence(const sim::Observation& obs, int target);

/// Logits with the done reminder applied (when enabled in cfg).
std::vector<double> action_logits(const ModelConfig& cfg, const PolicyOutput& out,
                                  const sim::Observation& obs, int target);

}  // namespace doanav::model
