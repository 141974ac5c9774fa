#pragma once

#include <span>
#include <vector>

#include "doanav/ad/tape.hpp"

namespace doanav::train {

using ad::Var;

/// One environment step as the learner sees it. The Vars live on the tape
/// the rollout was collected on.
struct Transition {
  Var log_prob;  // 1 x 1, log pi(a_t | s_t)
  Var value;     // 1 x 1
  Var entropy;   // 1 x 1
  int action = 0;
  double reward = 0.0;
  bool done = false;
  std::vector<double> attention;
};

struct Rollout {
  std::vector<Transition> transitions;
  double bootstrap_value = 0.0;  // 0 when the last transition is terminal
};

struct LossCoefs {
  double gamma = 0.99;
  double value_coef = 0.5;
  double beta_entropy = 0.01;
};

/// R_t = r_t + gamma * R_{t+1}, seeded with bootstrap.
std::vector<double> compute_returns(std::span<const double> rewards, double bootstrap, double gamma);

struct LossParts {
  Var total;
  double policy = 0.0;
  double value = 0.0;
  double entropy = 0.0;  // summed entropy, before the beta factor
};

/// -sum log pi * detach(A) + value_coef * sum (R - V)^2 - beta * sum entropy.
/// Throws std::invalid_argument on an empty rollout.
LossParts a3c_loss(const Rollout& rollout, const LossCoefs& coefs);

}  // namespace doanav::train
