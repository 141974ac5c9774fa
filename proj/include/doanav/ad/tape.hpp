#pragma once

#include <cstddef>
#include <deque>
#include <functional>
#include <vector>

#include "doanav/ad/tensor.hpp"

namespace doanav::ad {

class Tape;

/// Handle to a node on a Tape. Cheap to copy; valid while the tape lives.
struct Var {
  Tape* tape = nullptr;
  std::size_t id = 0;

  const Tensor& value() const;
  const Tensor& grad() const;
  std::size_t rows() const { return value().rows(); }
  std::size_t cols() const { return value().cols(); }
};

/// Dynamic reverse-mode graph. Nodes are appended in evaluation order, so the
/// node vector is already a topological order; backward walks it in reverse.
///
/// backward() may be called once per tape. Parameter gradients are read off
/// the leaf nodes afterwards (see ParamBinding) and accumulated by the caller.
class Tape {
 public:
  using BackwardFn = std::function<void(Tape&, std::size_t self)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(Tensor value);
  Var variable(Tensor value);
  Var push(Tensor value, bool requires_grad, BackwardFn backward);

  const Tensor& value(std::size_t id) const { return nodes_[id].value; }
  const Tensor& grad(std::size_t id) const;
  bool requires_grad(std::size_t id) const { return nodes_[id].requires_grad; }
  bool has_grad(std::size_t id) const { return !nodes_[id].grad.empty(); }

  /// Gradient slot for accumulation, zero-initialized on first access.
  Tensor& grad_slot(std::size_t id);

  void backward(Var loss);
  bool backward_done() const { return backward_done_; }
  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Tensor value;
    Tensor grad;
    BackwardFn backward;
    bool requires_grad = false;
  };

  std::deque<Node> nodes_;  // deque: value() references survive later pushes
  bool backward_done_ = false;
};

}  // namespace doanav::ad
