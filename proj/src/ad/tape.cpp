#include "doanav/ad/tape.hpp"

#include <stdexcept>

namespace doanav::ad {

const Tensor& Var::value() const { return tape->value(id); }
const Tensor& Var::grad() const { return tape->grad(id); }

Var Tape::constant(Tensor value) { return push(std::move(value), false, nullptr); }

Var Tape::variable(Tensor value) { return push(std::move(value), true, nullptr); }

Var Tape::push(Tensor value, bool requires_grad, BackwardFn backward) {
  if (backward_done_) throw std::logic_error("cannot extend a tape after backward()");
  nodes_.push_back(Node{std::move(value), Tensor{}, requires_grad ? std::move(backward) : nullptr,
                        requires_grad});
  return Var{this, nodes_.size() - 1};
}

const Tensor& Tape::grad(std::size_t id) const {
  static const Tensor kEmpty;
  const Node& n = nodes_[id];
  return n.grad.empty() ? kEmpty : n.grad;
}

Tensor& Tape::grad_slot(std::size_t id) {
  Node& n = nodes_[id];
  if (n.grad.empty()) n.grad = Tensor(n.value.shape(), 0.0);
  return n.grad;
}

void Tape::backward(Var loss) {
  if (loss.tape != this) throw std::invalid_argument("loss belongs to a different tape");
  if (backward_done_) throw std::logic_error("backward() already ran on this tape");
  if (nodes_[loss.id].value.size() != 1) {
    throw DimensionError("backward() needs a scalar loss, got " +
                         nodes_[loss.id].value.shape_string());
  }
  backward_done_ = true;
  if (!nodes_[loss.id].requires_grad) return;
  grad_slot(loss.id)[0] = 1.0;
  for (std::size_t i = loss.id + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (n.backward && !n.grad.empty()) n.backward(*this, i);
  }
}

}  // namespace doanav::ad
