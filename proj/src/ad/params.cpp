#include "doanav/ad/params.hpp"

#include <cmath>
#include <stdexcept>

namespace doanav::ad {

ParamId ParamStore::add(std::string name, Tensor value) {
  if (index_.contains(name)) throw std::invalid_argument("duplicate parameter name: " + name);
  const ParamId id = params_.size();
  index_.emplace(name, id);
  params_.push_back(Parameter{std::move(name), std::move(value)});
  return id;
}

std::optional<ParamId> ParamStore::find(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::size_t ParamStore::element_count() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += p.value.size();
  return n;
}

GradBuffer GradBuffer::zeros_like(const ParamStore& store) {
  GradBuffer b;
  b.grads.reserve(store.size());
  for (const auto& p : store.params()) b.grads.emplace_back(p.value.shape(), 0.0);
  return b;
}

void GradBuffer::zero() {
  for (auto& g : grads) g.fill(0.0);
}

void GradBuffer::add(const GradBuffer& other) {
  if (other.grads.size() != grads.size()) throw DimensionError("GradBuffer::add size mismatch");
  for (std::size_t k = 0; k < grads.size(); ++k) {
    if (grads[k].size() != other.grads[k].size())
      throw DimensionError("GradBuffer::add shape mismatch");
    for (std::size_t i = 0; i < grads[k].size(); ++i) grads[k][i] += other.grads[k][i];
  }
}

void GradBuffer::scale(double s) {
  for (auto& g : grads)
    for (double& v : g.values()) v *= s;
}

double GradBuffer::l2_norm() const {
  double s = 0.0;
  for (const auto& g : grads)
    for (double v : g.data()) s += v * v;
  return std::sqrt(s);
}

ParamBinding::ParamBinding(Tape& tape, const ParamStore& store)
    : tape_(tape), store_(store), bound_(store.size()) {}

Var ParamBinding::operator[](ParamId id) {
  auto& slot = bound_.at(id);
  if (!slot) slot = tape_.variable(store_.value(id));
  return *slot;
}

void ParamBinding::accumulate(GradBuffer& buf) const {
  for (std::size_t id = 0; id < bound_.size(); ++id) {
    if (!bound_[id] || !tape_.has_grad(bound_[id]->id)) continue;
    const Tensor& g = tape_.grad(bound_[id]->id);
    Tensor& dst = buf.grads.at(id);
    for (std::size_t i = 0; i < g.size(); ++i) dst[i] += g[i];
  }
}

}  // namespace doanav::ad
