#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "doanav/ad/tape.hpp"
#include "doanav/ad/tensor.hpp"

namespace doanav::ad {

using ParamId = std::size_t;

struct Parameter {
  std::string name;
  Tensor value;
};

/// Ordered, named collection of learnable tensors.
class ParamStore {
 public:
  ParamId add(std::string name, Tensor value);
  std::optional<ParamId> find(const std::string& name) const;

  Tensor& value(ParamId id) { return params_.at(id).value; }
  const Tensor& value(ParamId id) const { return params_.at(id).value; }
  const std::string& name(ParamId id) const { return params_.at(id).name; }
  std::size_t size() const { return params_.size(); }
  std::size_t element_count() const;

  std::vector<Parameter>& params() { return params_; }
  const std::vector<Parameter>& params() const { return params_; }

 private:
  std::vector<Parameter> params_;
  std::unordered_map<std::string, ParamId> index_;
};

/// One gradient tensor per parameter, aligned with a ParamStore.
struct GradBuffer {
  std::vector<Tensor> grads;

  static GradBuffer zeros_like(const ParamStore& store);
  void zero();
  void add(const GradBuffer& other);
  void scale(double s);
  double l2_norm() const;
};

/// Lazily binds store parameters as tape leaves, once per tape, and collects
/// their gradients after backward.
class ParamBinding {
 public:
  ParamBinding(Tape& tape, const ParamStore& store);

  Var operator[](ParamId id);
  Tape& tape() { return tape_; }
  const ParamStore& store() const { return store_; }

  /// Adds every bound parameter's gradient into buf. Unbound or unreached
  /// parameters contribute zero.
  void accumulate(GradBuffer& buf) const;

 private:
  Tape& tape_;
  const ParamStore& store_;
  std::vector<std::optional<Var>> bound_;
};

}  // namespace doanav::ad
