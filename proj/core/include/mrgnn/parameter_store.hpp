#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "mrgnn/autodiff.hpp"
#include "mrgnn/tensor.hpp"

namespace mrgnn {

// Named trainable tensors. Iteration follows creation order, which is fixed
// by model construction, so optimizer sweeps and checkpoints are reproducible
// run to run. Shapes are frozen at creation; only values may change.
class ParameterStore {
 public:
  Tensor& create(const std::string& name, Tensor init);
  bool contains(const std::string& name) const { return index_.count(name) != 0; }
  Tensor& get(const std::string& name);
  const Tensor& get(const std::string& name) const;

  std::size_t count() const { return entries_.size(); }
  std::int64_t total_elements() const;

  const std::string& name_at(std::size_t i) const { return entries_[i].first; }
  Tensor& tensor_at(std::size_t i) { return entries_[i].second; }
  const Tensor& tensor_at(std::size_t i) const { return entries_[i].second; }

  std::vector<std::string> names() const;

  template <typename Fn>
  void for_each(Fn&& fn) const {
    for (const auto& [name, tensor] : entries_) fn(name, tensor);
  }

 private:
  std::vector<std::pair<std::string, Tensor>> entries_;
  std::unordered_map<std::string, std::size_t> index_;
};

// Every parameter of one store copied onto a tape as gradient-tracked leaves,
// for a single forward pass. Keeps store order for gradient collection.
class StagedParams {
 public:
  StagedParams(Tape& tape, const ParameterStore& store);

  Var operator[](const std::string& name) const;  // throws on unknown name
  std::size_t count() const { return order_.size(); }
  const std::string& name_at(std::size_t i) const { return order_[i].first; }
  Var var_at(std::size_t i) const { return order_[i].second; }

 private:
  std::vector<std::pair<std::string, Var>> order_;
  std::unordered_map<std::string, std::size_t> index_;
};

// Gradient per parameter, in store order. Requires tape.backward() first.
std::vector<std::pair<std::string, Tensor>> collect_gradients(const Tape& tape,
                                                              const StagedParams& params);

}  // namespace mrgnn
