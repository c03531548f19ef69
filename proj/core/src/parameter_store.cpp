#include "mrgnn/parameter_store.hpp"

#include "mrgnn/errors.hpp"

namespace mrgnn {

Tensor& ParameterStore::create(const std::string& name, Tensor init) {
  if (contains(name)) throw ValidationError("parameter already exists: " + name);
  init.requires_grad = true;
  entries_.emplace_back(name, std::move(init));
  index_.emplace(name, entries_.size() - 1);
  return entries_.back().second;
}

Tensor& ParameterStore::get(const std::string& name) {
  auto it = index_.find(name);
  if (it == index_.end()) throw ValidationError("unknown parameter: " + name);
  return entries_[it->second].second;
}

const Tensor& ParameterStore::get(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw ValidationError("unknown parameter: " + name);
  return entries_[it->second].second;
}

std::int64_t ParameterStore::total_elements() const {
  std::int64_t n = 0;
  for (const auto& [name, tensor] : entries_) n += tensor.size();
  return n;
}

std::vector<std::string> ParameterStore::names() const {
  std::vector<std::string> out;
  out.reserve(entries_.size());
  for (const auto& [name, tensor] : entries_) out.push_back(name);
  return out;
}

StagedParams::StagedParams(Tape& tape, const ParameterStore& store) {
  order_.reserve(store.count());
  for (std::size_t i = 0; i < store.count(); ++i) {
    Var v = tape.leaf(store.tensor_at(i), /*requires_grad=*/true);
    order_.emplace_back(store.name_at(i), v);
    index_.emplace(store.name_at(i), i);
  }
}

Var StagedParams::operator[](const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw ValidationError("parameter not staged: " + name);
  return order_[it->second].second;
}

std::vector<std::pair<std::string, Tensor>> collect_gradients(const Tape& tape,
                                                              const StagedParams& params) {
  std::vector<std::pair<std::string, Tensor>> grads;
  grads.reserve(params.count());
  for (std::size_t i = 0; i < params.count(); ++i) {
    grads.emplace_back(params.name_at(i), tape.grad(params.var_at(i).id()));
  }
  return grads;
}

}  // namespace mrgnn
