#pragma once

#include <string>
#include <vector>

#include "dam/tensor.hpp"

namespace dam {

// Ordered, named collection of a module's tensors. Registration order is the
// serialization order, so checkpoints are reproducible by construction.
// `learnable` entries feed the optimizer and the parameter census; buffers
// (batchnorm running stats) are persisted but never optimized.
template <typename T>
class ParamRegistry {
 public:
  struct Entry {
    std::string name;
    Tensor<T> tensor;
    bool learnable = false;
  };

  Tensor<T>& add_param(const std::string& name, Tensor<T> t) {
    t.set_requires_grad(true);
    entries_.push_back({name, std::move(t), true});
    return entries_.back().tensor;
  }

  Tensor<T>& add_buffer(const std::string& name, Tensor<T> t) {
    entries_.push_back({name, std::move(t), false});
    return entries_.back().tensor;
  }

  const std::vector<Entry>& entries() const { return entries_; }
  std::vector<Entry>& entries() { return entries_; }

  std::vector<Tensor<T>> learnable_tensors() const {
    std::vector<Tensor<T>> out;
    for (const auto& e : entries_)
      if (e.learnable) out.push_back(e.tensor);
    return out;
  }

  std::int64_t learnable_count() const {
    std::int64_t n = 0;
    for (const auto& e : entries_)
      if (e.learnable) n += e.tensor.size();
    return n;
  }

  void set_all_learnable(bool learnable) {
    for (auto& e : entries_) {
      e.learnable = learnable;
      e.tensor.set_requires_grad(learnable);
    }
  }

  void zero_grads() {
    for (auto& e : entries_)
      if (e.learnable) e.tensor.zero_grad();
  }

  const Entry* find(const std::string& name) const {
    for (const auto& e : entries_)
      if (e.name == name) return &e;
    return nullptr;
  }

 private:
  std::vector<Entry> entries_;
};

}  // namespace dam
