#pragma once

#include <vector>

#include "dam/tensor.hpp"

namespace dam {

// SGD with classic momentum: v <- mu*v + g; p <- p - lr*v.
// No weight decay, no schedule.
template <typename T>
class SgdOptimizer {
 public:
  SgdOptimizer(T learning_rate, T momentum);

  // Registers the learnable tensors and allocates matching velocity buffers.
  void attach(std::vector<Tensor<T>> params);

  // Applies one update. Every attached parameter must hold a gradient.
  void step();

  void zero_grads();

  size_t param_tensor_count() const { return params_.size(); }
  std::int64_t scalar_count() const;

  T learning_rate() const { return lr_; }
  T momentum() const { return momentum_; }

  const std::vector<Tensor<T>>& velocities() const { return velocity_; }
  std::vector<Tensor<T>>& velocities() { return velocity_; }
  const std::vector<Tensor<T>>& params() const { return params_; }

 private:
  T lr_;
  T momentum_;
  std::vector<Tensor<T>> params_;
  std::vector<Tensor<T>> velocity_;
};

}  // namespace dam
