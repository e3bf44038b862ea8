#include "dam/optim.hpp"

#include <string>

namespace dam {

template <typename T>
SgdOptimizer<T>::SgdOptimizer(T learning_rate, T momentum)
    : lr_(learning_rate), momentum_(momentum) {
  if (!(learning_rate > T(0))) tensor_fail("sgd: learning rate must be positive");
  if (momentum < T(0) || momentum >= T(1)) tensor_fail("sgd: momentum must be in [0,1)");
}

template <typename T>
void SgdOptimizer<T>::attach(std::vector<Tensor<T>> params) {
  params_ = std::move(params);
  velocity_.clear();
  velocity_.reserve(params_.size());
  for (const auto& p : params_) velocity_.push_back(Tensor<T>::zeros(p.shape()));
}

template <typename T>
void SgdOptimizer<T>::step() {
  for (size_t i = 0; i < params_.size(); ++i) {
    auto& p = params_[i];
    if (!p.has_grad())
      tensor_fail("sgd: missing gradient for parameter #" + std::to_string(i) +
                  " with shape " + shape_str(p.shape()));
    auto g = p.grad();
    auto v = velocity_[i].data();
    auto d = p.data();
    for (std::int64_t j = 0; j < p.size(); ++j) {
      v[j] = momentum_ * v[j] + g[j];
      d[j] -= lr_ * v[j];
    }
  }
}

template <typename T>
void SgdOptimizer<T>::zero_grads() {
  for (auto& p : params_) p.zero_grad();
}

template <typename T>
std::int64_t SgdOptimizer<T>::scalar_count() const {
  std::int64_t n = 0;
  for (const auto& p : params_) n += p.size();
  return n;
}

template class SgdOptimizer<float>;
template class SgdOptimizer<double>;

}  // namespace dam
