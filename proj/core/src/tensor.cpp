#include "dam/tensor.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

namespace dam {

std::int64_t shape_numel(const Shape& s) {
  std::int64_t n = 1;
  for (int d : s) n *= d;
  return n;
}

std::string shape_str(const Shape& s) {
  std::ostringstream os;
  os << "[";
  for (size_t i = 0; i < s.size(); ++i) {
    if (i) os << "x";
    os << s[i];
  }
  os << "]";
  return os.str();
}

namespace {
std::atomic<bool> g_debug_checks{false};
}

bool debug_checks_enabled() { return g_debug_checks.load(std::memory_order_relaxed); }
void set_debug_checks(bool on) { g_debug_checks.store(on, std::memory_order_relaxed); }

void tensor_fail(const std::string& msg) { throw std::runtime_error(msg); }

template <typename T>
Tensor<T> Tensor<T>::zeros(Shape shape, bool requires_grad) {
  for (int d : shape)
    if (d < 0) tensor_fail("tensor: negative dimension in shape " + shape_str(shape));
  Tensor t;
  t.s_ = std::make_shared<Storage>();
  t.s_->shape = std::move(shape);
  t.s_->data.assign(static_cast<size_t>(shape_numel(t.s_->shape)), T(0));
  t.s_->requires_grad = requires_grad;
  return t;
}

template <typename T>
Tensor<T> Tensor<T>::full(Shape shape, T value, bool requires_grad) {
  Tensor t = zeros(std::move(shape), requires_grad);
  std::fill(t.s_->data.begin(), t.s_->data.end(), value);
  return t;
}

template <typename T>
Tensor<T> Tensor<T>::from_data(Shape shape, std::vector<T> data, bool requires_grad) {
  if (static_cast<std::int64_t>(data.size()) != shape_numel(shape))
    tensor_fail("tensor: data length " + std::to_string(data.size()) +
                " does not match shape " + shape_str(shape));
  Tensor t;
  t.s_ = std::make_shared<Storage>();
  t.s_->shape = std::move(shape);
  t.s_->data = std::move(data);
  t.s_->requires_grad = requires_grad;
  return t;
}

template <typename T>
Tensor<T> Tensor<T>::scalar(T value, bool requires_grad) {
  return from_data({1}, {value}, requires_grad);
}

template <typename T>
void Tensor<T>::set_requires_grad(bool rg) const {
  if (!s_) tensor_fail("tensor: set_requires_grad on undefined tensor");
  s_->requires_grad = rg;
  if (!rg) s_->grad.clear();
}

template <typename T>
std::span<T> Tensor<T>::grad() const {
  if (!s_) tensor_fail("tensor: grad() on undefined tensor");
  if (!s_->requires_grad) tensor_fail("tensor: grad() on tensor that does not require grad");
  if (s_->grad.empty()) s_->grad.assign(s_->data.size(), T(0));
  return {s_->grad.data(), s_->grad.size()};
}

template <typename T>
void Tensor<T>::zero_grad() const {
  if (s_ && !s_->grad.empty()) std::fill(s_->grad.begin(), s_->grad.end(), T(0));
}

template <typename T>
T Tensor<T>::item() const {
  if (!s_ || s_->data.size() != 1) tensor_fail("tensor: item() requires size 1");
  return s_->data[0];
}

template <typename T>
Tensor<T> Tensor<T>::detached_copy() const {
  if (!s_) return {};
  Tensor t;
  t.s_ = std::make_shared<Storage>();
  t.s_->shape = s_->shape;
  t.s_->data = s_->data;
  t.s_->requires_grad = false;
  return t;
}

namespace {
template <typename T>
Tape<T>*& active_tape_slot() {
  thread_local Tape<T>* slot = nullptr;
  return slot;
}
}  // namespace

template <typename T>
Tape<T>* Tape<T>::active() {
  return active_tape_slot<T>();
}

template <typename T>
TapeScope<T>::TapeScope(Tape<T>& tape) {
  prev_ = active_tape_slot<T>();
  active_tape_slot<T>() = &tape;
}

template <typename T>
TapeScope<T>::~TapeScope() {
  active_tape_slot<T>() = prev_;
}

template <typename T>
void Tape<T>::record(const char* op, std::vector<const void*> inputs,
                     std::vector<Tensor<T>> outputs, std::function<void()> backward) {
  Node n;
  n.op = op;
  n.inputs = std::move(inputs);
  n.outputs.reserve(outputs.size());
  for (const auto& t : outputs) n.outputs.push_back(t.id());
  n.backward = std::move(backward);
  nodes_.push_back(std::move(n));
  node_outputs_.push_back(std::move(outputs));
}

template <typename T>
void Tape<T>::backward(const Tensor<T>& loss) {
  if (!loss.defined() || loss.size() != 1)
    tensor_fail("backward: loss must be a scalar tensor");
  if (!loss.requires_grad())
    tensor_fail("backward: loss does not require grad (no taped path to parameters)");
  // Reset per-pass gradients on every op output, then seed the loss.
  for (auto& outs : node_outputs_)
    for (auto& t : outs)
      if (t.requires_grad()) t.zero_grad();
  Tensor<T> seed = loss;  // shared storage
  seed.grad()[0] += T(1);
  for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it) it->backward();
}

template <typename T>
void Tape<T>::clear() {
  nodes_.clear();
  node_outputs_.clear();
}

template <typename T>
bool Tape<T>::check_topological() const {
  std::unordered_set<const void*> produced;
  std::unordered_set<const void*> leaves;
  for (const auto& n : nodes_) {
    for (const void* in : n.inputs) {
      if (!produced.count(in)) leaves.insert(in);
    }
    for (const void* out : n.outputs) {
      if (leaves.count(out)) return false;  // consumed as leaf before produced
      produced.insert(out);
    }
  }
  return true;
}

template class Tensor<float>;
template class Tensor<double>;
template class Tape<float>;
template class Tape<double>;
template class TapeScope<float>;
template class TapeScope<double>;

}  // namespace dam
