#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace dam {

using Shape = std::vector<int>;

std::int64_t shape_numel(const Shape& s);
std::string shape_str(const Shape& s);

// Runtime guard switch. When on, forward ops reject non-finite outputs and
// losses validate their targets. Tests and the gradcheck driver enable it；
// training leaves it off.
bool debug_checks_enabled();
void set_debug_checks(bool on);

[[noreturn]] void tensor_fail(const std::string& msg);

// Dense row-major n-d array. The handle has value semantics over shared
// storage: copies alias the same buffer, which is how the tape keeps inputs
// alive. Constness is shallow (a const handle still exposes mutable spans);
// ops treat their inputs as immutable by convention. Gradients accumulate in
// a parallel buffer until zero_grad().
template <typename T>
class Tensor {
 public:
  Tensor() = default;

  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor full(Shape shape, T value, bool requires_grad = false);
  static Tensor from_data(Shape shape, std::vector<T> data, bool requires_grad = false);
  static Tensor scalar(T value, bool requires_grad = false);

  bool defined() const { return s_ != nullptr; }
  const Shape& shape() const { return s_->shape; }
  int rank() const { return static_cast<int>(s_->shape.size()); }
  int dim(int i) const { return s_->shape[static_cast<size_t>(i)]; }
  std::int64_t size() const { return static_cast<std::int64_t>(s_->data.size()); }

  std::span<T> data() const { return {s_->data.data(), s_->data.size()}; }

  bool requires_grad() const { return s_ && s_->requires_grad; }
  void set_requires_grad(bool rg) const;

  // Gradient buffer; allocated zero-filled on first access when the tensor
  // requires gradients.
  std::span<T> grad() const;
  bool has_grad() const { return s_ && !s_->grad.empty(); }
  void zero_grad() const;

  T item() const;

  // Deep copy; the copy never requires gradients.
  Tensor detached_copy() const;

  // Identity of the underlying storage; used for graph bookkeeping.
  const void* id() const { return static_cast<const void*>(s_.get()); }

  bool same_storage(const Tensor& other) const { return s_ == other.s_; }

 private:
  struct Storage {
    Shape shape;
    std::vector<T> data;
    std::vector<T> grad;
    bool requires_grad = false;
  };
  std::shared_ptr<Storage> s_;
};

// Reverse-mode tape: a Wengert list of backward closures recorded in forward
// execution order. backward() seeds d(loss)=1 and replays the list once in
// reverse. Gradients of op *outputs* are cleared at the start of each
// backward pass; leaf tensors (parameters) accumulate across passes until
// explicitly zeroed, so two backward calls double leaf gradients.
//
// One tape is active per thread at a time (TapeScope). Ops record onto the
// active tape only when some input requires gradients.
template <typename T>
class TapeScope;

template <typename T>
class Tape {
 public:
  struct Node {
    const char* op;
    std::vector<const void*> inputs;
    std::vector<const void*> outputs;
    std::function<void()> backward;
  };

  void record(const char* op, std::vector<const void*> inputs,
              std::vector<Tensor<T>> outputs, std::function<void()> backward);

  void backward(const Tensor<T>& loss);

  void clear();
  size_t size() const { return nodes_.size(); }
  const std::vector<Node>& nodes() const { return nodes_; }

  // Topological-order check: every node input is either a prior node output
  // or a leaf. Used by tests.
  bool check_topological() const;

  static Tape* active();

 private:
  friend class TapeScope<T>;
  std::vector<Node> nodes_;
  // Output tensors are retained so their grads can be reset per pass.
  std::vector<std::vector<Tensor<T>>> node_outputs_;
};

template <typename T>
class TapeScope {
 public:
  explicit TapeScope(Tape<T>& tape);
  ~TapeScope();
  TapeScope(const TapeScope&) = delete;
  TapeScope& operator=(const TapeScope&) = delete;

 private:
  Tape<T>* prev_;
};

}  // namespace dam
