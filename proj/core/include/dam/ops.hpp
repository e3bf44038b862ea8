#pragma once

#include <utility>
#include <vector>

#include "dam/rng.hpp"
#include "dam/tensor.hpp"

namespace dam {

struct Pad2 {
  int h = 0, w = 0;
};
struct Stride2 {
  int h = 1, w = 1;
};
struct Pad3 {
  int d = 0, h = 0, w = 0;
};

// Padding that preserves spatial extent for a stride-1 convolution.
// Requires an odd kernel extent.
int same_padding(int kernel_extent);

enum class NormMode { kTrain, kEval };

// Exponential-moving-average statistics owned by a batchnorm layer. Updated
// in place during train-mode forwards; never recorded on the tape.
template <typename T>
struct BatchNormState {
  Tensor<T> running_mean;  // [C]
  Tensor<T> running_var;   // [C]
  static BatchNormState make(int channels);
};

// ---- differentiable primitives -------------------------------------------
//
// All ops are pure functions of their tensor arguments (batchnorm's running
// stats aside) and record their backward rule on the active tape when any
// input requires gradients. Convolutions use the cross-correlation
// convention (no kernel flip).

template <typename T>
Tensor<T> matmul(const Tensor<T>& a, const Tensor<T>& b);

template <typename T>
Tensor<T> conv2d(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& bias,
                 Pad2 pad = {}, Stride2 stride = {});

// Stride is fixed to 1 on all three axes.
template <typename T>
Tensor<T> conv3d(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& bias,
                 Pad3 pad = {});

// Normalizes per channel over all remaining axes. Train mode uses batch
// statistics (biased variance) and updates `state` by EMA; eval mode applies
// the running statistics.
template <typename T>
Tensor<T> batchnorm(const Tensor<T>& x, const Tensor<T>& gamma, const Tensor<T>& beta,
                    BatchNormState<T>& state, NormMode mode, T momentum = T(0.1),
                    T eps = T(1e-5));

template <typename T>
Tensor<T> groupnorm(const Tensor<T>& x, int groups, const Tensor<T>& gamma,
                    const Tensor<T>& beta, T eps = T(1e-5));

template <typename T>
Tensor<T> relu(const Tensor<T>& x);

template <typename T>
Tensor<T> sigmoid(const Tensor<T>& x);

// Bilinear, align_corners=true: corner samples map exactly onto corner pixels.
template <typename T>
Tensor<T> upsample_bilinear(const Tensor<T>& x, int out_h, int out_w);

template <typename T>
Tensor<T> concat(const std::vector<Tensor<T>>& xs, int axis);

// Splits an even-sized axis into exact halves.
template <typename T>
std::pair<Tensor<T>, Tensor<T>> split_half(const Tensor<T>& x, int axis);

// Mean over elements of -[y*log(sig(z)) + (1-y)*log(1-sig(z))], evaluated in
// log space so saturated logits stay finite. Targets must be exactly 0 or 1
// (validated when debug checks are on); gradients flow to the logits only.
template <typename T>
Tensor<T> bce_with_logits(const Tensor<T>& logits, const Tensor<T>& target);

template <typename T>
Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b);

template <typename T>
Tensor<T> scale(const Tensor<T>& x, T c);

// out[c,i,j] = x[c,i,j] * m[i,j]
template <typename T>
Tensor<T> mul_mask(const Tensor<T>& x, const Tensor<T>& m);

template <typename T>
Tensor<T> reshape(const Tensor<T>& x, Shape shape);

// Swaps the last two axes of a rank-2 or rank-3 tensor.
template <typename T>
Tensor<T> transpose_last2(const Tensor<T>& x);

// Scales every column of x[c,n] to unit L2 norm (norm = sqrt(sum + eps)).
template <typename T>
Tensor<T> l2_normalize_cols(const Tensor<T>& x, T eps = T(1e-12));

// [C,H,W] -> [C], mean over the spatial extent.
template <typename T>
Tensor<T> spatial_mean(const Tensor<T>& x);

template <typename T>
Tensor<T> softmax_cross_entropy(const Tensor<T>& logits, int target_index);

template <typename T>
Tensor<T> sum_all(const Tensor<T>& x);

// Elementwise mean of same-shaped tensors, accumulated in double precision so
// the mean of K identical inputs reproduces them bit-exactly.
template <typename T>
Tensor<T> mean_tensors(const std::vector<Tensor<T>>& xs);

// ---- initialization helpers ----------------------------------------------

template <typename T>
void fill_normal(Tensor<T>& t, Rng& rng, double stddev);

// He fan-in scaling for a conv/linear weight whose fan-in is
// numel(shape) / shape[0].
template <typename T>
void he_init(Tensor<T>& w, Rng& rng);

}  // namespace dam
