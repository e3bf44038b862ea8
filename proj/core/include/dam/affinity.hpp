#pragma once

#include "dam/backbone.hpp"

namespace dam {

// Multi-channel support x query correlation volume for one backbone block:
// one channel per layer (K*L after K-shot channel concatenation).
template <typename T>
struct AffinityStack {
  Tensor<T> data;  // [L, N_s, N_q], N_s == N_q == h*w
  int block = 0;   // 3 or 4
  int h = 0, w = 0;
};

// S[p,q] = <F_s[:,p], F_q[:,q]> over the channel axis. With normalize=true
// (the default) per-pixel feature vectors are scaled to unit L2 norm first,
// bounding S to [-1,1].
template <typename T>
Tensor<T> compute_affinity(const Tensor<T>& f_s, const Tensor<T>& f_q, bool normalize);

// One affinity channel per layer of the block, in layer order. The linear
// head, when enabled, maps both feature sides before the inner product.
template <typename T>
AffinityStack<T> stack_block_affinities(const FeaturePyramid<T>& pyr_s,
                                        const FeaturePyramid<T>& pyr_q, int block,
                                        const LinearHead<T>& head, bool normalize);

// F_s * mask, broadcast over channels. Used by the support-background
// ablation arm, with the mask downsampled to the block grid.
template <typename T>
Tensor<T> mask_support_features(const Tensor<T>& f_s, const Tensor<T>& mask_ds);

}  // namespace dam
