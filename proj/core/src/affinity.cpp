#include "dam/affinity.hpp"

#include <string>

namespace dam {

template <typename T>
Tensor<T> compute_affinity(const Tensor<T>& f_s, const Tensor<T>& f_q, bool normalize) {
  if (f_s.rank() != 3 || f_s.shape() != f_q.shape())
    tensor_fail("affinity: feature shapes differ, " + shape_str(f_s.shape()) + " vs " +
                shape_str(f_q.shape()));
  const int c = f_s.dim(0);
  const int n = f_s.dim(1) * f_s.dim(2);
  Tensor<T> xs = reshape(f_s, {c, n});
  Tensor<T> xq = reshape(f_q, {c, n});
  if (normalize) {
    xs = l2_normalize_cols(xs);
    xq = l2_normalize_cols(xq);
  }
  return matmul(transpose_last2(xs), xq);
}

template <typename T>
AffinityStack<T> stack_block_affinities(const FeaturePyramid<T>& pyr_s,
                                        const FeaturePyramid<T>& pyr_q, int block,
                                        const LinearHead<T>& head, bool normalize) {
  if (block != 3 && block != 4)
    tensor_fail("affinity: block must be 3 or 4, got " + std::to_string(block));
  const int layers = pyr_s.layer_count(block);
  if (layers != pyr_q.layer_count(block))
    tensor_fail("affinity: pyramids disagree on layer count");
  AffinityStack<T> stack;
  stack.block = block;
  stack.h = pyr_q.layer(block, 0).dim(1);
  stack.w = pyr_q.layer(block, 0).dim(2);
  const int n = stack.h * stack.w;
  std::vector<Tensor<T>> channels;
  channels.reserve(static_cast<size_t>(layers));
  for (int l = 0; l < layers; ++l) {
    Tensor<T> fs = head.forward(pyr_s.layer(block, l));
    Tensor<T> fq = head.forward(pyr_q.layer(block, l));
    channels.push_back(reshape(compute_affinity(fs, fq, normalize), {1, n, n}));
  }
  stack.data = channels.size() == 1 ? channels[0] : concat(channels, 0);
  return stack;
}

template <typename T>
Tensor<T> mask_support_features(const Tensor<T>& f_s, const Tensor<T>& mask_ds) {
  return mul_mask(f_s, mask_ds);
}

#define DAM_INSTANTIATE_AFFINITY(T)                                                   \
  template Tensor<T> compute_affinity(const Tensor<T>&, const Tensor<T>&, bool);      \
  template AffinityStack<T> stack_block_affinities(const FeaturePyramid<T>&,          \
                                                   const FeaturePyramid<T>&, int,     \
                                                   const LinearHead<T>&, bool);       \
  template Tensor<T> mask_support_features(const Tensor<T>&, const Tensor<T>&);

DAM_INSTANTIATE_AFFINITY(float)
DAM_INSTANTIATE_AFFINITY(double)

#undef DAM_INSTANTIATE_AFFINITY

}  // namespace dam
