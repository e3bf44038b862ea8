#pragma once

#include "dam/affinity.hpp"

namespace dam {

struct B3DConfig {
  int in_channels = 1;    // affinity channels L (K*L in channel-concat mode)
  int mid_channels = 8;
  int out_channels = 8;   // C_m
  int depth_kernel = 1;   // extent along the raster pixel axis; 1 or 3
};

enum class KShotFusion { kMean, kChannelConcat };

template <typename T>
struct CoarseMask {
  Tensor<T> data;  // [C_m, h, w]
  int block = 0;
};

// Two parallel 3D-conv sub-networks over the affinity volume, kernel planes
// 3x3 and 5x5, each sub-network two [conv3d, batchnorm, relu] blocks with
// same padding. Their outputs are summed. The same weights serve both
// directional branches.
template <typename T>
class B3DNetwork {
 public:
  B3DNetwork(ParamRegistry<T>& reg, const std::string& name, const B3DConfig& cfg,
             Rng& rng);

  // Affinity enhancement over stack [L, N_s, N_q] with N_s == N_q == h*w.
  // Branch A unfolds the query axis into the (h,w) conv plane with the
  // support axis as depth; branch B does the same to the transposed stack;
  // the result is branchA + branchB^T per channel.
  Tensor<T> enhance(const Tensor<T>& stack, int h, int w, NormMode mode);

  const B3DConfig& config() const { return cfg_; }

 private:
  Tensor<T> run_volume(const Tensor<T>& volume, NormMode mode);

  struct SubNet {
    Conv3dLayer<T> conv0, conv1;
    BatchNormLayer<T> bn0, bn1;
  };
  B3DConfig cfg_;
  SubNet plane3_;
  SubNet plane5_;
};

// M_coarse[c,q] = sum_p m_s[p] * s_enh[c,p,q]: the support mask acts as a
// convolution weight along the support-pixel axis. No normalization.
// Differentiable in both arguments.
template <typename T>
Tensor<T> hysteretic_filter(const Tensor<T>& s_enh, const Tensor<T>& m_s);

// Full module over K shots. Mean fusion enhances and filters each shot with
// the shared network and averages the coarse masks; channel-concat fusion
// concatenates the K stacks ahead of one enhancement (the network must be
// built with in_channels = K*L) and filters with the mean support mask.
template <typename T>
CoarseMask<T> hsfm_forward(const std::vector<AffinityStack<T>>& stacks,
                           const std::vector<Tensor<T>>& masks, B3DNetwork<T>& net,
                           KShotFusion fusion, NormMode mode);

}  // namespace dam
