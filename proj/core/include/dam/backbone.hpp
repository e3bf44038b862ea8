#pragma once

#include <cstdint>
#include <vector>

#include "dam/layers.hpp"
#include "dam/optim.hpp"

namespace dam {

struct BackboneBlockSpec {
  int layers = 2;
  int channels = 16;
  int downsample = 2;
};

struct BackboneConfig {
  int in_channels = 3;
  // Four blocks; blocks 3 and 4 feed the affinity stacks, blocks 1 and 2 are
  // the low-level skip sources.
  std::vector<BackboneBlockSpec> blocks = {{2, 16, 2}, {2, 24, 2}, {3, 32, 2}, {2, 48, 2}};
  std::uint64_t seed = 0;
  int groupnorm_groups = 4;
};

// Per-block, per-layer post-activation feature maps of one image.
template <typename T>
struct FeaturePyramid {
  std::vector<std::vector<Tensor<T>>> blocks;  // blocks[b][layer] = [C_b, h_b, w_b]

  const Tensor<T>& layer(int block_1based, int layer) const {
    return blocks[static_cast<size_t>(block_1based - 1)][static_cast<size_t>(layer)];
  }
  int layer_count(int block_1based) const {
    return static_cast<int>(blocks[static_cast<size_t>(block_1based - 1)].size());
  }
  // Last layer of a block, the skip-feature convention.
  const Tensor<T>& block_output(int block_1based) const {
    return blocks[static_cast<size_t>(block_1based - 1)].back();
  }
};

// Small frozen convolutional encoder: per block, a stride-2 conv3x3 followed
// by stride-1 conv3x3 layers, each conv + groupnorm + relu. Weights are
// He-initialized from the seed and marked non-learnable.
template <typename T>
class Backbone {
 public:
  explicit Backbone(const BackboneConfig& cfg);

  // H and W must be divisible by the total downsampling factor (16 for the
  // default config). Keeps every layer's post-activation map.
  FeaturePyramid<T> extract(const Tensor<T>& image) const;

  const BackboneConfig& config() const { return cfg_; }
  ParamRegistry<T>& registry() { return reg_; }
  const ParamRegistry<T>& registry() const { return reg_; }

  void freeze() { reg_.set_all_learnable(false); }
  void unfreeze() { reg_.set_all_learnable(true); }
  bool frozen() const;

  std::int64_t weight_scalar_count() const;
  int block_channels(int block_1based) const;
  int total_downsample() const;

 private:
  BackboneConfig cfg_;
  ParamRegistry<T> reg_;
  std::vector<std::vector<ConvGnRelu<T>>> layers_;
};

// Optional per-pixel linear projection (1x1 conv, identity-initialized) on a
// block's features before affinity computation. Disabled instances register
// no parameters and pass features through unchanged.
template <typename T>
struct LinearHead {
  bool enabled = false;
  Conv2dLayer<T> conv;

  static LinearHead make(ParamRegistry<T>& reg, const std::string& name, int channels,
                         bool enabled);
  Tensor<T> forward(const Tensor<T>& x) const;
};

// Trains a temporary linear classifier (spatial mean of block-4 features ->
// categories) through the unfrozen backbone, then re-freezes it. Returns the
// final training accuracy.
template <typename T>
double pretrain_backbone(Backbone<T>& bb,
                         const std::vector<std::pair<Tensor<T>, int>>& dataset,
                         int num_categories, int epochs, T learning_rate, T momentum,
                         std::uint64_t seed);

}  // namespace dam
