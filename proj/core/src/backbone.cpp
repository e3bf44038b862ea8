#include "dam/backbone.hpp"

#include <algorithm>
#include <string>
#include <utility>

namespace dam {

template <typename T>
Backbone<T>::Backbone(const BackboneConfig& cfg) : cfg_(cfg) {
  if (cfg_.blocks.size() != 4) tensor_fail("backbone: config must have exactly 4 blocks");
  Rng rng = Rng(cfg_.seed).fork(0x6261636b626f6eull);  // "backbone"
  int cin = cfg_.in_channels;
  for (size_t b = 0; b < cfg_.blocks.size(); ++b) {
    const auto& spec = cfg_.blocks[b];
    if (spec.layers < 1) tensor_fail("backbone: block needs at least one layer");
    if (spec.downsample != 2) tensor_fail("backbone: only stride-2 downsampling supported");
    std::vector<ConvGnRelu<T>> block;
    for (int l = 0; l < spec.layers; ++l) {
      const std::string name =
          "backbone.block" + std::to_string(b + 1) + ".layer" + std::to_string(l);
      const Stride2 stride = l == 0 ? Stride2{2, 2} : Stride2{1, 1};
      block.push_back(ConvGnRelu<T>::make(reg_, name, cin, spec.channels, 3,
                                          cfg_.groupnorm_groups, rng, stride));
      cin = spec.channels;
    }
    layers_.push_back(std::move(block));
  }
  freeze();
}

template <typename T>
FeaturePyramid<T> Backbone<T>::extract(const Tensor<T>& image) const {
  if (image.rank() != 3 || image.dim(0) != cfg_.in_channels)
    tensor_fail("backbone: expected image [" + std::to_string(cfg_.in_channels) +
                ",H,W], got " + shape_str(image.shape()));
  const int ds = total_downsample();
  if (image.dim(1) % ds != 0 || image.dim(2) % ds != 0)
    tensor_fail("backbone: image dims " + shape_str(image.shape()) +
                " not divisible by " + std::to_string(ds));
  FeaturePyramid<T> pyr;
  Tensor<T> x = image;
  for (const auto& block : layers_) {
    std::vector<Tensor<T>> outs;
    for (const auto& layer : block) {
      x = layer.forward(x);
      outs.push_back(x);
    }
    pyr.blocks.push_back(std::move(outs));
  }
  return pyr;
}

template <typename T>
bool Backbone<T>::frozen() const {
  for (const auto& e : reg_.entries())
    if (e.learnable) return false;
  return true;
}

template <typename T>
std::int64_t Backbone<T>::weight_scalar_count() const {
  std::int64_t n = 0;
  for (const auto& e : reg_.entries()) n += e.tensor.size();
  return n;
}

template <typename T>
int Backbone<T>::block_channels(int block_1based) const {
  return cfg_.blocks[static_cast<size_t>(block_1based - 1)].channels;
}

template <typename T>
int Backbone<T>::total_downsample() const {
  int ds = 1;
  for (const auto& b : cfg_.blocks) ds *= b.downsample;
  return ds;
}

template <typename T>
LinearHead<T> LinearHead<T>::make(ParamRegistry<T>& reg, const std::string& name,
                                  int channels, bool enabled) {
  LinearHead h;
  h.enabled = enabled;
  if (!enabled) return h;
  Tensor<T> w = Tensor<T>::zeros({channels, channels, 1, 1});
  for (int c = 0; c < channels; ++c)
    w.data()[static_cast<size_t>(c) * channels + c] = T(1);
  h.conv.w = reg.add_param(name + ".weight", w);
  h.conv.b = reg.add_param(name + ".bias", Tensor<T>::zeros({channels}));
  h.conv.pad = {0, 0};
  h.conv.stride = {1, 1};
  return h;
}

template <typename T>
Tensor<T> LinearHead<T>::forward(const Tensor<T>& x) const {
  if (!enabled) return x;
  return conv.forward(x);
}

template <typename T>
double pretrain_backbone(Backbone<T>& bb,
                         const std::vector<std::pair<Tensor<T>, int>>& dataset,
                         int num_categories, int epochs, T learning_rate, T momentum,
                         std::uint64_t seed) {
  if (epochs <= 0 || dataset.empty()) return 0.0;
  Rng rng = Rng(seed).fork(0x70726574ull);  // "pret"
  const int feat_ch = bb.block_channels(4);

  ParamRegistry<T> head_reg;
  Tensor<T> cls_w = Tensor<T>::zeros({num_categories, feat_ch});
  he_init(cls_w, rng);
  cls_w = head_reg.add_param("pretrain.classifier.weight", cls_w);
  Tensor<T> cls_b = head_reg.add_param("pretrain.classifier.bias",
                                       Tensor<T>::zeros({num_categories}));

  bb.unfreeze();
  SgdOptimizer<T> opt(learning_rate, momentum);
  auto params = bb.registry().learnable_tensors();
  for (auto& p : head_reg.learnable_tensors()) params.push_back(p);
  opt.attach(std::move(params));

  const size_t n = dataset.size();
  const size_t batch = 8;
  double last_epoch_acc = 0.0;
  for (int ep = 0; ep < epochs; ++ep) {
    // Deterministic shuffle per epoch.
    std::vector<size_t> order(n);
    for (size_t i = 0; i < n; ++i) order[i] = i;
    Rng shuffle_rng = rng.fork(static_cast<std::uint64_t>(ep) + 1);
    for (size_t i = n; i > 1; --i) {
      const size_t j = shuffle_rng.next_below(i);
      std::swap(order[i - 1], order[j]);
    }
    size_t correct = 0;
    for (size_t start = 0; start < n; start += batch) {
      const size_t stop = std::min(n, start + batch);
      Tape<T> tape;
      TapeScope<T> scope(tape);
      std::vector<Tensor<T>> losses;
      for (size_t i = start; i < stop; ++i) {
        const auto& [image, label] = dataset[order[i]];
        FeaturePyramid<T> pyr = bb.extract(image);
        Tensor<T> feat = spatial_mean(pyr.block_output(4));          // [C]
        Tensor<T> col = reshape(feat, {feat_ch, 1});                 // [C,1]
        Tensor<T> logits = reshape(add(matmul(cls_w, col),
                                       reshape(cls_b, {num_categories, 1})),
                                   {num_categories});
        int argmax = 0;
        for (int c = 1; c < num_categories; ++c)
          if (logits.data()[static_cast<size_t>(c)] > logits.data()[static_cast<size_t>(argmax)])
            argmax = c;
        if (argmax == label) ++correct;
        losses.push_back(softmax_cross_entropy(logits, label));
      }
      Tensor<T> loss = mean_tensors(losses);
      opt.zero_grads();
      tape.backward(loss);
      opt.step();
    }
    last_epoch_acc = static_cast<double>(correct) / static_cast<double>(n);
  }
  bb.freeze();
  return last_epoch_acc;
}

template class Backbone<float>;
template class Backbone<double>;
template struct LinearHead<float>;
template struct LinearHead<double>;
template double pretrain_backbone(Backbone<float>&,
                                  const std::vector<std::pair<Tensor<float>, int>>&, int,
                                  int, float, float, std::uint64_t);
template double pretrain_backbone(Backbone<double>&,
                                  const std::vector<std::pair<Tensor<double>, int>>&, int,
                                  int, double, double, std::uint64_t);

}  // namespace dam
