#pragma once

#include <string>

#include "dam/ops.hpp"
#include "dam/params.hpp"
#include "dam/rng.hpp"

namespace dam {

// Thin parameterized wrappers over the primitive ops. Construction registers
// the tensors; forward applies them.

template <typename T>
struct Conv2dLayer {
  Tensor<T> w;  // [Co,Ci,k,k]
  Tensor<T> b;  // [Co]
  Pad2 pad;
  Stride2 stride;

  static Conv2dLayer make(ParamRegistry<T>& reg, const std::string& name, int cin,
                          int cout, int k, Rng& rng, Stride2 stride = {}) {
    Conv2dLayer l;
    l.w = Tensor<T>::zeros({cout, cin, k, k});
    he_init(l.w, rng);
    l.b = Tensor<T>::zeros({cout});
    l.pad = {same_padding(k), same_padding(k)};
    l.stride = stride;
    l.w = reg.add_param(name + ".weight", l.w);
    l.b = reg.add_param(name + ".bias", l.b);
    return l;
  }

  Tensor<T> forward(const Tensor<T>& x) const { return conv2d(x, w, b, pad, stride); }
};

template <typename T>
struct Conv3dLayer {
  Tensor<T> w;  // [Co,Ci,kd,kp,kp]
  Tensor<T> b;
  Pad3 pad;

  static Conv3dLayer make(ParamRegistry<T>& reg, const std::string& name, int cin,
                          int cout, int kd, int kplane, Rng& rng) {
    Conv3dLayer l;
    l.w = Tensor<T>::zeros({cout, cin, kd, kplane, kplane});
    he_init(l.w, rng);
    l.b = Tensor<T>::zeros({cout});
    l.pad = {same_padding(kd), same_padding(kplane), same_padding(kplane)};
    l.w = reg.add_param(name + ".weight", l.w);
    l.b = reg.add_param(name + ".bias", l.b);
    return l;
  }

  Tensor<T> forward(const Tensor<T>& x) const { return conv3d(x, w, b, pad); }
};

template <typename T>
struct GroupNormLayer {
  Tensor<T> gamma;
  Tensor<T> beta;
  int groups = 1;

  static GroupNormLayer make(ParamRegistry<T>& reg, const std::string& name,
                             int channels, int groups) {
    GroupNormLayer l;
    l.gamma = reg.add_param(name + ".gamma", Tensor<T>::full({channels}, T(1)));
    l.beta = reg.add_param(name + ".beta", Tensor<T>::zeros({channels}));
    l.groups = groups;
    return l;
  }

  Tensor<T> forward(const Tensor<T>& x) const { return groupnorm(x, groups, gamma, beta); }
};

template <typename T>
struct BatchNormLayer {
  Tensor<T> gamma;
  Tensor<T> beta;
  BatchNormState<T> state;

  static BatchNormLayer make(ParamRegistry<T>& reg, const std::string& name,
                             int channels) {
    BatchNormLayer l;
    l.gamma = reg.add_param(name + ".gamma", Tensor<T>::full({channels}, T(1)));
    l.beta = reg.add_param(name + ".beta", Tensor<T>::zeros({channels}));
    l.state = BatchNormState<T>::make(channels);
    l.state.running_mean = reg.add_buffer(name + ".running_mean", l.state.running_mean);
    l.state.running_var = reg.add_buffer(name + ".running_var", l.state.running_var);
    return l;
  }

  Tensor<T> forward(const Tensor<T>& x, NormMode mode) {
    return batchnorm(x, gamma, beta, state, mode);
  }
};

// conv -> groupnorm -> relu, the decoder's "conv block".
template <typename T>
struct ConvGnRelu {
  Conv2dLayer<T> conv;
  GroupNormLayer<T> gn;

  static ConvGnRelu make(ParamRegistry<T>& reg, const std::string& name, int cin,
                         int cout, int k, int gn_groups, Rng& rng,
                         Stride2 stride = {}) {
    ConvGnRelu l;
    l.conv = Conv2dLayer<T>::make(reg, name + ".conv", cin, cout, k, rng, stride);
    l.gn = GroupNormLayer<T>::make(reg, name + ".gn", cout, gn_groups);
    return l;
  }

  Tensor<T> forward(const Tensor<T>& x) const {
    return relu(gn.forward(conv.forward(x)));
  }
};

}  // namespace dam
