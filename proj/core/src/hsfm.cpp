#include "dam/hsfm.hpp"

#include <string>

namespace dam {

template <typename T>
B3DNetwork<T>::B3DNetwork(ParamRegistry<T>& reg, const std::string& name,
                          const B3DConfig& cfg, Rng& rng)
    : cfg_(cfg) {
  if (cfg.depth_kernel != 1 && cfg.depth_kernel != 3)
    tensor_fail("b3d: depth kernel must be 1 or 3");
  auto make_subnet = [&](int kplane, const std::string& sub) {
    SubNet s;
    s.conv0 = Conv3dLayer<T>::make(reg, name + "." + sub + ".conv0", cfg.in_channels,
                                   cfg.mid_channels, cfg.depth_kernel, kplane, rng);
    s.bn0 = BatchNormLayer<T>::make(reg, name + "." + sub + ".bn0", cfg.mid_channels);
    s.conv1 = Conv3dLayer<T>::make(reg, name + "." + sub + ".conv1", cfg.mid_channels,
                                   cfg.out_channels, cfg.depth_kernel, kplane, rng);
    s.bn1 = BatchNormLayer<T>::make(reg, name + "." + sub + ".bn1", cfg.out_channels);
    return s;
  };
  plane3_ = make_subnet(3, "plane3");
  plane5_ = make_subnet(5, "plane5");
}

template <typename T>
Tensor<T> B3DNetwork<T>::run_volume(const Tensor<T>& volume, NormMode mode) {
  auto run = [&](SubNet& s) {
    Tensor<T> x = relu(s.bn0.forward(s.conv0.forward(volume), mode));
    return relu(s.bn1.forward(s.conv1.forward(x), mode));
  };
  return add(run(plane3_), run(plane5_));
}

template <typename T>
Tensor<T> B3DNetwork<T>::enhance(const Tensor<T>& stack, int h, int w, NormMode mode) {
  if (stack.rank() != 3) tensor_fail("b3d: expected stack [L,Ns,Nq]");
  const int l = stack.dim(0), ns = stack.dim(1), nq = stack.dim(2);
  if (l != cfg_.in_channels)
    tensor_fail("b3d: stack has " + std::to_string(l) + " channels, network expects " +
                std::to_string(cfg_.in_channels));
  if (ns != nq || ns != h * w)
    tensor_fail("b3d: pixel axes " + std::to_string(ns) + "x" + std::to_string(nq) +
                " do not match grid " + std::to_string(h) + "x" + std::to_string(w));
  const int cm = cfg_.out_channels;

  // Branch A: support pixels as depth, query grid as the conv plane.
  Tensor<T> vol_a = reshape(stack, {l, ns, h, w});
  Tensor<T> out_a = reshape(run_volume(vol_a, mode), {cm, ns, nq});

  // Branch B: same network on the transposed stack, transposed back.
  Tensor<T> vol_b = reshape(transpose_last2(stack), {l, nq, h, w});
  Tensor<T> out_b = transpose_last2(reshape(run_volume(vol_b, mode), {cm, nq, ns}));

  return add(out_a, out_b);
}

template <typename T>
Tensor<T> hysteretic_filter(const Tensor<T>& s_enh, const Tensor<T>& m_s) {
  if (s_enh.rank() != 3 || m_s.rank() != 1 || m_s.dim(0) != s_enh.dim(1))
    tensor_fail("hysteretic_filter: got affinity " + shape_str(s_enh.shape()) +
                " and mask " + shape_str(m_s.shape()));
  const int c = s_enh.dim(0), p = s_enh.dim(1), q = s_enh.dim(2);
  Tensor<T> out = Tensor<T>::zeros({c, q});
  {
    const T* ps = s_enh.data().data();
    const T* pm = m_s.data().data();
    T* po = out.data().data();
    for (int ch = 0; ch < c; ++ch)
      for (int pp = 0; pp < p; ++pp) {
        const T mv = pm[pp];
        if (mv == T(0)) continue;
        const T* srow = ps + (static_cast<size_t>(ch) * p + pp) * q;
        T* orow = po + static_cast<size_t>(ch) * q;
        for (int qq = 0; qq < q; ++qq) orow[qq] += mv * srow[qq];
      }
  }
  if (Tape<T>::active() && (s_enh.requires_grad() || m_s.requires_grad())) {
    out.set_requires_grad(true);
    Tape<T>::active()->record("hysteretic_filter", {s_enh.id(), m_s.id()}, {out},
                              [s_enh, m_s, out]() {
      const int c = s_enh.dim(0), p = s_enh.dim(1), q = s_enh.dim(2);
      auto g = out.grad();
      const T* ps = s_enh.data().data();
      const T* pm = m_s.data().data();
      if (s_enh.requires_grad()) {
        auto ds = s_enh.grad();
        for (int ch = 0; ch < c; ++ch)
          for (int pp = 0; pp < p; ++pp) {
            const T mv = pm[pp];
            const T* grow = g.data() + static_cast<size_t>(ch) * q;
            T* drow = ds.data() + (static_cast<size_t>(ch) * p + pp) * q;
            for (int qq = 0; qq < q; ++qq) drow[qq] += mv * grow[qq];
          }
      }
      if (m_s.requires_grad()) {
        auto dm = m_s.grad();
        for (int ch = 0; ch < c; ++ch)
          for (int pp = 0; pp < p; ++pp) {
            const T* srow = ps + (static_cast<size_t>(ch) * p + pp) * q;
            const T* grow = g.data() + static_cast<size_t>(ch) * q;
            T acc = 0;
            for (int qq = 0; qq < q; ++qq) acc += srow[qq] * grow[qq];
            dm[pp] += acc;
          }
      }
    });
  }
  return out;
}

template <typename T>
CoarseMask<T> hsfm_forward(const std::vector<AffinityStack<T>>& stacks,
                           const std::vector<Tensor<T>>& masks, B3DNetwork<T>& net,
                           KShotFusion fusion, NormMode mode) {
  if (stacks.empty() || stacks.size() != masks.size())
    tensor_fail("hsfm: need K >= 1 stacks with matching masks");
  const int block = stacks[0].block, h = stacks[0].h, w = stacks[0].w;
  for (const auto& s : stacks)
    if (s.block != block || s.h != h || s.w != w)
      tensor_fail("hsfm: mixed-block stacks");

  CoarseMask<T> cm;
  cm.block = block;
  if (fusion == KShotFusion::kMean) {
    std::vector<Tensor<T>> per_shot;
    per_shot.reserve(stacks.size());
    for (size_t k = 0; k < stacks.size(); ++k) {
      Tensor<T> enh = net.enhance(stacks[k].data, h, w, mode);
      Tensor<T> filt = hysteretic_filter(enh, masks[k]);
      per_shot.push_back(reshape(filt, {net.config().out_channels, h, w}));
    }
    cm.data = per_shot.size() == 1 ? per_shot[0] : mean_tensors(per_shot);
  } else {
    std::vector<Tensor<T>> datas;
    for (const auto& s : stacks) datas.push_back(s.data);
    Tensor<T> joined = datas.size() == 1 ? datas[0] : concat(datas, 0);
    Tensor<T> enh = net.enhance(joined, h, w, mode);
    Tensor<T> mean_mask = masks.size() == 1 ? masks[0] : mean_tensors(masks);
    cm.data = reshape(hysteretic_filter(enh, mean_mask),
                      {net.config().out_channels, h, w});
  }
  return cm;
}

#define DAM_INSTANTIATE_HSFM(T)                                                        \
  template class B3DNetwork<T>;                                                        \
  template Tensor<T> hysteretic_filter(const Tensor<T>&, const Tensor<T>&);            \
  template CoarseMask<T> hsfm_forward(const std::vector<AffinityStack<T>>&,            \
                                      const std::vector<Tensor<T>>&, B3DNetwork<T>&,   \
                                      KShotFusion, NormMode);

DAM_INSTANTIATE_HSFM(float)
DAM_INSTANTIATE_HSFM(double)

#undef DAM_INSTANTIATE_HSFM

}  // namespace dam
