// Copyright 2026 The hagan3d Authors. All rights reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cmath>

#include "hagan/geometry.hpp"
#include "hagan/param_store.hpp"
#include "testkit.hpp"

namespace hagan::testkit {
namespace {

// Compares window outputs of `net` with crops of its full-depth output.
// `scale` maps input depth to output depth.
ConsistencyResult compare_windows(Network<float>& net, const Tensor<float>& full_in, std::int64_t len,
                                  std::int64_t scale, std::int64_t margin) {
  ConsistencyResult r;
  const auto depth = full_in.dim(2);
  const auto full = net.forward(full_in);
  for (std::int64_t start = 0; start + len <= depth; ++start) {
    const SliceWindow w{start, len, scale};
    const auto sub = net.forward(select_low(full_in, w));
    const auto crop = select_high(full, w);
    const auto plane = crop.numel() / (crop.dim(0) * crop.dim(1) * crop.dim(2));
    const auto out_len = crop.dim(2);
    const std::int64_t lo = start == 0 ? 0 : margin * scale;
    const std::int64_t hi = start + len == depth ? out_len : (len - margin) * scale;
    for (std::int64_t nc = 0; nc < crop.dim(0) * crop.dim(1); ++nc) {
      for (std::int64_t z = lo; z < hi; ++z) {
        for (std::int64_t i = 0; i < plane; ++i) {
          const auto k = static_cast<std::size_t>((nc * out_len + z) * plane + i);
          r.max_diff = std::max(r.max_diff, static_cast<double>(std::abs(sub.values()[k] - crop.values()[k])));
          ++r.compared;
        }
      }
    }
    ++r.windows;
  }
  return r;
}

void randomise_nonzero(ParamStore<float>& store, Rng& rng) {
  // Zero-initialised heads would make the comparison vacuous.
  for (auto& [name, e] : store.entries()) {
    if (!e.trainable) continue;
    bool zero = true;
    for (float v : e.value.values()) zero = zero && v == 0.0f;
    if (zero) {
      for (auto& v : e.value.values()) v = static_cast<float>(0.1 * rng.normal());
    }
  }
}

}  // namespace

ConsistencyResult gh_window_consistency(const NetConfig& cfg, std::uint64_t seed, std::int64_t margin) {
  ParamStore<float> store;
  Network<float> gh(build_g_h(cfg), store);
  Rng rng(seed);
  gh.init_params(rng);
  randomise_nonzero(store, rng);
  const auto lo = cfg.low_resolution;
  auto a = Tensor<float>::zeros({1, cfg.feature_channels, lo, lo, lo});
  for (auto& v : a.values()) v = static_cast<float>(rng.normal());
  return compare_windows(gh, a, cfg.subvol_depth_low(), 4, margin);
}

ConsistencyResult sr_window_consistency(const SRConfig& cfg, std::uint64_t seed, std::int64_t margin) {
  ParamStore<float> store;
  Network<float> g(build_sr_generator(cfg), store);
  Rng rng(seed);
  g.init_params(rng);
  randomise_nonzero(store, rng);
  const auto lo = cfg.lr_resolution();
  auto x = Tensor<float>::zeros({1, 1, lo, lo, lo});
  for (auto& v : x.values()) v = static_cast<float>(std::tanh(rng.normal()));
  return compare_windows(g, x, cfg.subvol_len(), cfg.sr_factor, margin);
}

}  // namespace hagan::testkit
