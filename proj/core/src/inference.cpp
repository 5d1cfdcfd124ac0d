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

#include "hagan/inference.hpp"

#include "hagan/errors.hpp"
#include "hagan/losses.hpp"
#include "hagan/ops.hpp"

namespace hagan {
namespace {

template <typename T>
void check_latent(const Trainer<T>& model, const Tensor<T>& z) {
  const auto& net = model.config().net;
  const auto width = net.latent_dim + net.num_classes;
  if (z.ndim() != 2 || z.dim(1) != width) {
    throw ShapeError("latent rows must be [N, " + std::to_string(width) + "], got " + shape_str(z.shape()));
  }
}

}  // namespace

template <typename T>
Tensor<T> generate_full(Trainer<T>& model, const Tensor<T>& z, Tensor<T>* low) {
  check_latent(model, z);
  const auto a = model.g_a().forward(z.detach());
  if (low) *low = model.g_l().forward(a);
  return model.g_h().forward(a);
}

template <typename T>
Tensor<T> encode_full(Trainer<T>& model, const Tensor<T>& x_high) {
  return model.encode(x_high.detach());
}

template <typename T>
Tensor<T> reconstruct(Trainer<T>& model, const Tensor<T>& x_high, const std::vector<int>& labels) {
  auto z = encode_full(model, x_high);
  const auto& net = model.config().net;
  if (net.conditional()) {
    if (static_cast<std::int64_t>(labels.size()) != x_high.dim(0)) {
      throw ConfigError("conditional reconstruction needs one label per volume");
    }
    z = concat<T>({z, one_hot<T>(labels, static_cast<int>(net.num_classes))}, 1);
  }
  return generate_full(model, z);
}

template <typename T>
std::vector<Tensor<T>> interpolate(Trainer<T>& model, const Tensor<T>& z_a, const Tensor<T>& z_b, int steps) {
  if (steps < 1) throw ConfigError("interpolate needs at least one step");
  if (z_a.shape() != z_b.shape()) throw ShapeError("interpolation endpoints differ in shape");
  std::vector<Tensor<T>> out;
  for (int i = 0; i < steps; ++i) {
    const double t = steps == 1 ? 0.0 : static_cast<double>(i) / (steps - 1);
    auto z = Tensor<T>::zeros(z_a.shape());
    const auto a = z_a.values();
    const auto b = z_b.values();
    auto v = z.values();
    // Endpoints are copied exactly rather than formed by the blend.
    for (std::size_t k = 0; k < v.size(); ++k) {
      v[k] = i == 0 ? a[k] : i == steps - 1 ? b[k] : static_cast<T>(a[k] + t * (b[k] - a[k]));
    }
    out.push_back(generate_full(model, z));
  }
  return out;
}

#define HAGAN_INSTANTIATE(T)                                                                   \
  template Tensor<T> generate_full<T>(Trainer<T>&, const Tensor<T>&, Tensor<T>*);              \
  template Tensor<T> encode_full<T>(Trainer<T>&, const Tensor<T>&);                            \
  template Tensor<T> reconstruct<T>(Trainer<T>&, const Tensor<T>&, const std::vector<int>&);   \
  template std::vector<Tensor<T>> interpolate<T>(Trainer<T>&, const Tensor<T>&, const Tensor<T>&, int);
HAGAN_INSTANTIATE(float)
HAGAN_INSTANTIATE(double)
#undef HAGAN_INSTANTIATE

}  // namespace hagan
