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

#pragma once

#include <vector>

#include "hagan/trainer.hpp"

namespace hagan {

// Inference-time paths over a trained (or freshly initialised) model. None of
// them records onto a tape or allocates gradient buffers.

// X̂^H = G^H(G^A(z)) for latent rows z [N, latent_dim (+classes)]; also
// X̂^L = G^L(G^A(z)) into `low` when given.
template <typename T>
Tensor<T> generate_full(Trainer<T>& model, const Tensor<T>& z, Tensor<T>* low = nullptr);

// Ẑ = E^G(concat_v E^H(S^H(X^H; T_v))); depth must split into windows of the
// training sub-volume length.
template <typename T>
Tensor<T> encode_full(Trainer<T>& model, const Tensor<T>& x_high);

// generate_full(encode_full(x)); the one-hot class rows are appended for a
// conditional model.
template <typename T>
Tensor<T> reconstruct(Trainer<T>& model, const Tensor<T>& x_high, const std::vector<int>& labels = {});

// Volumes at z_a + t (z_b - z_a) for `steps` evenly spaced t in [0, 1].
template <typename T>
std::vector<Tensor<T>> interpolate(Trainer<T>& model, const Tensor<T>& z_a, const Tensor<T>& z_b, int steps);

}  // namespace hagan
