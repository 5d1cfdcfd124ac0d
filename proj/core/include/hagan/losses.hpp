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

#include <span>

#include "hagan/tensor.hpp"

namespace hagan {

// Discriminator objective from raw logits:
// -[log s(real) + log(1 - s(fake))], each term averaged over the batch.
template <typename T>
Tensor<T> d_gan_loss(const Tensor<T>& real_logits, const Tensor<T>& fake_logits);

// Generator objective. Non-saturating: -log s(fake). Saturating: log(1 - s(fake)).
template <typename T>
Tensor<T> g_gan_loss(const Tensor<T>& fake_logits, bool saturating = false);

// Auxiliary-classifier cross-entropy of class logits [N,K] against labels.
template <typename T>
Tensor<T> class_loss(const Tensor<T>& logits, std::span<const int> labels);

// Mean absolute error.
template <typename T>
Tensor<T> recon_loss(const Tensor<T>& target, const Tensor<T>& reconstruction);

// Batch of one-hot rows [N, classes].
template <typename T>
Tensor<T> one_hot(std::span<const int> labels, int classes);

}  // namespace hagan
