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

#include "hagan/losses.hpp"

#include "hagan/errors.hpp"
#include "hagan/ops.hpp"

namespace hagan {

template <typename T>
Tensor<T> d_gan_loss(const Tensor<T>& real_logits, const Tensor<T>& fake_logits) {
  return add(bce_with_logits(real_logits, 1.0), bce_with_logits(fake_logits, 0.0));
}

template <typename T>
Tensor<T> g_gan_loss(const Tensor<T>& fake_logits, bool saturating) {
  if (saturating) return scale(bce_with_logits(fake_logits, 0.0), -1.0);
  return bce_with_logits(fake_logits, 1.0);
}

template <typename T>
Tensor<T> class_loss(const Tensor<T>& logits, std::span<const int> labels) {
  return cross_entropy(logits, labels);
}

template <typename T>
Tensor<T> recon_loss(const Tensor<T>& target, const Tensor<T>& reconstruction) {
  return l1_loss(reconstruction, target);
}

template <typename T>
Tensor<T> one_hot(std::span<const int> labels, int classes) {
  auto t = Tensor<T>::zeros({static_cast<std::int64_t>(labels.size()), classes});
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || labels[i] >= classes) throw ShapeError("class index out of range");
    t.data()[static_cast<std::int64_t>(i) * classes + labels[i]] = T(1);
  }
  return t;
}

#define HAGAN_INSTANTIATE(T)                                                   \
  template Tensor<T> d_gan_loss(const Tensor<T>&, const Tensor<T>&);          \
  template Tensor<T> g_gan_loss(const Tensor<T>&, bool);                      \
  template Tensor<T> class_loss(const Tensor<T>&, std::span<const int>);      \
  template Tensor<T> recon_loss(const Tensor<T>&, const Tensor<T>&);          \
  template Tensor<T> one_hot(std::span<const int>, int);
HAGAN_INSTANTIATE(float)
HAGAN_INSTANTIATE(double)
#undef HAGAN_INSTANTIATE

}  // namespace hagan
