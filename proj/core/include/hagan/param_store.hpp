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

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "hagan/tensor.hpp"

namespace hagan {

template <typename T>
struct ParamEntry {
  Tensor<T> value;
  // Buffers (spectral-norm vectors, running statistics) are stored and
  // checkpointed with the parameters but never optimised.
  bool trainable = true;
  Tensor<T> m, v;  // Adam moments, trainable entries only
  std::int64_t step = 0;
};

// Named parameters and buffers, keyed by hierarchical names such as
// "g_a/conv2/weight". Iteration order is lexicographic.
template <typename T>
class ParamStore {
 public:
  Tensor<T>& create(const std::string& name, const Shape& shape, bool trainable = true);

  bool contains(const std::string& name) const { return entries_.count(name) != 0; }
  Tensor<T>& at(const std::string& name);
  const Tensor<T>& at(const std::string& name) const;
  ParamEntry<T>& entry(const std::string& name);
  const ParamEntry<T>& entry(const std::string& name) const;

  std::vector<std::string> names(const std::string& prefix = "", bool trainable_only = false) const;

  // Enables or disables gradient recording for trainable entries under `prefix`.
  void set_requires_grad(const std::string& prefix, bool on);
  // Releases gradient buffers under `prefix`.
  void clear_grads(const std::string& prefix = "");

  // Number of trainable scalars under `prefix`.
  std::int64_t count(const std::string& prefix = "") const;
  // FNV-1a over names and value bytes of every entry under `prefix`.
  std::uint64_t hash(const std::string& prefix = "") const;

  std::map<std::string, ParamEntry<T>>& entries() { return entries_; }
  const std::map<std::string, ParamEntry<T>>& entries() const { return entries_; }

 private:
  std::map<std::string, ParamEntry<T>> entries_;
};

struct AdamConfig {
  double lr = 1e-4;
  double beta1 = 0.0;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Bias-corrected Adam update of every trainable entry under `prefix`. Throws
// AutodiffError when one of them has no gradient. Gradients are left in place.
template <typename T>
void adam_step(ParamStore<T>& store, const std::string& prefix, const AdamConfig& cfg);

bool has_prefix(const std::string& name, const std::string& prefix);

extern template class ParamStore<float>;
extern template class ParamStore<double>;

}  // namespace hagan
