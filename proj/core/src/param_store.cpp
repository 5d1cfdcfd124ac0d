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

#include "hagan/param_store.hpp"

#include <cmath>
#include <cstring>

#include "hagan/errors.hpp"

namespace hagan {

bool has_prefix(const std::string& name, const std::string& prefix) {
  return name.compare(0, prefix.size(), prefix) == 0;
}

template <typename T>
Tensor<T>& ParamStore<T>::create(const std::string& name, const Shape& shape, bool trainable) {
  if (contains(name)) throw ConfigError("duplicate parameter name: " + name);
  ParamEntry<T> e;
  e.value = Tensor<T>::zeros(shape, MemTag::kParameter);
  e.trainable = trainable;
  if (trainable) {
    e.m = Tensor<T>::zeros(shape, MemTag::kOptimizer);
    e.v = Tensor<T>::zeros(shape, MemTag::kOptimizer);
  }
  return entries_.emplace(name, std::move(e)).first->second.value;
}

template <typename T>
ParamEntry<T>& ParamStore<T>::entry(const std::string& name) {
  auto it = entries_.find(name);
  if (it == entries_.end()) throw ConfigError("unknown parameter: " + name);
  return it->second;
}

template <typename T>
const ParamEntry<T>& ParamStore<T>::entry(const std::string& name) const {
  auto it = entries_.find(name);
  if (it == entries_.end()) throw ConfigError("unknown parameter: " + name);
  return it->second;
}

template <typename T>
Tensor<T>& ParamStore<T>::at(const std::string& name) {
  return entry(name).value;
}

template <typename T>
const Tensor<T>& ParamStore<T>::at(const std::string& name) const {
  return entry(name).value;
}

template <typename T>
std::vector<std::string> ParamStore<T>::names(const std::string& prefix, bool trainable_only) const {
  std::vector<std::string> out;
  for (const auto& [name, e] : entries_) {
    if (has_prefix(name, prefix) && (!trainable_only || e.trainable)) out.push_back(name);
  }
  return out;
}

template <typename T>
void ParamStore<T>::set_requires_grad(const std::string& prefix, bool on) {
  for (auto& [name, e] : entries_) {
    if (e.trainable && has_prefix(name, prefix)) e.value.set_requires_grad(on);
  }
}

template <typename T>
void ParamStore<T>::clear_grads(const std::string& prefix) {
  for (auto& [name, e] : entries_) {
    if (has_prefix(name, prefix)) e.value.clear_grad();
  }
}

template <typename T>
std::int64_t ParamStore<T>::count(const std::string& prefix) const {
  std::int64_t n = 0;
  for (const auto& [name, e] : entries_) {
    if (e.trainable && has_prefix(name, prefix)) n += e.value.numel();
  }
  return n;
}

template <typename T>
std::uint64_t ParamStore<T>::hash(const std::string& prefix) const {
  std::uint64_t h = 1469598103934665603ULL;
  auto mix = [&h](const void* p, std::size_t n) {
    const auto* b = static_cast<const unsigned char*>(p);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= b[i];
      h *= 1099511628211ULL;
    }
  };
  for (const auto& [name, e] : entries_) {
    if (!has_prefix(name, prefix)) continue;
    mix(name.data(), name.size());
    mix(e.value.data(), static_cast<std::size_t>(e.value.numel()) * sizeof(T));
  }
  return h;
}

template <typename T>
void adam_step(ParamStore<T>& store, const std::string& prefix, const AdamConfig& cfg) {
  for (auto& [name, e] : store.entries()) {
    if (!e.trainable || !has_prefix(name, prefix)) continue;
    if (!e.value.has_grad()) throw AutodiffError("missing gradient for trainable parameter " + name);
    ++e.step;
    const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(e.step));
    const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(e.step));
    T* p = e.value.data();
    T* m = e.m.data();
    T* v = e.v.data();
    const auto g = e.value.grad();
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double gi = g[i];
      const double mi = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * gi;
      const double vi = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * gi * gi;
      m[i] = static_cast<T>(mi);
      v[i] = static_cast<T>(vi);
      p[i] = static_cast<T>(p[i] - cfg.lr * (mi / c1) / (std::sqrt(vi / c2) + cfg.eps));
    }
  }
}

template class ParamStore<float>;
template class ParamStore<double>;
template void adam_step<float>(ParamStore<float>&, const std::string&, const AdamConfig&);
template void adam_step<double>(ParamStore<double>&, const std::string&, const AdamConfig&);

}  // namespace hagan
