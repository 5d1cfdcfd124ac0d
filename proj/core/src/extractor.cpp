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

#include "hagan/extractor.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>

#include "hagan/errors.hpp"
#include "hagan/ops.hpp"
#include "hagan/rng.hpp"

namespace hagan {
namespace {
constexpr std::int64_t kWidths[] = {8, 16, 32, 64, 64, 64};
}  // namespace

FeatureExtractor::FeatureExtractor(std::uint64_t seed, std::int64_t extent) : seed_(seed), extent_(extent) {
  if (extent < 8 || (extent & (extent - 1)) != 0) throw ConfigError("extractor extent must be a power of two >= 8");
  Rng rng(seed);
  std::int64_t in = 1;
  std::uint64_t h = 1469598103934665603ull;
  for (std::int64_t e = extent, i = 0; e > 4; e /= 2, ++i) {
    const auto out = kWidths[std::min<std::int64_t>(i, std::size(kWidths) - 1)];
    const double std = std::sqrt(2.0 / static_cast<double>(in * 64));
    auto w = Tensor<float>::zeros({out, in, 4, 4, 4}, MemTag::kParameter);
    for (auto& v : w.values()) {
      v = static_cast<float>(std * rng.normal());
      std::uint32_t bits;
      std::memcpy(&bits, &v, 4);
      h = (h ^ bits) * 1099511628211ull;
    }
    weights_.push_back(w);
    in = out;
  }
  char hex[17];
  std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(h));
  fingerprint_ = "rand3d-s" + std::to_string(seed) + "-e" + std::to_string(extent) + "-" + hex;
}

std::int64_t FeatureExtractor::feature_dim() const {
  std::int64_t n = 0;
  for (const auto& w : weights_) n += w.dim(0);
  return n;
}

std::vector<double> FeatureExtractor::features(const Volume& v) const {
  if (v.d != extent_ || v.h != extent_ || v.w != extent_) {
    throw ShapeError("extractor " + fingerprint_ + " expects " + std::to_string(extent_) + "^3 volumes");
  }
  auto x = to_batch<float>(v, MemTag::kActivation);
  std::vector<double> f;
  for (const auto& w : weights_) {
    x = relu(conv3d(x, w, Tensor<float>(), {2, 2, 2}, {1, 1, 1}));
    const auto pooled = global_avg_pool(x);
    for (auto p : pooled.values()) f.push_back(p);
  }
  return f;
}

FeatureSet FeatureExtractor::extract(const std::vector<const Volume*>& volumes) const {
  FeatureSet out;
  out.fingerprint = fingerprint_;
  out.features.resize(static_cast<Eigen::Index>(volumes.size()), feature_dim());
  for (std::size_t i = 0; i < volumes.size(); ++i) {
    const auto f = features(*volumes[i]);
    for (std::size_t j = 0; j < f.size(); ++j) out.features(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = f[j];
  }
  return out;
}

FeatureSet FeatureExtractor::extract(const std::vector<Volume>& volumes) const {
  std::vector<const Volume*> ptrs;
  for (const auto& v : volumes) ptrs.push_back(&v);
  return extract(ptrs);
}

}  // namespace hagan
