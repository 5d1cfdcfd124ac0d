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
#include <string>
#include <vector>

#include "hagan/metrics.hpp"
#include "hagan/tensor.hpp"
#include "hagan/volume.hpp"

namespace hagan {

// Frozen random-weight feature extractor for distribution metrics: stride-2
// 4^3 convolutions with ReLU (He-normal weights drawn from `seed`, zero bias)
// down to a 4^3 grid; the feature vector concatenates the global average of
// every stage. Only volumes of the configured extent are accepted.
class FeatureExtractor {
 public:
  FeatureExtractor(std::uint64_t seed, std::int64_t extent);

  std::uint64_t seed() const { return seed_; }
  std::int64_t extent() const { return extent_; }
  std::int64_t feature_dim() const;
  // "rand3d-s<seed>-e<extent>-<hash of weights>".
  const std::string& fingerprint() const { return fingerprint_; }

  std::vector<double> features(const Volume& v) const;
  FeatureSet extract(const std::vector<Volume>& volumes) const;
  FeatureSet extract(const std::vector<const Volume*>& volumes) const;

 private:
  std::uint64_t seed_;
  std::int64_t extent_;
  std::vector<Tensor<float>> weights_;
  std::string fingerprint_;
};

}  // namespace hagan
