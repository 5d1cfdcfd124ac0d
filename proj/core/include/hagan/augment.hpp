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
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "hagan/networks.hpp"
#include "hagan/param_store.hpp"
#include "hagan/rng.hpp"
#include "hagan/volume.hpp"

namespace hagan {

// The 3D CNN classifier (batch-norm + ELU conv stack, average pool, dense).
class Classifier {
 public:
  Classifier(std::int64_t resolution, int classes, std::uint64_t seed);

  // Adam on the cross-entropy of random mini-batches.
  void train(const std::vector<Volume>& volumes, const std::vector<int>& labels, int steps, int batch, double lr);
  std::vector<int> predict(const std::vector<Volume>& volumes);
  double accuracy(const std::vector<Volume>& volumes, const std::vector<int>& labels);

  ParamStore<float>& store() { return store_; }

 private:
  std::int64_t resolution_;
  int classes_;
  ParamStore<float> store_;
  Rng rng_;
  std::unique_ptr<Network<float>> net_;
};

struct AugmentConfig {
  std::int64_t resolution = 32;  // classifier input extent
  int steps = 700;
  int batch = 8;
  double lr = 1e-3;
  std::uint64_t seed = 0;
  double synthetic_fraction = 0.2;  // share of synthetic volumes in the augmented set
};

struct AugmentRow {
  std::string name;
  double accuracy = 0.0;
  int train_size = 0;
};

struct AugmentResult {
  std::vector<AugmentRow> rows;  // baseline, augmented
  std::vector<int> real_counts, synthetic_counts;
  std::string table() const;
};

// Per-class synthetic counts for `total` samples following the real class
// proportions (largest remainder, so each is within one sample of exact).
std::vector<int> proportional_counts(const std::vector<int>& real_counts, int total);

// Generates `count` volumes of class `label` at any extent.
using ClassSampler = std::function<std::vector<Volume>(int label, int count)>;

// Trains the classifier on the real set alone and on the real set plus a
// class-matched synthetic share, each from the same seed, and reports held-out
// accuracy for both.
AugmentResult augment_study(const AugmentConfig& cfg, const std::vector<Volume>& train,
                            const std::vector<int>& train_labels, const std::vector<Volume>& test,
                            const std::vector<int>& test_labels, int classes, const ClassSampler& sampler);

// Trilinear resampling of a cubic volume to `extent`.
Volume resample(const Volume& v, std::int64_t extent);

}  // namespace hagan
