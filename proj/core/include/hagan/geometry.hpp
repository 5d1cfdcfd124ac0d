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
#include <vector>

#include "hagan/rng.hpp"
#include "hagan/tensor.hpp"

namespace hagan {

// Depth window [start, start + length) on the low-resolution grid. `scale`
// relates it to the high-resolution grid.
struct SliceWindow {
  std::int64_t start = 0;
  std::int64_t length = 0;
  std::int64_t scale = 1;

  std::int64_t high_start() const { return scale * start; }
  std::int64_t high_length() const { return scale * length; }
  bool operator==(const SliceWindow&) const = default;
};

// Depth is axis 2 of [N, C, D, H, W]. Gradients flow into the selected region.
template <typename T>
Tensor<T> select_low(const Tensor<T>& a, const SliceWindow& w);
template <typename T>
Tensor<T> select_high(const Tensor<T>& x, const SliceWindow& w);

// Start drawn uniformly from {0, ..., depth_low - length_low}.
SliceWindow sample_r(std::int64_t depth_low, std::int64_t length_low, std::int64_t scale, Rng& rng);

// Deterministic-r ablation: `count` equally spaced starts visited cyclically
// by `index` (one index per training step).
SliceWindow deterministic_r(std::int64_t index, std::int64_t count, std::int64_t depth_low,
                            std::int64_t length_low, std::int64_t scale);

struct Partition {
  std::vector<std::int64_t> starts;
  std::int64_t length = 0;
};

// V disjoint windows covering [0, depth) in ascending order.
Partition make_partition(std::int64_t depth, std::int64_t parts);

template <typename T>
std::vector<Tensor<T>> partition_volume(const Tensor<T>& x, const Partition& p);

// Depth concatenation of parts taken at `starts` (must be ascending and
// contiguous from 0); inverse of partition_volume.
template <typename T>
Tensor<T> concat_subvolumes(const std::vector<Tensor<T>>& parts,
                            const std::vector<std::int64_t>& starts);

}  // namespace hagan
