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

#include "hagan/volume.hpp"

namespace hagan {

inline constexpr int kPhantomClasses = 5;

// Synthetic CT-like volume: a textured body ellipsoid, an inner organ
// ellipsoid whose size follows a continuous factor, and dark lesion spheres
// inside the organ whose count and size grow with the class label.
struct Phantom {
  std::uint64_t seed = 0;
  int label = 0;
  double organ_factor = 0.0;  // in [0.55, 1]; organ radii scale with it
  Volume volume;
  // Masks are kept only on request (one byte per voxel each).
  std::vector<std::uint8_t> body_mask, organ_mask, lesion_mask;
  std::int64_t body_voxels = 0, organ_voxels = 0, lesion_voxels = 0;

  double lesion_fraction() const {
    return static_cast<double>(lesion_voxels) / static_cast<double>(volume.size());
  }
};

Phantom phantom_generate(std::uint64_t seed, int label, std::int64_t extent, bool keep_masks = false);

// Class label drawn from the phantom class prior for a seed.
int phantom_label(std::uint64_t seed);

struct PhantomSet {
  std::vector<Phantom> train;
  std::vector<Phantom> test;
};

// Seeds base_seed .. base_seed+count-1; the first round(train_fraction*count)
// form the training split, the rest are held out.
PhantomSet make_phantom_set(int count, std::uint64_t base_seed, std::int64_t extent,
                            double train_fraction = 0.8);

}  // namespace hagan
