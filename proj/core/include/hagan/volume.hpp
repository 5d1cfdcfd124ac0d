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

#include "hagan/tensor.hpp"

namespace hagan {

// Dense scalar grid [D, H, W] with intensities in [-1, 1].
struct Volume {
  std::int64_t d = 0, h = 0, w = 0;
  std::vector<float> data;

  static Volume filled(std::int64_t d, std::int64_t h, std::int64_t w, float value = -1.0f);
  std::int64_t size() const { return d * h * w; }
  float& at(std::int64_t z, std::int64_t y, std::int64_t x) { return data[static_cast<std::size_t>((z * h + y) * w + x)]; }
  float at(std::int64_t z, std::int64_t y, std::int64_t x) const {
    return data[static_cast<std::size_t>((z * h + y) * w + x)];
  }
  bool same_extents(const Volume& o) const { return d == o.d && h == o.h && w == o.w; }
};

// Stacks volumes of equal extents into [N, 1, D, H, W].
template <typename T>
Tensor<T> to_batch(const std::vector<const Volume*>& volumes, MemTag tag = MemTag::kData);
template <typename T>
Tensor<T> to_batch(const Volume& volume, MemTag tag = MemTag::kData) {
  return to_batch<T>(std::vector<const Volume*>{&volume}, tag);
}
// Item `n` of a [N, 1, D, H, W] tensor.
template <typename T>
Volume from_batch(const Tensor<T>& batch, std::int64_t n = 0);

// Volume file: "HAGV", u16 version, 3 x u32 extents, u8 dtype tag, float32
// little-endian payload, u32 CRC-32 of everything before it.
void write_volume(const std::string& path, const Volume& v);
Volume read_volume(const std::string& path);
std::vector<std::uint8_t> encode_volume(const Volume& v);
Volume decode_volume(const std::vector<std::uint8_t>& bytes);

// Sorted *.hagv paths in a directory.
std::vector<std::string> list_volumes(const std::string& dir);

}  // namespace hagan
