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

#include "hagan/geometry.hpp"

#include <string>

#include "hagan/errors.hpp"
#include "hagan/ops.hpp"

namespace hagan {
namespace {

template <typename T>
Tensor<T> select_depth(const Tensor<T>& x, std::int64_t start, std::int64_t length) {
  if (x.ndim() != 5) throw ShapeError("selector expects [N,C,D,H,W], got " + shape_str(x.shape()));
  if (start < 0 || length <= 0 || start + length > x.dim(2)) {
    throw ShapeError("window [" + std::to_string(start) + ", " + std::to_string(start + length) +
                     ") outside depth " + std::to_string(x.dim(2)));
  }
  return slice(x, 2, start, length);
}

}  // namespace

template <typename T>
Tensor<T> select_low(const Tensor<T>& a, const SliceWindow& w) {
  return select_depth(a, w.start, w.length);
}

template <typename T>
Tensor<T> select_high(const Tensor<T>& x, const SliceWindow& w) {
  return select_depth(x, w.high_start(), w.high_length());
}

SliceWindow sample_r(std::int64_t depth_low, std::int64_t length_low, std::int64_t scale, Rng& rng) {
  if (length_low <= 0 || length_low > depth_low) throw ConfigError("window longer than the depth");
  return SliceWindow{rng.uniform_int(0, depth_low - length_low), length_low, scale};
}

SliceWindow deterministic_r(std::int64_t index, std::int64_t count, std::int64_t depth_low,
                            std::int64_t length_low, std::int64_t scale) {
  if (length_low <= 0 || length_low > depth_low) throw ConfigError("window longer than the depth");
  if (count <= 0) throw ConfigError("deterministic r needs at least one position");
  const auto span = depth_low - length_low;
  const auto k = index % count;
  const auto start = count == 1 ? 0 : (k * span) / (count - 1);
  return SliceWindow{start, length_low, scale};
}

Partition make_partition(std::int64_t depth, std::int64_t parts) {
  if (parts <= 0 || depth % parts != 0) {
    throw ConfigError("depth " + std::to_string(depth) + " is not divisible into " +
                      std::to_string(parts) + " windows");
  }
  Partition p;
  p.length = depth / parts;
  for (std::int64_t v = 0; v < parts; ++v) p.starts.push_back(v * p.length);
  return p;
}

template <typename T>
std::vector<Tensor<T>> partition_volume(const Tensor<T>& x, const Partition& p) {
  std::vector<Tensor<T>> out;
  for (auto s : p.starts) out.push_back(select_depth(x, s, p.length));
  return out;
}

template <typename T>
Tensor<T> concat_subvolumes(const std::vector<Tensor<T>>& parts, const std::vector<std::int64_t>& starts) {
  if (parts.empty() || parts.size() != starts.size()) throw ShapeError("concat_subvolumes: parts/starts mismatch");
  std::int64_t expect = 0;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (parts[i].ndim() != 5) throw ShapeError("concat_subvolumes expects [N,C,L,H,W] parts");
    if (starts[i] != expect) {
      throw ShapeError("sub-volumes out of order: expected start " + std::to_string(expect) + ", got " +
                       std::to_string(starts[i]));
    }
    expect += parts[i].dim(2);
  }
  return concat(parts, 2);
}

#define HAGAN_INSTANTIATE(T)                                                                     \
  template Tensor<T> select_low(const Tensor<T>&, const SliceWindow&);                          \
  template Tensor<T> select_high(const Tensor<T>&, const SliceWindow&);                         \
  template std::vector<Tensor<T>> partition_volume(const Tensor<T>&, const Partition&);         \
  template Tensor<T> concat_subvolumes(const std::vector<Tensor<T>>&, const std::vector<std::int64_t>&);
HAGAN_INSTANTIATE(float)
HAGAN_INSTANTIATE(double)
#undef HAGAN_INSTANTIATE

}  // namespace hagan
