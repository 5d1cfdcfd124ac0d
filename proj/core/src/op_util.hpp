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

#include <string>

#include "hagan/errors.hpp"
#include "hagan/tensor.hpp"

namespace hagan::detail {

template <typename T>
void check_finite(const Tensor<T>& t, const char* op) {
  if (finite_checks_enabled() && !all_finite(t.values())) {
    throw NumericError(std::string("non-finite value produced by ") + op);
  }
}

inline int normalize_axis(int axis, int ndim) {
  const int a = axis < 0 ? axis + ndim : axis;
  if (a < 0 || a >= ndim) throw ShapeError("axis " + std::to_string(axis) + " out of range");
  return a;
}

// Product of extents in [begin, end).
inline std::int64_t extent_product(const Shape& s, int begin, int end) {
  std::int64_t n = 1;
  for (int i = begin; i < end; ++i) n *= s[static_cast<std::size_t>(i)];
  return n;
}

}  // namespace hagan::detail
