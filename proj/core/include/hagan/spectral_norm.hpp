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

#include <span>

#include "hagan/tensor.hpp"

namespace hagan {

template <typename T>
struct SpectralNormResult {
  Tensor<T> weight;  // W / sigma, same shape as W
  double sigma = 0.0;
  // W is zero (or Wᵀu vanished): the weight is returned unchanged.
  bool degenerate = false;
};

// Divides W, viewed as [rows, numel/rows], by the power-iteration estimate of
// its top singular value. `u` (rows) and `v` (cols) persist across calls; with
// update=false no iteration runs and the stored vectors are used as-is, which
// makes the map differentiable with frozen normalisation. The gradient treats
// u and v as constants: dW = (G - <G, W/sigma> u vᵀ) / sigma.
template <typename T>
SpectralNormResult<T> spectral_norm(const Tensor<T>& w, std::span<T> u, std::span<T> v,
                                    int power_iters, bool update);

// Top singular value estimate after `iters` power iterations from `u`
// (which is updated), without touching any tape.
template <typename T>
double power_iteration_sigma(const Tensor<T>& w, std::span<T> u, int iters);

}  // namespace hagan
