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

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "hagan/tape.hpp"
#include "hagan/tensor.hpp"

namespace hagan {

using Int3 = std::array<std::int64_t, 3>;

// Convolution kernels. kDirect is the plain nested-loop path; kSliceGemm
// lowers each output depth slice to an im2col block and a GEMM, so the value
// of an output voxel does not depend on the input's depth extent.
enum class ConvAlgo { kAuto, kDirect, kSliceGemm };

// x [N,Ci,D,H,W], weight [Co,Ci,kd,kh,kw], bias [Co] or undefined.
// Output extent per axis: floor((in + 2*pad - k) / stride) + 1, zero padding.
template <typename T>
Tensor<T> conv3d(const Tensor<T>& x, const Tensor<T>& weight, const Tensor<T>& bias,
                 Int3 stride, Int3 pad, ConvAlgo algo = ConvAlgo::kAuto);

// Output extent of conv3d along one axis; throws ShapeError if non-positive.
std::int64_t conv_out_extent(std::int64_t in, std::int64_t kernel, std::int64_t stride,
                             std::int64_t pad);

// Positive rational scale factor.
struct Ratio {
  std::int64_t num = 1;
  std::int64_t den = 1;
  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
};

// Trilinear resampling of the three trailing spatial axes by `scale`.
// align_corners=false uses half-pixel centres (src = (i + 0.5) / s - 0.5),
// which commutes with depth cropping away from the crop boundary; for s = 1/2
// it is the 2x2x2 box average. align_corners=true maps corner to corner.
template <typename T>
Tensor<T> trilinear_interp(const Tensor<T>& x, Ratio scale, bool align_corners);

// Interpolation used inside the networks.
inline constexpr bool kNetworkAlignCorners = false;

struct GroupNormOptions {
  std::int64_t groups = 1;
  double eps = 1e-5;
  // Statistics per depth slice (over group channels x H x W) instead of over
  // the whole group volume; keeps the layer local along depth.
  bool per_slice = false;
  // Fuses a ReLU after the affine transform.
  bool fuse_relu = false;
};

// x [N,C,...] with at least one spatial axis when per_slice is set.
template <typename T>
Tensor<T> group_norm(const Tensor<T>& x, const Tensor<T>& gamma, const Tensor<T>& beta,
                     const GroupNormOptions& options);

// Batch statistics over N and spatial axes in training mode (running stats
// updated with `momentum`); running statistics otherwise.
template <typename T>
Tensor<T> batch_norm(const Tensor<T>& x, const Tensor<T>& gamma, const Tensor<T>& beta,
                     Tensor<T>& running_mean, Tensor<T>& running_var, bool training,
                     double momentum = 0.1, double eps = 1e-5);

template <typename T> Tensor<T> relu(const Tensor<T>& x);
template <typename T> Tensor<T> leaky_relu(const Tensor<T>& x, double alpha = 0.2);
template <typename T> Tensor<T> elu(const Tensor<T>& x, double alpha = 1.0);
template <typename T> Tensor<T> tanh(const Tensor<T>& x);
template <typename T> Tensor<T> sigmoid(const Tensor<T>& x);
// Normalised over `axis`.
template <typename T> Tensor<T> softmax(const Tensor<T>& x, int axis);

// x [N,Fi], weight [Fo,Fi], bias [Fo] or undefined.
template <typename T>
Tensor<T> dense(const Tensor<T>& x, const Tensor<T>& weight, const Tensor<T>& bias);

// Shares the payload; the gradient is reshaped back.
template <typename T> Tensor<T> reshape(const Tensor<T>& x, const Shape& shape);

template <typename T>
Tensor<T> concat(const std::vector<Tensor<T>>& parts, int axis);
template <typename T>
Tensor<T> slice(const Tensor<T>& x, int axis, std::int64_t start, std::int64_t length);

template <typename T> Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b);
template <typename T> Tensor<T> sub(const Tensor<T>& a, const Tensor<T>& b);
template <typename T> Tensor<T> mul(const Tensor<T>& a, const Tensor<T>& b);
template <typename T> Tensor<T> scale(const Tensor<T>& x, double factor);
template <typename T> Tensor<T> add_scalar(const Tensor<T>& x, double value);

template <typename T> Tensor<T> sum(const Tensor<T>& x);
template <typename T> Tensor<T> mean(const Tensor<T>& x);

// [N,C,...] -> [N,C], mean over all trailing axes.
template <typename T> Tensor<T> global_avg_pool(const Tensor<T>& x);

// mean |a - b|.
template <typename T> Tensor<T> l1_loss(const Tensor<T>& a, const Tensor<T>& b);

// mean over elements of softplus(x) - target * x, i.e. -[t log s(x) + (1-t) log(1-s(x))].
template <typename T>
Tensor<T> bce_with_logits(const Tensor<T>& logits, double target);

// mean over rows of -log softmax(logits)[label]; logits [N,K].
template <typename T>
Tensor<T> cross_entropy(const Tensor<T>& logits, std::span<const int> labels);

// Numerically stable log(1 + exp(x)).
double softplus(double x);

}  // namespace hagan
