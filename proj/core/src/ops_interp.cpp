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

#include <string>

#include "hagan/errors.hpp"
#include "hagan/ops.hpp"
#include "op_util.hpp"

namespace hagan {
namespace {

// Source taps of one output index along one axis. The blend weight is exact
// rational arithmetic, so a window shifted by whole output periods sees the
// same weights as the full grid.
struct Tap {
  std::int64_t i0, i1;
  double w;
};

std::vector<Tap> axis_taps(std::int64_t in, std::int64_t out, Ratio s, bool align_corners) {
  std::vector<Tap> taps(static_cast<std::size_t>(out));
  for (std::int64_t i = 0; i < out; ++i) {
    std::int64_t num = 0;
    std::int64_t den = 1;
    if (align_corners) {
      if (out > 1) {
        num = i * (in - 1);
        den = out - 1;
      }
    } else {
      // (i + 1/2) / s - 1/2 = ((2i + 1) * s.den - s.num) / (2 * s.num)
      num = (2 * i + 1) * s.den - s.num;
      den = 2 * s.num;
    }
    Tap t{0, 0, 0.0};
    if (num > 0) {
      t.i0 = num / den;
      t.w = static_cast<double>(num % den) / static_cast<double>(den);
    }
    if (t.i0 >= in - 1) {
      t.i0 = in - 1;
      t.w = 0.0;
    }
    t.i1 = std::min(t.i0 + 1, in - 1);
    taps[static_cast<std::size_t>(i)] = t;
  }
  return taps;
}

// One linear pass over layout [outer, len_in, inner] -> [outer, len_out, inner].
template <typename T>
void pass_forward(const T* src, T* dst, std::int64_t outer, std::int64_t len_in,
                  std::int64_t inner, const std::vector<Tap>& taps) {
  const auto len_out = static_cast<std::int64_t>(taps.size());
  for (std::int64_t o = 0; o < outer; ++o) {
    const T* s = src + o * len_in * inner;
    T* d = dst + o * len_out * inner;
    for (std::int64_t j = 0; j < len_out; ++j) {
      const auto& t = taps[static_cast<std::size_t>(j)];
      const T w = static_cast<T>(t.w);
      const T* a = s + t.i0 * inner;
      const T* b = s + t.i1 * inner;
      T* out = d + j * inner;
      if (t.w == 0.0) {
        for (std::int64_t k = 0; k < inner; ++k) out[k] = a[k];
      } else {
        for (std::int64_t k = 0; k < inner; ++k) out[k] = a[k] + w * (b[k] - a[k]);
      }
    }
  }
}

template <typename T>
void pass_backward(const T* gout, T* gin, std::int64_t outer, std::int64_t len_in,
                   std::int64_t inner, const std::vector<Tap>& taps) {
  const auto len_out = static_cast<std::int64_t>(taps.size());
  for (std::int64_t o = 0; o < outer; ++o) {
    T* s = gin + o * len_in * inner;
    const T* d = gout + o * len_out * inner;
    for (std::int64_t j = 0; j < len_out; ++j) {
      const auto& t = taps[static_cast<std::size_t>(j)];
      const T w = static_cast<T>(t.w);
      T* a = s + t.i0 * inner;
      T* b = s + t.i1 * inner;
      const T* g = d + j * inner;
      for (std::int64_t k = 0; k < inner; ++k) {
        a[k] += (T(1) - w) * g[k];
        b[k] += w * g[k];
      }
    }
  }
}

struct InterpPlan {
  Shape in_shape;
  std::array<std::int64_t, 3> in{}, out{};
  std::array<std::vector<Tap>, 3> taps;
  std::int64_t lead = 1;  // product of non-spatial leading extents
};

}  // namespace

template <typename T>
Tensor<T> trilinear_interp(const Tensor<T>& x, Ratio scale, bool align_corners) {
  if (x.ndim() < 3) throw ShapeError("trilinear_interp needs three trailing spatial axes");
  if (scale.num <= 0 || scale.den <= 0) throw ShapeError("interpolation scale must be positive");
  InterpPlan plan;
  plan.in_shape = x.shape();
  const int nd = x.ndim();
  plan.lead = detail::extent_product(x.shape(), 0, nd - 3);
  Shape out_shape = x.shape();
  for (int a = 0; a < 3; ++a) {
    const auto in = x.dim(nd - 3 + a);
    if ((in * scale.num) % scale.den != 0) {
      throw ShapeError("interpolation output extent " + std::to_string(in) + " * " +
                       std::to_string(scale.num) + "/" + std::to_string(scale.den) +
                       " is not integral");
    }
    const auto out = in * scale.num / scale.den;
    if (out <= 0) throw ShapeError("interpolation output extent must be positive");
    plan.in[a] = in;
    plan.out[a] = out;
    plan.taps[a] = axis_taps(in, out, scale, align_corners);
    out_shape[static_cast<std::size_t>(nd - 3 + a)] = out;
  }
  const auto [d0, h0, w0] = plan.in;
  const auto [d1, h1, w1] = plan.out;
  std::vector<T> t1(static_cast<std::size_t>(plan.lead * d1 * h0 * w0));
  std::vector<T> t2(static_cast<std::size_t>(plan.lead * d1 * h1 * w0));
  auto out = Tensor<T>::zeros(out_shape);
  pass_forward(x.data(), t1.data(), plan.lead, d0, h0 * w0, plan.taps[0]);
  pass_forward(t1.data(), t2.data(), plan.lead * d1, h0, w0, plan.taps[1]);
  pass_forward(t2.data(), out.data(), plan.lead * d1 * h1, w0, 1, plan.taps[2]);
  detail::check_finite(out, "trilinear_interp");

  record_op<T>({x.impl_ptr()}, out,
               [plan = std::move(plan)](TensorImpl<T>& o, const std::vector<ImplPtr<T>>& in) {
                 const auto [d0, h0, w0] = plan.in;
                 const auto [d1, h1, w1] = plan.out;
                 (void)w1;
                 std::vector<T> g2(static_cast<std::size_t>(plan.lead * d1 * h1 * w0));
                 std::vector<T> g1(static_cast<std::size_t>(plan.lead * d1 * h0 * w0));
                 std::vector<T> g0(static_cast<std::size_t>(plan.lead * d0 * h0 * w0));
                 pass_backward(o.grad->data(), g2.data(), plan.lead * d1 * h1, w0, 1, plan.taps[2]);
                 pass_backward(g2.data(), g1.data(), plan.lead * d1, h0, w0, plan.taps[1]);
                 pass_backward(g1.data(), g0.data(), plan.lead, d0, h0 * w0, plan.taps[0]);
                 accumulate_grad<T>(*in[0], g0);
               });
  return out;
}

template Tensor<float> trilinear_interp(const Tensor<float>&, Ratio, bool);
template Tensor<double> trilinear_interp(const Tensor<double>&, Ratio, bool);

}  // namespace hagan
