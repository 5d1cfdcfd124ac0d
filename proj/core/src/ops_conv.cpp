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

#include <Eigen/Core>
#include <algorithm>
#include <string>

#include "hagan/errors.hpp"
#include "hagan/ops.hpp"
#include "op_util.hpp"

namespace hagan {

std::int64_t conv_out_extent(std::int64_t in, std::int64_t kernel, std::int64_t stride,
                             std::int64_t pad) {
  if (stride <= 0 || kernel <= 0 || pad < 0) {
    throw ShapeError("invalid convolution geometry");
  }
  const auto span = in + 2 * pad - kernel;
  if (span < 0) {
    throw ShapeError("non-positive convolution output extent (in=" + std::to_string(in) +
                     ", kernel=" + std::to_string(kernel) + ", pad=" + std::to_string(pad) + ")");
  }
  return span / stride + 1;
}

namespace {

struct ConvGeom {
  std::int64_t n, ci, d, h, w;
  std::int64_t co, kd, kh, kw;
  std::int64_t od, oh, ow;
  Int3 stride, pad;
  std::int64_t k() const { return ci * kd * kh * kw; }
  std::int64_t in_plane() const { return h * w; }
  std::int64_t out_plane() const { return oh * ow; }
};

template <typename T>
using RowMat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using StridedMap = Eigen::Map<RowMat<T>, 0, Eigen::OuterStride<>>;
template <typename T>
using ConstStridedMap = Eigen::Map<const RowMat<T>, 0, Eigen::OuterStride<>>;

// Fills col [K, oh*ow] for output slice `z` of sample `xs` (one sample).
template <typename T>
void im2col_slice(const ConvGeom& g, const T* xs, std::int64_t z, T* col) {
  const auto plane = g.out_plane();
  std::int64_t row = 0;
  for (std::int64_t c = 0; c < g.ci; ++c) {
    for (std::int64_t a = 0; a < g.kd; ++a) {
      const auto iz = z * g.stride[0] - g.pad[0] + a;
      for (std::int64_t b = 0; b < g.kh; ++b) {
        for (std::int64_t e = 0; e < g.kw; ++e, ++row) {
          T* dst = col + row * plane;
          if (iz < 0 || iz >= g.d) {
            std::fill_n(dst, plane, T(0));
            continue;
          }
          const T* src = xs + (c * g.d + iz) * g.in_plane();
          for (std::int64_t y = 0; y < g.oh; ++y) {
            const auto iy = y * g.stride[1] - g.pad[1] + b;
            T* drow = dst + y * g.ow;
            if (iy < 0 || iy >= g.h) {
              std::fill_n(drow, g.ow, T(0));
              continue;
            }
            const T* srow = src + iy * g.w;
            for (std::int64_t x = 0; x < g.ow; ++x) {
              const auto ix = x * g.stride[2] - g.pad[2] + e;
              drow[x] = (ix >= 0 && ix < g.w) ? srow[ix] : T(0);
            }
          }
        }
      }
    }
  }
}

// Scatter-adds dcol [K, oh*ow] of output slice `z` into dx (one sample).
template <typename T>
void col2im_slice(const ConvGeom& g, const T* col, std::int64_t z, T* dxs) {
  const auto plane = g.out_plane();
  std::int64_t row = 0;
  for (std::int64_t c = 0; c < g.ci; ++c) {
    for (std::int64_t a = 0; a < g.kd; ++a) {
      const auto iz = z * g.stride[0] - g.pad[0] + a;
      for (std::int64_t b = 0; b < g.kh; ++b) {
        for (std::int64_t e = 0; e < g.kw; ++e, ++row) {
          if (iz < 0 || iz >= g.d) continue;
          const T* src = col + row * plane;
          T* dst = dxs + (c * g.d + iz) * g.in_plane();
          for (std::int64_t y = 0; y < g.oh; ++y) {
            const auto iy = y * g.stride[1] - g.pad[1] + b;
            if (iy < 0 || iy >= g.h) continue;
            const T* srow = src + y * g.ow;
            T* drow = dst + iy * g.w;
            for (std::int64_t x = 0; x < g.ow; ++x) {
              const auto ix = x * g.stride[2] - g.pad[2] + e;
              if (ix >= 0 && ix < g.w) drow[ix] += srow[x];
            }
          }
        }
      }
    }
  }
}

template <typename T>
void forward_gemm(const ConvGeom& g, const T* x, const T* w, const T* bias, T* out) {
  const auto k = g.k();
  const auto plane = g.out_plane();
  AlignedVector<T> col(static_cast<std::size_t>(k * plane));
  Eigen::Map<const RowMat<T>> wm(w, g.co, k);
  for (std::int64_t n = 0; n < g.n; ++n) {
    const T* xs = x + n * g.ci * g.d * g.in_plane();
    T* os = out + n * g.co * g.od * plane;
    for (std::int64_t z = 0; z < g.od; ++z) {
      im2col_slice(g, xs, z, col.data());
      Eigen::Map<const RowMat<T>> cm(col.data(), k, plane);
      StridedMap<T> om(os + z * plane, g.co, plane, Eigen::OuterStride<>(g.od * plane));
      om.noalias() = wm * cm;
      if (bias) {
        for (std::int64_t c = 0; c < g.co; ++c) om.row(c).array() += bias[c];
      }
    }
  }
}

template <typename T>
void forward_direct(const ConvGeom& g, const T* x, const T* w, const T* bias, T* out) {
  for (std::int64_t n = 0; n < g.n; ++n) {
    for (std::int64_t o = 0; o < g.co; ++o) {
      for (std::int64_t z = 0; z < g.od; ++z) {
        for (std::int64_t y = 0; y < g.oh; ++y) {
          for (std::int64_t xo = 0; xo < g.ow; ++xo) {
            T acc = 0;
            for (std::int64_t c = 0; c < g.ci; ++c) {
              for (std::int64_t a = 0; a < g.kd; ++a) {
                const auto iz = z * g.stride[0] - g.pad[0] + a;
                if (iz < 0 || iz >= g.d) continue;
                for (std::int64_t b = 0; b < g.kh; ++b) {
                  const auto iy = y * g.stride[1] - g.pad[1] + b;
                  if (iy < 0 || iy >= g.h) continue;
                  for (std::int64_t e = 0; e < g.kw; ++e) {
                    const auto ix = xo * g.stride[2] - g.pad[2] + e;
                    if (ix < 0 || ix >= g.w) continue;
                    acc += w[(((o * g.ci + c) * g.kd + a) * g.kh + b) * g.kw + e] *
                           x[(((n * g.ci + c) * g.d + iz) * g.h + iy) * g.w + ix];
                  }
                }
              }
            }
            if (bias) acc += bias[o];
            out[(((n * g.co + o) * g.od + z) * g.oh + y) * g.ow + xo] = acc;
          }
        }
      }
    }
  }
}

template <typename T>
void backward_gemm(const ConvGeom& g, const T* x, const T* w, const T* dout, T* dx, T* dw,
                   T* db) {
  const auto k = g.k();
  const auto plane = g.out_plane();
  AlignedVector<T> col(static_cast<std::size_t>(k * plane));
  Eigen::Map<const RowMat<T>> wm(w, g.co, k);
  RowMat<T> dw_acc;
  if (dw) dw_acc = RowMat<T>::Zero(g.co, k);
  for (std::int64_t n = 0; n < g.n; ++n) {
    const T* xs = x + n * g.ci * g.d * g.in_plane();
    const T* ds = dout + n * g.co * g.od * plane;
    T* dxs = dx ? dx + n * g.ci * g.d * g.in_plane() : nullptr;
    for (std::int64_t z = 0; z < g.od; ++z) {
      ConstStridedMap<T> dm(ds + z * plane, g.co, plane, Eigen::OuterStride<>(g.od * plane));
      if (db) {
        for (std::int64_t c = 0; c < g.co; ++c) db[c] += dm.row(c).sum();
      }
      if (dw) {
        im2col_slice(g, xs, z, col.data());
        Eigen::Map<const RowMat<T>> cm(col.data(), k, plane);
        dw_acc.noalias() += dm * cm.transpose();
      }
      if (dxs) {
        Eigen::Map<RowMat<T>> cm(col.data(), k, plane);
        cm.noalias() = wm.transpose() * dm;
        col2im_slice(g, col.data(), z, dxs);
      }
    }
  }
  if (dw) {
    for (std::int64_t i = 0; i < g.co * k; ++i) dw[i] += dw_acc.data()[i];
  }
}

template <typename T>
void backward_direct(const ConvGeom& g, const T* x, const T* w, const T* dout, T* dx, T* dw,
                     T* db) {
  for (std::int64_t n = 0; n < g.n; ++n) {
    for (std::int64_t o = 0; o < g.co; ++o) {
      for (std::int64_t z = 0; z < g.od; ++z) {
        for (std::int64_t y = 0; y < g.oh; ++y) {
          for (std::int64_t xo = 0; xo < g.ow; ++xo) {
            const T go = dout[(((n * g.co + o) * g.od + z) * g.oh + y) * g.ow + xo];
            if (db) db[o] += go;
            for (std::int64_t c = 0; c < g.ci; ++c) {
              for (std::int64_t a = 0; a < g.kd; ++a) {
                const auto iz = z * g.stride[0] - g.pad[0] + a;
                if (iz < 0 || iz >= g.d) continue;
                for (std::int64_t b = 0; b < g.kh; ++b) {
                  const auto iy = y * g.stride[1] - g.pad[1] + b;
                  if (iy < 0 || iy >= g.h) continue;
                  for (std::int64_t e = 0; e < g.kw; ++e) {
                    const auto ix = xo * g.stride[2] - g.pad[2] + e;
                    if (ix < 0 || ix >= g.w) continue;
                    const auto wi = (((o * g.ci + c) * g.kd + a) * g.kh + b) * g.kw + e;
                    const auto xi = (((n * g.ci + c) * g.d + iz) * g.h + iy) * g.w + ix;
                    if (dw) dw[wi] += go * x[xi];
                    if (dx) dx[xi] += go * w[wi];
                  }
                }
              }
            }
          }
        }
      }
    }
  }
}

}  // namespace

template <typename T>
Tensor<T> conv3d(const Tensor<T>& x, const Tensor<T>& weight, const Tensor<T>& bias, Int3 stride,
                 Int3 pad, ConvAlgo algo) {
  if (x.ndim() != 5) throw ShapeError("conv3d expects [N,C,D,H,W] input, got " + shape_str(x.shape()));
  if (weight.ndim() != 5) throw ShapeError("conv3d expects a 5-D weight");
  ConvGeom g{};
  g.n = x.dim(0);
  g.ci = x.dim(1);
  g.d = x.dim(2);
  g.h = x.dim(3);
  g.w = x.dim(4);
  g.co = weight.dim(0);
  g.kd = weight.dim(2);
  g.kh = weight.dim(3);
  g.kw = weight.dim(4);
  if (weight.dim(1) != g.ci) {
    throw ShapeError("conv3d channel mismatch: input has " + std::to_string(g.ci) +
                     " channels, weight expects " + std::to_string(weight.dim(1)));
  }
  if (bias.defined() && bias.numel() != g.co) throw ShapeError("conv3d bias size mismatch");
  g.stride = stride;
  g.pad = pad;
  g.od = conv_out_extent(g.d, g.kd, stride[0], pad[0]);
  g.oh = conv_out_extent(g.h, g.kh, stride[1], pad[1]);
  g.ow = conv_out_extent(g.w, g.kw, stride[2], pad[2]);

  const bool direct = algo == ConvAlgo::kDirect;
  auto out = Tensor<T>::zeros({g.n, g.co, g.od, g.oh, g.ow});
  const T* b = bias.defined() ? bias.data() : nullptr;
  if (direct) {
    forward_direct(g, x.data(), weight.data(), b, out.data());
  } else {
    forward_gemm(g, x.data(), weight.data(), b, out.data());
  }
  detail::check_finite(out, "conv3d");

  std::vector<ImplPtr<T>> inputs{x.impl_ptr(), weight.impl_ptr()};
  if (bias.defined()) inputs.push_back(bias.impl_ptr());
  record_op<T>(std::move(inputs), out,
               [g, direct](TensorImpl<T>& o, const std::vector<ImplPtr<T>>& in) {
                 auto& xi = *in[0];
                 auto& wi = *in[1];
                 TensorImpl<T>* bi = in.size() > 2 ? in[2].get() : nullptr;
                 std::vector<T> dx, dw, db;
                 if (xi.requires_grad) dx.assign(xi.data->size(), T(0));
                 if (wi.requires_grad) dw.assign(wi.data->size(), T(0));
                 if (bi && bi->requires_grad) db.assign(bi->data->size(), T(0));
                 T* pdx = dx.empty() ? nullptr : dx.data();
                 T* pdw = dw.empty() ? nullptr : dw.data();
                 T* pdb = db.empty() ? nullptr : db.data();
                 if (direct) {
                   backward_direct(g, xi.data->data(), wi.data->data(), o.grad->data(), pdx, pdw, pdb);
                 } else {
                   backward_gemm(g, xi.data->data(), wi.data->data(), o.grad->data(), pdx, pdw, pdb);
                 }
                 if (pdx) accumulate_grad<T>(xi, dx);
                 if (pdw) accumulate_grad<T>(wi, dw);
                 if (pdb) accumulate_grad<T>(*bi, db);
               });
  return out;
}

template Tensor<float> conv3d(const Tensor<float>&, const Tensor<float>&, const Tensor<float>&,
                              Int3, Int3, ConvAlgo);
template Tensor<double> conv3d(const Tensor<double>&, const Tensor<double>&,
                               const Tensor<double>&, Int3, Int3, ConvAlgo);

}  // namespace hagan
