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

#include <cmath>
#include <string>

#include "hagan/errors.hpp"
#include "hagan/ops.hpp"
#include "op_util.hpp"

namespace hagan {
namespace {

// Element set of one normalisation group: channels [c0, c0+cg) of sample n,
// depth slice z (or the whole volume when slices == 1).
struct GnLayout {
  std::int64_t n, c, groups, cg, slices, plane;
  std::int64_t base(std::int64_t ni, std::int64_t ch, std::int64_t z) const {
    return ((ni * c + ch) * slices + z) * plane;
  }
  std::int64_t count() const { return cg * plane; }
};

}  // namespace

template <typename T>
Tensor<T> group_norm(const Tensor<T>& x, const Tensor<T>& gamma, const Tensor<T>& beta,
                     const GroupNormOptions& opt) {
  if (x.ndim() < 2) throw ShapeError("group_norm expects [N,C,...]");
  GnLayout L{};
  L.n = x.dim(0);
  L.c = x.dim(1);
  L.groups = opt.groups;
  if (L.groups <= 0 || L.c % L.groups != 0) {
    throw ShapeError("group_norm: " + std::to_string(L.c) + " channels not divisible into " +
                     std::to_string(L.groups) + " groups");
  }
  if (gamma.numel() != L.c || beta.numel() != L.c) throw ShapeError("group_norm affine size mismatch");
  L.cg = L.c / L.groups;
  const auto spatial = detail::extent_product(x.shape(), 2, x.ndim());
  if (opt.per_slice) {
    if (x.ndim() < 3) throw ShapeError("per-slice group_norm needs a depth axis");
    L.slices = x.dim(2);
    L.plane = spatial / L.slices;
  } else {
    L.slices = 1;
    L.plane = spatial;
  }

  const auto ngroups = L.n * L.groups * L.slices;
  std::vector<T> mean(static_cast<std::size_t>(ngroups));
  std::vector<T> rstd(static_cast<std::size_t>(ngroups));
  auto out = Tensor<T>::zeros(x.shape());
  const T* xd = x.data();
  T* yd = out.data();
  const T* g = gamma.data();
  const T* b = beta.data();
  const double inv = 1.0 / static_cast<double>(L.count());
  std::int64_t gi = 0;
  for (std::int64_t ni = 0; ni < L.n; ++ni) {
    for (std::int64_t grp = 0; grp < L.groups; ++grp) {
      for (std::int64_t z = 0; z < L.slices; ++z, ++gi) {
        double s = 0.0;
        for (std::int64_t ch = grp * L.cg; ch < (grp + 1) * L.cg; ++ch) {
          const T* p = xd + L.base(ni, ch, z);
          for (std::int64_t k = 0; k < L.plane; ++k) s += p[k];
        }
        const double mu = s * inv;
        double v = 0.0;
        for (std::int64_t ch = grp * L.cg; ch < (grp + 1) * L.cg; ++ch) {
          const T* p = xd + L.base(ni, ch, z);
          for (std::int64_t k = 0; k < L.plane; ++k) {
            const double d = p[k] - mu;
            v += d * d;
          }
        }
        const double r = 1.0 / std::sqrt(v * inv + opt.eps);
        mean[static_cast<std::size_t>(gi)] = static_cast<T>(mu);
        rstd[static_cast<std::size_t>(gi)] = static_cast<T>(r);
        for (std::int64_t ch = grp * L.cg; ch < (grp + 1) * L.cg; ++ch) {
          const T* p = xd + L.base(ni, ch, z);
          T* q = yd + L.base(ni, ch, z);
          const T m = static_cast<T>(mu);
          const T rs = static_cast<T>(r);
          for (std::int64_t k = 0; k < L.plane; ++k) {
            T y = g[ch] * ((p[k] - m) * rs) + b[ch];
            if (opt.fuse_relu && y < T(0)) y = T(0);
            q[k] = y;
          }
        }
      }
    }
  }
  detail::check_finite(out, "group_norm");

  const bool relu = opt.fuse_relu;
  record_op<T>(
      {x.impl_ptr(), gamma.impl_ptr(), beta.impl_ptr()}, out,
      [L, relu, mean = std::move(mean), rstd = std::move(rstd)](
          TensorImpl<T>& o, const std::vector<ImplPtr<T>>& in) {
        const T* xd = in[0]->data->data();
        const T* g = in[1]->data->data();
        const T* yd = o.data->data();
        const T* dy = o.grad->data();
        const bool need_x = in[0]->requires_grad;
        std::vector<T> dx(need_x ? in[0]->data->size() : 0, T(0));
        std::vector<T> dg(static_cast<std::size_t>(L.c), T(0));
        std::vector<T> db(static_cast<std::size_t>(L.c), T(0));
        const double inv = 1.0 / static_cast<double>(L.count());
        std::int64_t gi = 0;
        for (std::int64_t ni = 0; ni < L.n; ++ni) {
          for (std::int64_t grp = 0; grp < L.groups; ++grp) {
            for (std::int64_t z = 0; z < L.slices; ++z, ++gi) {
              const T m = mean[static_cast<std::size_t>(gi)];
              const T rs = rstd[static_cast<std::size_t>(gi)];
              double sum_dxh = 0.0;
              double sum_dxh_xh = 0.0;
              for (std::int64_t ch = grp * L.cg; ch < (grp + 1) * L.cg; ++ch) {
                const auto off = L.base(ni, ch, z);
                double sg = 0.0, sb = 0.0;
                for (std::int64_t k = 0; k < L.plane; ++k) {
                  T d = dy[off + k];
                  if (relu && !(yd[off + k] > T(0))) d = T(0);
                  const T xh = (xd[off + k] - m) * rs;
                  sg += d * xh;
                  sb += d;
                  const double dxh = static_cast<double>(d) * g[ch];
                  sum_dxh += dxh;
                  sum_dxh_xh += dxh * xh;
                }
                dg[static_cast<std::size_t>(ch)] += static_cast<T>(sg);
                db[static_cast<std::size_t>(ch)] += static_cast<T>(sb);
              }
              if (!need_x) continue;
              const double a = sum_dxh * inv;
              const double c = sum_dxh_xh * inv;
              for (std::int64_t ch = grp * L.cg; ch < (grp + 1) * L.cg; ++ch) {
                const auto off = L.base(ni, ch, z);
                for (std::int64_t k = 0; k < L.plane; ++k) {
                  T d = dy[off + k];
                  if (relu && !(yd[off + k] > T(0))) d = T(0);
                  const double xh = static_cast<double>((xd[off + k] - m) * rs);
                  const double dxh = static_cast<double>(d) * g[ch];
                  dx[static_cast<std::size_t>(off + k)] = static_cast<T>(rs * (dxh - a - xh * c));
                }
              }
            }
          }
        }
        if (need_x) accumulate_grad<T>(*in[0], dx);
        accumulate_grad<T>(*in[1], dg);
        accumulate_grad<T>(*in[2], db);
      });
  return out;
}

template <typename T>
Tensor<T> batch_norm(const Tensor<T>& x, const Tensor<T>& gamma, const Tensor<T>& beta,
                     Tensor<T>& running_mean, Tensor<T>& running_var, bool training,
                     double momentum, double eps) {
  if (x.ndim() < 2) throw ShapeError("batch_norm expects [N,C,...]");
  const auto n = x.dim(0);
  const auto c = x.dim(1);
  const auto sp = detail::extent_product(x.shape(), 2, x.ndim());
  if (gamma.numel() != c || beta.numel() != c || running_mean.numel() != c ||
      running_var.numel() != c) {
    throw ShapeError("batch_norm parameter size mismatch");
  }
  const auto count = n * sp;
  if (training && count < 2) throw ShapeError("batch_norm training needs more than one value per channel");
  std::vector<T> mean(static_cast<std::size_t>(c)), rstd(static_cast<std::size_t>(c));
  const T* xd = x.data();
  for (std::int64_t ch = 0; ch < c; ++ch) {
    double mu, var;
    if (training) {
      double s = 0.0;
      for (std::int64_t i = 0; i < n; ++i) {
        const T* p = xd + (i * c + ch) * sp;
        for (std::int64_t k = 0; k < sp; ++k) s += p[k];
      }
      mu = s / static_cast<double>(count);
      double v = 0.0;
      for (std::int64_t i = 0; i < n; ++i) {
        const T* p = xd + (i * c + ch) * sp;
        for (std::int64_t k = 0; k < sp; ++k) v += (p[k] - mu) * (p[k] - mu);
      }
      var = v / static_cast<double>(count);
      auto& rm = running_mean.data()[ch];
      auto& rv = running_var.data()[ch];
      rm = static_cast<T>((1.0 - momentum) * rm + momentum * mu);
      rv = static_cast<T>((1.0 - momentum) * rv +
                          momentum * v / static_cast<double>(count - 1));
    } else {
      mu = running_mean.data()[ch];
      var = running_var.data()[ch];
    }
    mean[static_cast<std::size_t>(ch)] = static_cast<T>(mu);
    rstd[static_cast<std::size_t>(ch)] = static_cast<T>(1.0 / std::sqrt(var + eps));
  }
  auto out = Tensor<T>::zeros(x.shape());
  T* yd = out.data();
  for (std::int64_t i = 0; i < n; ++i) {
    for (std::int64_t ch = 0; ch < c; ++ch) {
      const auto off = (i * c + ch) * sp;
      const T m = mean[static_cast<std::size_t>(ch)];
      const T r = rstd[static_cast<std::size_t>(ch)];
      for (std::int64_t k = 0; k < sp; ++k) {
        yd[off + k] = gamma.data()[ch] * ((xd[off + k] - m) * r) + beta.data()[ch];
      }
    }
  }
  detail::check_finite(out, "batch_norm");

  record_op<T>(
      {x.impl_ptr(), gamma.impl_ptr(), beta.impl_ptr()}, out,
      [n, c, sp, training, mean = std::move(mean), rstd = std::move(rstd)](
          TensorImpl<T>& o, const std::vector<ImplPtr<T>>& in) {
        const T* xd = in[0]->data->data();
        const T* g = in[1]->data->data();
        const T* dy = o.grad->data();
        std::vector<T> dx(in[0]->data->size(), T(0));
        std::vector<T> dg(static_cast<std::size_t>(c), T(0));
        std::vector<T> db(static_cast<std::size_t>(c), T(0));
        const double inv = 1.0 / static_cast<double>(n * sp);
        for (std::int64_t ch = 0; ch < c; ++ch) {
          const T m = mean[static_cast<std::size_t>(ch)];
          const T r = rstd[static_cast<std::size_t>(ch)];
          double sg = 0.0, sb = 0.0;
          for (std::int64_t i = 0; i < n; ++i) {
            const auto off = (i * c + ch) * sp;
            for (std::int64_t k = 0; k < sp; ++k) {
              sg += dy[off + k] * ((xd[off + k] - m) * r);
              sb += dy[off + k];
            }
          }
          dg[static_cast<std::size_t>(ch)] = static_cast<T>(sg);
          db[static_cast<std::size_t>(ch)] = static_cast<T>(sb);
          // With batch statistics: dx = g*r*(dy - mean(dy) - xh*mean(dy*xh)).
          const double a = training ? sb * inv : 0.0;
          const double b = training ? sg * inv : 0.0;
          for (std::int64_t i = 0; i < n; ++i) {
            const auto off = (i * c + ch) * sp;
            for (std::int64_t k = 0; k < sp; ++k) {
              const double xh = (xd[off + k] - m) * r;
              dx[static_cast<std::size_t>(off + k)] =
                  static_cast<T>(g[ch] * r * (dy[off + k] - a - xh * b));
            }
          }
        }
        accumulate_grad<T>(*in[0], dx);
        accumulate_grad<T>(*in[1], dg);
        accumulate_grad<T>(*in[2], db);
      });
  return out;
}

#define HAGAN_INSTANTIATE(T)                                                                   \
  template Tensor<T> group_norm(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&,          \
                                const GroupNormOptions&);                                      \
  template Tensor<T> batch_norm(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&,          \
                                Tensor<T>&, Tensor<T>&, bool, double, double);
HAGAN_INSTANTIATE(float)
HAGAN_INSTANTIATE(double)
#undef HAGAN_INSTANTIATE

}  // namespace hagan
