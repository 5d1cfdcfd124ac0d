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

#include "hagan/spectral_norm.hpp"

#include <cmath>
#include <vector>

#include "hagan/errors.hpp"
#include "hagan/tape.hpp"

namespace hagan {
namespace {

// One power step: v <- normalize(Wᵀu), u <- normalize(W v). Returns false if
// either product vanishes.
template <typename T>
bool power_step(const T* w, std::int64_t rows, std::int64_t cols, std::vector<double>& u,
                std::vector<double>& v) {
  std::fill(v.begin(), v.end(), 0.0);
  for (std::int64_t r = 0; r < rows; ++r) {
    const double ur = u[static_cast<std::size_t>(r)];
    const T* row = w + r * cols;
    for (std::int64_t c = 0; c < cols; ++c) v[static_cast<std::size_t>(c)] += row[c] * ur;
  }
  double nv = 0.0;
  for (double x : v) nv += x * x;
  nv = std::sqrt(nv);
  if (nv == 0.0) return false;
  for (double& x : v) x /= nv;
  double nu = 0.0;
  for (std::int64_t r = 0; r < rows; ++r) {
    const T* row = w + r * cols;
    double s = 0.0;
    for (std::int64_t c = 0; c < cols; ++c) s += row[c] * v[static_cast<std::size_t>(c)];
    u[static_cast<std::size_t>(r)] = s;
    nu += s * s;
  }
  nu = std::sqrt(nu);
  if (nu == 0.0) return false;
  for (double& x : u) x /= nu;
  return true;
}

template <typename T>
double bilinear(const T* w, std::int64_t rows, std::int64_t cols, const std::vector<double>& u,
                const std::vector<double>& v) {
  double s = 0.0;
  for (std::int64_t r = 0; r < rows; ++r) {
    double t = 0.0;
    for (std::int64_t c = 0; c < cols; ++c) t += w[r * cols + c] * v[static_cast<std::size_t>(c)];
    s += u[static_cast<std::size_t>(r)] * t;
  }
  return s;
}

template <typename T>
void normalize_init(std::vector<double>& u) {
  double n = 0.0;
  for (double x : u) n += x * x;
  if (n == 0.0) {
    for (auto& x : u) x = 1.0;
    n = static_cast<double>(u.size());
  }
  n = std::sqrt(n);
  for (auto& x : u) x /= n;
}

}  // namespace

template <typename T>
SpectralNormResult<T> spectral_norm(const Tensor<T>& w, std::span<T> u, std::span<T> v,
                                    int power_iters, bool update) {
  const auto rows = w.dim(0);
  const auto cols = w.numel() / rows;
  if (static_cast<std::int64_t>(u.size()) != rows || static_cast<std::int64_t>(v.size()) != cols) {
    throw ShapeError("spectral_norm state vectors do not match weight " + shape_str(w.shape()));
  }
  if (update && power_iters < 1) throw ConfigError("spectral_norm needs at least one power iteration");
  std::vector<double> ud(u.begin(), u.end());
  std::vector<double> vd(v.begin(), v.end());
  SpectralNormResult<T> res;
  bool ok = true;
  if (update) {
    normalize_init<T>(ud);
    for (int i = 0; i < power_iters && ok; ++i) ok = power_step(w.data(), rows, cols, ud, vd);
    if (ok) {
      for (std::size_t i = 0; i < ud.size(); ++i) u[i] = static_cast<T>(ud[i]);
      for (std::size_t i = 0; i < vd.size(); ++i) v[i] = static_cast<T>(vd[i]);
    }
  }
  // Use the stored (possibly just rounded) vectors so that update and frozen
  // evaluation of the same state agree exactly.
  for (std::size_t i = 0; i < ud.size(); ++i) ud[i] = u[i];
  for (std::size_t i = 0; i < vd.size(); ++i) vd[i] = v[i];
  const double sigma = ok ? bilinear(w.data(), rows, cols, ud, vd) : 0.0;
  if (!ok || !(std::abs(sigma) > 0.0)) {
    res.weight = w;
    res.degenerate = true;
    return res;
  }
  res.sigma = sigma;
  auto out = Tensor<T>::zeros(w.shape());
  const T inv = static_cast<T>(1.0 / sigma);
  for (std::int64_t i = 0; i < w.numel(); ++i) out.data()[i] = w.data()[i] * inv;
  record_op<T>({w.impl_ptr()}, out,
               [rows, cols, sigma, ud = std::move(ud), vd = std::move(vd)](
                   TensorImpl<T>& o, const std::vector<ImplPtr<T>>& in) {
                 const T* g = o.grad->data();
                 const T* wn = o.data->data();
                 double dot = 0.0;
                 for (std::int64_t i = 0; i < rows * cols; ++i) dot += static_cast<double>(g[i]) * wn[i];
                 std::vector<T> d(static_cast<std::size_t>(rows * cols));
                 for (std::int64_t r = 0; r < rows; ++r) {
                   for (std::int64_t c = 0; c < cols; ++c) {
                     const auto i = r * cols + c;
                     d[static_cast<std::size_t>(i)] = static_cast<T>(
                         (g[i] - dot * ud[static_cast<std::size_t>(r)] * vd[static_cast<std::size_t>(c)]) / sigma);
                   }
                 }
                 accumulate_grad<T>(*in[0], d);
               });
  res.weight = out;
  return res;
}

template <typename T>
double power_iteration_sigma(const Tensor<T>& w, std::span<T> u, int iters) {
  const auto rows = w.dim(0);
  const auto cols = w.numel() / rows;
  if (static_cast<std::int64_t>(u.size()) != rows) throw ShapeError("power iteration vector size mismatch");
  std::vector<double> ud(u.begin(), u.end());
  std::vector<double> vd(static_cast<std::size_t>(cols));
  normalize_init<T>(ud);
  for (int i = 0; i < iters; ++i) {
    if (!power_step(w.data(), rows, cols, ud, vd)) return 0.0;
  }
  for (std::size_t i = 0; i < ud.size(); ++i) u[i] = static_cast<T>(ud[i]);
  return bilinear(w.data(), rows, cols, ud, vd);
}

template SpectralNormResult<float> spectral_norm(const Tensor<float>&, std::span<float>,
                                                 std::span<float>, int, bool);
template SpectralNormResult<double> spectral_norm(const Tensor<double>&, std::span<double>,
                                                  std::span<double>, int, bool);
template double power_iteration_sigma(const Tensor<float>&, std::span<float>, int);
template double power_iteration_sigma(const Tensor<double>&, std::span<double>, int);

}  // namespace hagan
