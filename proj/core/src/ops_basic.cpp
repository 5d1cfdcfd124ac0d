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
#include <cmath>
#include <string>

#include "hagan/errors.hpp"
#include "hagan/ops.hpp"
#include "op_util.hpp"

namespace hagan {

double softplus(double x) {
  return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

namespace {

// Elementwise op; `df(x, y)` is the local derivative given input and output.
template <typename T, typename F, typename DF>
Tensor<T> unary(const Tensor<T>& x, const char* name, F f, DF df) {
  auto out = Tensor<T>::zeros(x.shape());
  const T* xd = x.data();
  T* yd = out.data();
  const auto n = x.numel();
  for (std::int64_t i = 0; i < n; ++i) yd[i] = f(xd[i]);
  detail::check_finite(out, name);
  record_op<T>({x.impl_ptr()}, out, [df](TensorImpl<T>& o, const std::vector<ImplPtr<T>>& in) {
    const T* xd = in[0]->data->data();
    const T* yd = o.data->data();
    const T* g = o.grad->data();
    std::vector<T> dx(o.data->size());
    for (std::size_t i = 0; i < dx.size(); ++i) dx[i] = g[i] * df(xd[i], yd[i]);
    accumulate_grad<T>(*in[0], dx);
  });
  return out;
}

template <typename T>
void require_same_shape(const Tensor<T>& a, const Tensor<T>& b, const char* op) {
  if (a.shape() != b.shape()) {
    throw ShapeError(std::string(op) + ": shape mismatch " + shape_str(a.shape()) + " vs " +
                     shape_str(b.shape()));
  }
}

template <typename T>
using RowMat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

}  // namespace

template <typename T>
Tensor<T> relu(const Tensor<T>& x) {
  return unary(x, "relu", [](T v) { return v > T(0) ? v : T(0); },
               [](T v, T) { return v > T(0) ? T(1) : T(0); });
}

template <typename T>
Tensor<T> leaky_relu(const Tensor<T>& x, double alpha) {
  const T a = static_cast<T>(alpha);
  return unary(x, "leaky_relu", [a](T v) { return v > T(0) ? v : a * v; },
               [a](T v, T) { return v > T(0) ? T(1) : a; });
}

template <typename T>
Tensor<T> elu(const Tensor<T>& x, double alpha) {
  const T a = static_cast<T>(alpha);
  return unary(x, "elu", [a](T v) { return v > T(0) ? v : a * std::expm1(v); },
               [a](T v, T y) { return v > T(0) ? T(1) : y + a; });
}

template <typename T>
Tensor<T> tanh(const Tensor<T>& x) {
  return unary(x, "tanh", [](T v) { return std::tanh(v); },
               [](T, T y) { return T(1) - y * y; });
}

template <typename T>
Tensor<T> sigmoid(const Tensor<T>& x) {
  return unary(x, "sigmoid", [](T v) { return T(1) / (T(1) + std::exp(-v)); },
               [](T, T y) { return y * (T(1) - y); });
}

template <typename T>
Tensor<T> softmax(const Tensor<T>& x, int axis) {
  const int a = detail::normalize_axis(axis, x.ndim());
  const auto outer = detail::extent_product(x.shape(), 0, a);
  const auto len = x.dim(a);
  const auto inner = detail::extent_product(x.shape(), a + 1, x.ndim());
  auto out = Tensor<T>::zeros(x.shape());
  const T* xd = x.data();
  T* yd = out.data();
  for (std::int64_t o = 0; o < outer; ++o) {
    for (std::int64_t k = 0; k < inner; ++k) {
      const auto base = o * len * inner + k;
      T mx = xd[base];
      for (std::int64_t j = 1; j < len; ++j) mx = std::max(mx, xd[base + j * inner]);
      T s = 0;
      for (std::int64_t j = 0; j < len; ++j) {
        yd[base + j * inner] = std::exp(xd[base + j * inner] - mx);
        s += yd[base + j * inner];
      }
      for (std::int64_t j = 0; j < len; ++j) yd[base + j * inner] /= s;
    }
  }
  detail::check_finite(out, "softmax");
  record_op<T>({x.impl_ptr()}, out,
               [outer, len, inner](TensorImpl<T>& o, const std::vector<ImplPtr<T>>& in) {
                 const T* yd = o.data->data();
                 const T* g = o.grad->data();
                 std::vector<T> dx(o.data->size());
                 for (std::int64_t oo = 0; oo < outer; ++oo) {
                   for (std::int64_t k = 0; k < inner; ++k) {
                     const auto base = oo * len * inner + k;
                     T dot = 0;
                     for (std::int64_t j = 0; j < len; ++j) dot += g[base + j * inner] * yd[base + j * inner];
                     for (std::int64_t j = 0; j < len; ++j) {
                       const auto i = static_cast<std::size_t>(base + j * inner);
                       dx[i] = yd[i] * (g[i] - dot);
                     }
                   }
                 }
                 accumulate_grad<T>(*in[0], dx);
               });
  return out;
}

template <typename T>
Tensor<T> dense(const Tensor<T>& x, const Tensor<T>& weight, const Tensor<T>& bias) {
  if (x.ndim() != 2 || weight.ndim() != 2) throw ShapeError("dense expects [N,F] input and [Fo,Fi] weight");
  const auto n = x.dim(0), fi = x.dim(1), fo = weight.dim(0);
  if (weight.dim(1) != fi) {
    throw ShapeError("dense: input width " + std::to_string(fi) + " does not match weight " +
                     shape_str(weight.shape()));
  }
  if (bias.defined() && bias.numel() != fo) throw ShapeError("dense bias size mismatch");
  auto out = Tensor<T>::zeros({n, fo});
  Eigen::Map<const RowMat<T>> xm(x.data(), n, fi);
  Eigen::Map<const RowMat<T>> wm(weight.data(), fo, fi);
  Eigen::Map<RowMat<T>> ym(out.data(), n, fo);
  ym.noalias() = xm * wm.transpose();
  if (bias.defined()) {
    for (std::int64_t i = 0; i < n; ++i) {
      for (std::int64_t j = 0; j < fo; ++j) ym(i, j) += bias.data()[j];
    }
  }
  detail::check_finite(out, "dense");
  std::vector<ImplPtr<T>> inputs{x.impl_ptr(), weight.impl_ptr()};
  if (bias.defined()) inputs.push_back(bias.impl_ptr());
  record_op<T>(std::move(inputs), out,
               [n, fi, fo](TensorImpl<T>& o, const std::vector<ImplPtr<T>>& in) {
                 Eigen::Map<const RowMat<T>> g(o.grad->data(), n, fo);
                 if (in[0]->requires_grad) {
                   Eigen::Map<const RowMat<T>> wm(in[1]->data->data(), fo, fi);
                   RowMat<T> dx = g * wm;
                   accumulate_grad<T>(*in[0], std::span<const T>(dx.data(), static_cast<std::size_t>(dx.size())));
                 }
                 if (in[1]->requires_grad) {
                   Eigen::Map<const RowMat<T>> xm(in[0]->data->data(), n, fi);
                   RowMat<T> dw = g.transpose() * xm;
                   accumulate_grad<T>(*in[1], std::span<const T>(dw.data(), static_cast<std::size_t>(dw.size())));
                 }
                 if (in.size() > 2 && in[2]->requires_grad) {
                   std::vector<T> db(static_cast<std::size_t>(fo), T(0));
                   for (std::int64_t i = 0; i < n; ++i) {
                     for (std::int64_t j = 0; j < fo; ++j) db[static_cast<std::size_t>(j)] += g(i, j);
                   }
                   accumulate_grad<T>(*in[2], db);
                 }
               });
  return out;
}

template <typename T>
Tensor<T> reshape(const Tensor<T>& x, const Shape& shape) {
  if (shape_numel(shape) != x.numel()) {
    throw ShapeError("cannot reshape " + shape_str(x.shape()) + " to " + shape_str(shape));
  }
  auto impl = std::make_shared<TensorImpl<T>>();
  impl->shape = shape;
  impl->data = x.impl()->data;
  Tensor<T> out(std::move(impl));
  record_op<T>({x.impl_ptr()}, out, [](TensorImpl<T>& o, const std::vector<ImplPtr<T>>& in) {
    accumulate_grad<T>(*in[0], std::span<const T>(o.grad->data(), o.grad->size()));
  });
  return out;
}

template <typename T>
Tensor<T> concat(const std::vector<Tensor<T>>& parts, int axis) {
  if (parts.empty()) throw ShapeError("concat of zero tensors");
  const int nd = parts[0].ndim();
  const int a = detail::normalize_axis(axis, nd);
  Shape shape = parts[0].shape();
  std::int64_t total = 0;
  for (const auto& p : parts) {
    if (p.ndim() != nd) throw ShapeError("concat rank mismatch");
    for (int i = 0; i < nd; ++i) {
      if (i != a && p.dim(i) != shape[static_cast<std::size_t>(i)]) {
        throw ShapeError("concat extent mismatch: " + shape_str(p.shape()) + " vs " + shape_str(shape));
      }
    }
    total += p.dim(a);
  }
  shape[static_cast<std::size_t>(a)] = total;
  const auto outer = detail::extent_product(shape, 0, a);
  const auto inner = detail::extent_product(shape, a + 1, nd);
  auto out = Tensor<T>::zeros(shape);
  std::vector<std::int64_t> lens;
  std::int64_t off = 0;
  for (const auto& p : parts) {
    const auto len = p.dim(a);
    for (std::int64_t o = 0; o < outer; ++o) {
      std::copy_n(p.data() + o * len * inner, len * inner, out.data() + (o * total + off) * inner);
    }
    off += len;
    lens.push_back(len);
  }
  std::vector<ImplPtr<T>> inputs;
  for (const auto& p : parts) inputs.push_back(p.impl_ptr());
  record_op<T>(std::move(inputs), out,
               [outer, inner, total, lens](TensorImpl<T>& o, const std::vector<ImplPtr<T>>& in) {
                 std::int64_t off = 0;
                 for (std::size_t pi = 0; pi < in.size(); ++pi) {
                   const auto len = lens[pi];
                   if (in[pi]->requires_grad) {
                     std::vector<T> d(static_cast<std::size_t>(outer * len * inner));
                     for (std::int64_t oo = 0; oo < outer; ++oo) {
                       std::copy_n(o.grad->data() + (oo * total + off) * inner, len * inner,
                                   d.data() + oo * len * inner);
                     }
                     accumulate_grad<T>(*in[pi], d);
                   }
                   off += len;
                 }
               });
  return out;
}

template <typename T>
Tensor<T> slice(const Tensor<T>& x, int axis, std::int64_t start, std::int64_t length) {
  const int a = detail::normalize_axis(axis, x.ndim());
  const auto ext = x.dim(a);
  if (start < 0 || length <= 0 || start + length > ext) {
    throw ShapeError("slice [" + std::to_string(start) + ", " + std::to_string(start + length) +
                     ") out of bounds for extent " + std::to_string(ext));
  }
  Shape shape = x.shape();
  shape[static_cast<std::size_t>(a)] = length;
  const auto outer = detail::extent_product(shape, 0, a);
  const auto inner = detail::extent_product(shape, a + 1, x.ndim());
  auto out = Tensor<T>::zeros(shape);
  for (std::int64_t o = 0; o < outer; ++o) {
    std::copy_n(x.data() + (o * ext + start) * inner, length * inner, out.data() + o * length * inner);
  }
  record_op<T>({x.impl_ptr()}, out,
               [outer, inner, ext, start, length](TensorImpl<T>& o, const std::vector<ImplPtr<T>>& in) {
                 std::vector<T> d(in[0]->data->size(), T(0));
                 for (std::int64_t oo = 0; oo < outer; ++oo) {
                   std::copy_n(o.grad->data() + oo * length * inner, length * inner,
                               d.data() + (oo * ext + start) * inner);
                 }
                 accumulate_grad<T>(*in[0], d);
               });
  return out;
}

template <typename T>
Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b) {
  require_same_shape(a, b, "add");
  auto out = Tensor<T>::zeros(a.shape());
  for (std::int64_t i = 0; i < a.numel(); ++i) out.data()[i] = a.data()[i] + b.data()[i];
  detail::check_finite(out, "add");
  record_op<T>({a.impl_ptr(), b.impl_ptr()}, out, [](TensorImpl<T>& o, const std::vector<ImplPtr<T>>& in) {
    std::span<const T> g(o.grad->data(), o.grad->size());
    accumulate_grad<T>(*in[0], g);
    accumulate_grad<T>(*in[1], g);
  });
  return out;
}

template <typename T>
Tensor<T> sub(const Tensor<T>& a, const Tensor<T>& b) {
  require_same_shape(a, b, "sub");
  auto out = Tensor<T>::zeros(a.shape());
  for (std::int64_t i = 0; i < a.numel(); ++i) out.data()[i] = a.data()[i] - b.data()[i];
  detail::check_finite(out, "sub");
  record_op<T>({a.impl_ptr(), b.impl_ptr()}, out, [](TensorImpl<T>& o, const std::vector<ImplPtr<T>>& in) {
    std::span<const T> g(o.grad->data(), o.grad->size());
    accumulate_grad<T>(*in[0], g);
    if (in[1]->requires_grad) {
      std::vector<T> neg(g.begin(), g.end());
      for (auto& v : neg) v = -v;
      accumulate_grad<T>(*in[1], neg);
    }
  });
  return out;
}

template <typename T>
Tensor<T> mul(const Tensor<T>& a, const Tensor<T>& b) {
  require_same_shape(a, b, "mul");
  auto out = Tensor<T>::zeros(a.shape());
  for (std::int64_t i = 0; i < a.numel(); ++i) out.data()[i] = a.data()[i] * b.data()[i];
  detail::check_finite(out, "mul");
  record_op<T>({a.impl_ptr(), b.impl_ptr()}, out, [](TensorImpl<T>& o, const std::vector<ImplPtr<T>>& in) {
    const T* g = o.grad->data();
    for (int side = 0; side < 2; ++side) {
      if (!in[static_cast<std::size_t>(side)]->requires_grad) continue;
      const T* other = in[static_cast<std::size_t>(1 - side)]->data->data();
      std::vector<T> d(o.grad->size());
      for (std::size_t i = 0; i < d.size(); ++i) d[i] = g[i] * other[i];
      accumulate_grad<T>(*in[static_cast<std::size_t>(side)], d);
    }
  });
  return out;
}

template <typename T>
Tensor<T> scale(const Tensor<T>& x, double factor) {
  const T f = static_cast<T>(factor);
  return unary(x, "scale", [f](T v) { return v * f; }, [f](T, T) { return f; });
}

template <typename T>
Tensor<T> add_scalar(const Tensor<T>& x, double value) {
  const T c = static_cast<T>(value);
  return unary(x, "add_scalar", [c](T v) { return v + c; }, [](T, T) { return T(1); });
}

template <typename T>
Tensor<T> sum(const Tensor<T>& x) {
  double s = 0.0;
  for (auto v : x.values()) s += v;
  auto out = Tensor<T>::scalar(static_cast<T>(s));
  detail::check_finite(out, "sum");
  record_op<T>({x.impl_ptr()}, out, [](TensorImpl<T>& o, const std::vector<ImplPtr<T>>& in) {
    std::vector<T> d(in[0]->data->size(), o.grad->data()[0]);
    accumulate_grad<T>(*in[0], d);
  });
  return out;
}

template <typename T>
Tensor<T> mean(const Tensor<T>& x) {
  return scale(sum(x), 1.0 / static_cast<double>(x.numel()));
}

template <typename T>
Tensor<T> global_avg_pool(const Tensor<T>& x) {
  if (x.ndim() < 3) throw ShapeError("global_avg_pool expects [N,C,...]");
  const auto n = x.dim(0), c = x.dim(1);
  const auto sp = detail::extent_product(x.shape(), 2, x.ndim());
  auto out = Tensor<T>::zeros({n, c});
  for (std::int64_t i = 0; i < n * c; ++i) {
    double s = 0.0;
    for (std::int64_t k = 0; k < sp; ++k) s += x.data()[i * sp + k];
    out.data()[i] = static_cast<T>(s / static_cast<double>(sp));
  }
  record_op<T>({x.impl_ptr()}, out, [sp](TensorImpl<T>& o, const std::vector<ImplPtr<T>>& in) {
    std::vector<T> d(in[0]->data->size());
    const T inv = T(1) / static_cast<T>(sp);
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = o.grad->data()[i / static_cast<std::size_t>(sp)] * inv;
    accumulate_grad<T>(*in[0], d);
  });
  return out;
}

template <typename T>
Tensor<T> l1_loss(const Tensor<T>& a, const Tensor<T>& b) {
  require_same_shape(a, b, "l1_loss");
  const auto n = a.numel();
  double s = 0.0;
  for (std::int64_t i = 0; i < n; ++i) s += std::abs(static_cast<double>(a.data()[i]) - b.data()[i]);
  auto out = Tensor<T>::scalar(static_cast<T>(s / static_cast<double>(n)));
  detail::check_finite(out, "l1_loss");
  record_op<T>({a.impl_ptr(), b.impl_ptr()}, out, [n](TensorImpl<T>& o, const std::vector<ImplPtr<T>>& in) {
    const T g = o.grad->data()[0] / static_cast<T>(n);
    const T* ad = in[0]->data->data();
    const T* bd = in[1]->data->data();
    std::vector<T> d(static_cast<std::size_t>(n));
    for (std::int64_t i = 0; i < n; ++i) {
      const T diff = ad[i] - bd[i];
      d[static_cast<std::size_t>(i)] = diff > T(0) ? g : (diff < T(0) ? -g : T(0));
    }
    accumulate_grad<T>(*in[0], d);
    if (in[1]->requires_grad) {
      for (auto& v : d) v = -v;
      accumulate_grad<T>(*in[1], d);
    }
  });
  return out;
}

template <typename T>
Tensor<T> bce_with_logits(const Tensor<T>& logits, double target) {
  const auto n = logits.numel();
  double s = 0.0;
  for (std::int64_t i = 0; i < n; ++i) {
    const double x = logits.data()[i];
    s += softplus(x) - target * x;
  }
  auto out = Tensor<T>::scalar(static_cast<T>(s / static_cast<double>(n)));
  detail::check_finite(out, "bce_with_logits");
  record_op<T>({logits.impl_ptr()}, out, [n, target](TensorImpl<T>& o, const std::vector<ImplPtr<T>>& in) {
    const double g = static_cast<double>(o.grad->data()[0]) / static_cast<double>(n);
    std::vector<T> d(static_cast<std::size_t>(n));
    for (std::int64_t i = 0; i < n; ++i) {
      const double x = in[0]->data->data()[i];
      d[static_cast<std::size_t>(i)] = static_cast<T>(g * (1.0 / (1.0 + std::exp(-x)) - target));
    }
    accumulate_grad<T>(*in[0], d);
  });
  return out;
}

template <typename T>
Tensor<T> cross_entropy(const Tensor<T>& logits, std::span<const int> labels) {
  if (logits.ndim() != 2) throw ShapeError("cross_entropy expects [N,K] logits");
  const auto n = logits.dim(0), k = logits.dim(1);
  if (static_cast<std::int64_t>(labels.size()) != n) throw ShapeError("cross_entropy label count mismatch");
  for (int l : labels) {
    if (l < 0 || l >= k) throw ShapeError("class index " + std::to_string(l) + " out of range");
  }
  std::vector<T> prob(static_cast<std::size_t>(n * k));
  double loss = 0.0;
  for (std::int64_t i = 0; i < n; ++i) {
    const T* row = logits.data() + i * k;
    const double mx = *std::max_element(row, row + k);
    double z = 0.0;
    for (std::int64_t j = 0; j < k; ++j) z += std::exp(row[j] - mx);
    for (std::int64_t j = 0; j < k; ++j) {
      prob[static_cast<std::size_t>(i * k + j)] = static_cast<T>(std::exp(row[j] - mx) / z);
    }
    loss += std::log(z) + mx - row[labels[static_cast<std::size_t>(i)]];
  }
  auto out = Tensor<T>::scalar(static_cast<T>(loss / static_cast<double>(n)));
  detail::check_finite(out, "cross_entropy");
  std::vector<int> lab(labels.begin(), labels.end());
  record_op<T>({logits.impl_ptr()}, out,
               [n, k, prob = std::move(prob), lab = std::move(lab)](
                   TensorImpl<T>& o, const std::vector<ImplPtr<T>>& in) {
                 const T g = o.grad->data()[0] / static_cast<T>(n);
                 std::vector<T> d(prob);
                 for (std::int64_t i = 0; i < n; ++i) d[static_cast<std::size_t>(i * k + lab[static_cast<std::size_t>(i)])] -= T(1);
                 for (auto& v : d) v *= g;
                 accumulate_grad<T>(*in[0], d);
               });
  return out;
}

#define HAGAN_INSTANTIATE(T)                                                                     \
  template Tensor<T> relu(const Tensor<T>&);                                                     \
  template Tensor<T> leaky_relu(const Tensor<T>&, double);                                       \
  template Tensor<T> elu(const Tensor<T>&, double);                                              \
  template Tensor<T> tanh(const Tensor<T>&);                                                     \
  template Tensor<T> sigmoid(const Tensor<T>&);                                                  \
  template Tensor<T> softmax(const Tensor<T>&, int);                                             \
  template Tensor<T> dense(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&);                \
  template Tensor<T> reshape(const Tensor<T>&, const Shape&);                                    \
  template Tensor<T> concat(const std::vector<Tensor<T>>&, int);                                 \
  template Tensor<T> slice(const Tensor<T>&, int, std::int64_t, std::int64_t);                   \
  template Tensor<T> add(const Tensor<T>&, const Tensor<T>&);                                    \
  template Tensor<T> sub(const Tensor<T>&, const Tensor<T>&);                                    \
  template Tensor<T> mul(const Tensor<T>&, const Tensor<T>&);                                    \
  template Tensor<T> scale(const Tensor<T>&, double);                                            \
  template Tensor<T> add_scalar(const Tensor<T>&, double);                                       \
  template Tensor<T> sum(const Tensor<T>&);                                                      \
  template Tensor<T> mean(const Tensor<T>&);                                                     \
  template Tensor<T> global_avg_pool(const Tensor<T>&);                                          \
  template Tensor<T> l1_loss(const Tensor<T>&, const Tensor<T>&);                                \
  template Tensor<T> bce_with_logits(const Tensor<T>&, double);                                  \
  template Tensor<T> cross_entropy(const Tensor<T>&, std::span<const int>);
HAGAN_INSTANTIATE(float)
HAGAN_INSTANTIATE(double)
#undef HAGAN_INSTANTIATE

}  // namespace hagan
