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

#include "hagan/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "hagan/errors.hpp"

namespace hagan {
namespace {
thread_local bool t_finite_checks = true;
}  // namespace

void set_finite_checks(bool enabled) { t_finite_checks = enabled; }
bool finite_checks_enabled() { return t_finite_checks; }

std::int64_t shape_numel(const Shape& shape) {
  std::int64_t n = 1;
  for (auto e : shape) n *= e;
  return n;
}

std::string shape_str(const Shape& shape) {
  std::ostringstream os;
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << 'x';
    os << shape[i];
  }
  return os.str();
}

template <typename T>
Storage<T>::Storage(std::size_t n, MemTag tag)
    : values_(n, T(0)), tag_(tag), counter_(current_counter()) {
  if (counter_) counter_->on_alloc(tag_, static_cast<std::int64_t>(n * sizeof(T)));
}

template <typename T>
Storage<T>::~Storage() {
  if (counter_) counter_->on_free(tag_, static_cast<std::int64_t>(values_.size() * sizeof(T)));
}

template <typename T>
Tensor<T> Tensor<T>::zeros(const Shape& shape, MemTag tag) {
  for (auto e : shape) {
    if (e <= 0) throw ShapeError("tensor extents must be positive: " + shape_str(shape));
  }
  auto impl = std::make_shared<TensorImpl<T>>();
  impl->shape = shape;
  impl->data = std::make_shared<Storage<T>>(static_cast<std::size_t>(shape_numel(shape)), tag);
  return Tensor(std::move(impl));
}

template <typename T>
Tensor<T> Tensor<T>::full(const Shape& shape, T value, MemTag tag) {
  auto t = zeros(shape, tag);
  std::fill(t.values().begin(), t.values().end(), value);
  return t;
}

template <typename T>
Tensor<T> Tensor<T>::from(const Shape& shape, std::span<const T> values, MemTag tag) {
  if (static_cast<std::int64_t>(values.size()) != shape_numel(shape)) {
    throw ShapeError("value count " + std::to_string(values.size()) +
                     " does not match shape " + shape_str(shape));
  }
  auto t = zeros(shape, tag);
  std::copy(values.begin(), values.end(), t.values().begin());
  return t;
}

template <typename T>
Tensor<T> Tensor<T>::scalar(T value, MemTag tag) {
  return full(Shape{1}, value, tag);
}

template <typename T>
std::int64_t Tensor<T>::dim(int axis) const {
  const int n = ndim();
  if (axis < 0) axis += n;
  if (axis < 0 || axis >= n) throw ShapeError("axis out of range for " + shape_str(shape()));
  return impl_->shape[static_cast<std::size_t>(axis)];
}

template <typename T>
T Tensor<T>::item() const {
  if (numel() != 1) throw ShapeError("item() on non-scalar tensor " + shape_str(shape()));
  return impl_->data->data()[0];
}

template <typename T>
Tensor<T>& Tensor<T>::set_requires_grad(bool on) {
  if (!is_leaf()) throw AutodiffError("requires_grad can only be set on leaf tensors");
  impl_->requires_grad = on;
  if (!on) impl_->grad.reset();
  return *this;
}

template <typename T>
std::span<const T> Tensor<T>::grad() const {
  if (!impl_->grad) return {};
  return {impl_->grad->data(), impl_->grad->size()};
}

template <typename T>
std::span<T> Tensor<T>::mutable_grad() {
  if (!impl_->grad) return {};
  return {impl_->grad->data(), impl_->grad->size()};
}

template <typename T>
std::span<T> Tensor<T>::ensure_grad() {
  if (!impl_->grad) {
    impl_->grad = std::make_shared<Storage<T>>(static_cast<std::size_t>(numel()), MemTag::kGradient);
  }
  return mutable_grad();
}

template <typename T>
void Tensor<T>::zero_grad() {
  if (impl_->grad) std::fill_n(impl_->grad->data(), impl_->grad->size(), T(0));
}

template <typename T>
Tensor<T> Tensor<T>::detach() const {
  auto impl = std::make_shared<TensorImpl<T>>();
  impl->shape = impl_->shape;
  impl->data = impl_->data;
  return Tensor(std::move(impl));
}

template <typename T>
Tensor<T> Tensor<T>::clone(MemTag tag) const {
  return from(shape(), values(), tag);
}

template <typename To, typename From>
Tensor<To> cast(const Tensor<From>& x, MemTag tag) {
  auto out = Tensor<To>::zeros(x.shape(), tag);
  std::transform(x.values().begin(), x.values().end(), out.values().begin(),
                 [](From v) { return static_cast<To>(v); });
  return out;
}

template <typename T>
bool all_finite(std::span<const T> values) {
  return std::all_of(values.begin(), values.end(), [](T v) { return std::isfinite(v); });
}

template class Storage<float>;
template class Storage<double>;
template class Tensor<float>;
template class Tensor<double>;
template Tensor<float> cast<float, double>(const Tensor<double>&, MemTag);
template Tensor<double> cast<double, float>(const Tensor<float>&, MemTag);
template Tensor<float> cast<float, float>(const Tensor<float>&, MemTag);
template Tensor<double> cast<double, double>(const Tensor<double>&, MemTag);
template bool all_finite<float>(std::span<const float>);
template bool all_finite<double>(std::span<const double>);

}  // namespace hagan
