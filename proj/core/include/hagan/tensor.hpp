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

#include <cstdint>
#include <memory>
#include <new>
#include <span>
#include <string>
#include <vector>

#include "hagan/memory.hpp"

namespace hagan {

// Extents, outermost first. Volumetric tensors are [N, C, D, H, W].
using Shape = std::vector<std::int64_t>;

std::int64_t shape_numel(const Shape& shape);
std::string shape_str(const Shape& shape);

// 64-byte aligned allocation. Eigen picks vectorised code paths by pointer
// alignment, so payloads must not inherit whatever alignment the heap hands
// out if results are to be bitwise reproducible.
template <typename T>
struct AlignedAllocator {
  using value_type = T;
  static constexpr std::align_val_t kAlign{64};

  AlignedAllocator() = default;
  template <typename U>
  AlignedAllocator(const AlignedAllocator<U>&) {}

  T* allocate(std::size_t n) { return static_cast<T*>(::operator new(n * sizeof(T), kAlign)); }
  void deallocate(T* p, std::size_t) { ::operator delete(p, kAlign); }
  template <typename U>
  bool operator==(const AlignedAllocator<U>&) const { return true; }
};

template <typename T>
using AlignedVector = std::vector<T, AlignedAllocator<T>>;

// Owned, zero-initialised payload that reports its size to the memory counter
// that was active when it was created.
template <typename T>
class Storage {
 public:
  Storage(std::size_t n, MemTag tag);
  ~Storage();
  Storage(const Storage&) = delete;
  Storage& operator=(const Storage&) = delete;

  T* data() { return values_.data(); }
  const T* data() const { return values_.data(); }
  std::size_t size() const { return values_.size(); }
  MemTag tag() const { return tag_; }

 private:
  AlignedVector<T> values_;
  MemTag tag_;
  std::shared_ptr<MemoryCounter> counter_;
};

template <typename T>
struct TensorImpl {
  Shape shape;
  std::shared_ptr<Storage<T>> data;
  std::shared_ptr<Storage<T>> grad;
  bool requires_grad = false;
  // Producing tape and node index; null/-1 for leaves.
  const void* tape = nullptr;
  std::int64_t node = -1;
};

// Shared handle to a dense tensor. Copies alias the same payload.
template <typename T>
class Tensor {
 public:
  using Scalar = T;

  Tensor() = default;
  explicit Tensor(std::shared_ptr<TensorImpl<T>> impl) : impl_(std::move(impl)) {}

  static Tensor zeros(const Shape& shape, MemTag tag = MemTag::kActivation);
  static Tensor full(const Shape& shape, T value, MemTag tag = MemTag::kActivation);
  static Tensor from(const Shape& shape, std::span<const T> values,
                     MemTag tag = MemTag::kActivation);
  static Tensor scalar(T value, MemTag tag = MemTag::kActivation);

  bool defined() const { return impl_ != nullptr; }
  const Shape& shape() const { return impl_->shape; }
  int ndim() const { return static_cast<int>(impl_->shape.size()); }
  std::int64_t dim(int axis) const;
  std::int64_t numel() const { return shape_numel(impl_->shape); }

  std::span<T> values() { return {impl_->data->data(), static_cast<std::size_t>(numel())}; }
  std::span<const T> values() const {
    return {impl_->data->data(), static_cast<std::size_t>(numel())};
  }
  T* data() { return impl_->data->data(); }
  const T* data() const { return impl_->data->data(); }
  T item() const;

  bool requires_grad() const { return impl_->requires_grad; }
  Tensor& set_requires_grad(bool on);
  bool is_leaf() const { return impl_->node < 0; }
  bool has_grad() const { return impl_->grad != nullptr; }
  std::span<const T> grad() const;
  std::span<T> mutable_grad();
  // Allocates a zero gradient buffer when absent.
  std::span<T> ensure_grad();
  void zero_grad();
  // Releases the gradient buffer.
  void clear_grad() { impl_->grad.reset(); }

  // New handle sharing the payload, cut from any tape.
  Tensor detach() const;
  Tensor clone(MemTag tag = MemTag::kActivation) const;

  TensorImpl<T>* impl() const { return impl_.get(); }
  const std::shared_ptr<TensorImpl<T>>& impl_ptr() const { return impl_; }

 private:
  std::shared_ptr<TensorImpl<T>> impl_;
};

template <typename To, typename From>
Tensor<To> cast(const Tensor<From>& x, MemTag tag = MemTag::kActivation);

// True when every value is finite.
template <typename T>
bool all_finite(std::span<const T> values);

// Per-thread switch for checking op outputs for NaN/Inf (on by default).
void set_finite_checks(bool enabled);
bool finite_checks_enabled();

extern template class Storage<float>;
extern template class Storage<double>;
extern template class Tensor<float>;
extern template class Tensor<double>;

}  // namespace hagan
