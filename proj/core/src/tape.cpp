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

#include "hagan/tape.hpp"

#include <algorithm>

#include "hagan/errors.hpp"

namespace hagan {
namespace {
template <typename T>
thread_local GradientTape<T>* t_active_tape = nullptr;
}  // namespace

template <typename T>
GradientTape<T>::Recording::Recording(GradientTape& tape) : previous_(t_active_tape<T>) {
  t_active_tape<T> = &tape;
}

template <typename T>
GradientTape<T>::Recording::~Recording() {
  t_active_tape<T> = previous_;
}

template <typename T>
GradientTape<T>::~GradientTape() {
  if (t_active_tape<T> == this) t_active_tape<T> = nullptr;
  clear();
}

template <typename T>
GradientTape<T>* GradientTape<T>::active() {
  return t_active_tape<T>;
}

template <typename T>
void GradientTape<T>::push(std::vector<ImplPtr<T>> inputs, const ImplPtr<T>& output,
                           BackwardFn<T> backward) {
  output->requires_grad = true;
  output->tape = this;
  output->node = static_cast<std::int64_t>(nodes_.size());
  nodes_.push_back(Node{std::move(inputs), output, std::move(backward)});
}

template <typename T>
void GradientTape<T>::clear() {
  for (auto& node : nodes_) {
    if (node.output) {
      node.output->tape = nullptr;
      node.output->node = -1;
      node.output->requires_grad = false;
    }
  }
  nodes_.clear();
}

template <typename T>
void GradientTape<T>::backward(const Tensor<T>& loss) {
  if (!loss.defined() || loss.numel() != 1) {
    throw AutodiffError("backward() requires a scalar loss");
  }
  auto* impl = loss.impl();
  if (impl->tape != this || impl->node < 0 ||
      impl->node >= static_cast<std::int64_t>(nodes_.size())) {
    throw AutodiffError("loss is detached from this tape");
  }
  impl->grad = std::make_shared<Storage<T>>(1, MemTag::kGradient);
  impl->grad->data()[0] = T(1);

  last_visited_ = 0;
  for (auto i = impl->node; i >= 0; --i) {
    auto& node = nodes_[static_cast<std::size_t>(i)];
    if (node.output->grad) {
      node.backward(*node.output, node.inputs);
      ++last_visited_;
    }
    // The output gradient is no longer needed once propagated; activations
    // are released as soon as their consumer has run backward.
    node.output->grad.reset();
    node.output->tape = nullptr;
    node.output->node = -1;
    node.output->requires_grad = false;
    node.inputs.clear();
    node.backward = nullptr;
    node.output.reset();
  }
  nodes_.clear();
}

template <typename T>
void accumulate_grad(TensorImpl<T>& impl, std::span<const T> delta) {
  if (!impl.requires_grad) return;
  if (!impl.grad) {
    impl.grad = std::make_shared<Storage<T>>(delta.size(), MemTag::kGradient);
    std::copy(delta.begin(), delta.end(), impl.grad->data());
    return;
  }
  T* g = impl.grad->data();
  for (std::size_t i = 0; i < delta.size(); ++i) g[i] += delta[i];
}

template <typename T>
bool should_record(std::initializer_list<const Tensor<T>*> inputs) {
  if (GradientTape<T>::active() == nullptr) return false;
  return std::any_of(inputs.begin(), inputs.end(),
                     [](const Tensor<T>* t) { return t && t->defined() && t->requires_grad(); });
}

template <typename T>
bool record_op(std::vector<ImplPtr<T>> inputs, Tensor<T>& output, BackwardFn<T> backward) {
  auto* tape = GradientTape<T>::active();
  if (tape == nullptr) return false;
  const bool any = std::any_of(inputs.begin(), inputs.end(),
                               [](const ImplPtr<T>& p) { return p && p->requires_grad; });
  if (!any) return false;
  tape->push(std::move(inputs), output.impl_ptr(), std::move(backward));
  return true;
}

template class GradientTape<float>;
template class GradientTape<double>;
template void accumulate_grad<float>(TensorImpl<float>&, std::span<const float>);
template void accumulate_grad<double>(TensorImpl<double>&, std::span<const double>);
template bool should_record<float>(std::initializer_list<const Tensor<float>*>);
template bool should_record<double>(std::initializer_list<const Tensor<double>*>);
template bool record_op<float>(std::vector<ImplPtr<float>>, Tensor<float>&, BackwardFn<float>);
template bool record_op<double>(std::vector<ImplPtr<double>>, Tensor<double>&, BackwardFn<double>);

}  // namespace hagan
