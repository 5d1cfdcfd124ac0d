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

#include <functional>
#include <memory>
#include <vector>

#include "hagan/tensor.hpp"

namespace hagan {

template <typename T>
using ImplPtr = std::shared_ptr<TensorImpl<T>>;

// Backward rule of one recorded op. Receives the output (whose grad buffer is
// populated) and the op inputs, and accumulates into input grads.
template <typename T>
using BackwardFn = std::function<void(TensorImpl<T>& out, const std::vector<ImplPtr<T>>& inputs)>;

// Ordered record of executed ops. Ops record onto the tape that is active on
// the current thread (see GradientTape::Recording); with no active tape they
// run without recording, which is the inference path.
template <typename T>
class GradientTape {
 public:
  struct Node {
    std::vector<ImplPtr<T>> inputs;
    ImplPtr<T> output;
    BackwardFn<T> backward;
  };

  // RAII activation; nests by restoring the previously active tape.
  class Recording {
   public:
    explicit Recording(GradientTape& tape);
    ~Recording();
    Recording(const Recording&) = delete;
    Recording& operator=(const Recording&) = delete;

   private:
    GradientTape* previous_;
  };

  GradientTape() = default;
  ~GradientTape();
  GradientTape(const GradientTape&) = delete;
  GradientTape& operator=(const GradientTape&) = delete;

  Recording record() { return Recording(*this); }

  // Populates grads of every requires_grad leaf reachable from `loss`, then
  // consumes the tape. Throws AutodiffError for non-scalar or detached losses.
  void backward(const Tensor<T>& loss);

  // Drops all nodes and the activation references they hold.
  void clear();

  std::size_t size() const { return nodes_.size(); }
  bool empty() const { return nodes_.empty(); }

  // Number of nodes whose backward ran during the last backward() call.
  std::size_t last_visited() const { return last_visited_; }

  static GradientTape* active();

  // Used by ops: appends a node and links `output` to it.
  void push(std::vector<ImplPtr<T>> inputs, const ImplPtr<T>& output, BackwardFn<T> backward);

 private:
  std::vector<Node> nodes_;
  std::size_t last_visited_ = 0;
};

// Adds `delta` into the grad buffer of `impl` (allocating it) when the tensor
// requires grad.
template <typename T>
void accumulate_grad(TensorImpl<T>& impl, std::span<const T> delta);

// Records `output` as produced from `inputs` if a tape is active and any input
// requires grad. Returns true when recorded.
template <typename T>
bool record_op(std::vector<ImplPtr<T>> inputs, Tensor<T>& output, BackwardFn<T> backward);

// True if a tape is active and any of the tensors requires grad.
template <typename T>
bool should_record(std::initializer_list<const Tensor<T>*> inputs);

extern template class GradientTape<float>;
extern template class GradientTape<double>;

}  // namespace hagan
