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

#include "hagan/memory.hpp"

#include <algorithm>

namespace hagan {
namespace {
thread_local std::shared_ptr<MemoryCounter> t_counter;
}  // namespace

std::string_view to_string(MemTag tag) {
  switch (tag) {
    case MemTag::kParameter: return "parameters";
    case MemTag::kActivation: return "activations";
    case MemTag::kGradient: return "gradients";
    case MemTag::kOptimizer: return "optimizer";
    case MemTag::kData: return "data";
  }
  return "unknown";
}

void MemoryCounter::on_alloc(MemTag tag, std::int64_t bytes) {
  const auto i = index(tag);
  live_[i] += bytes;
  peak_[i] = std::max(peak_[i], live_[i]);
  live_total_ += bytes;
  peak_total_ = std::max(peak_total_, live_total_);
}

void MemoryCounter::on_free(MemTag tag, std::int64_t bytes) {
  live_[index(tag)] -= bytes;
  live_total_ -= bytes;
}

void MemoryCounter::reset_peaks() {
  peak_ = live_;
  peak_total_ = live_total_;
}

CounterScope::CounterScope()
    : counter_(std::make_shared<MemoryCounter>()), previous_(t_counter) {
  t_counter = counter_;
}

CounterScope::~CounterScope() { t_counter = previous_; }

std::shared_ptr<MemoryCounter> current_counter() { return t_counter; }

}  // namespace hagan
