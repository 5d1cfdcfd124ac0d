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

#include <array>
#include <cstdint>
#include <memory>
#include <string_view>

namespace hagan {

// Category of a tensor payload for memory accounting.
enum class MemTag : std::uint8_t {
  kParameter = 0,
  kActivation,
  kGradient,
  kOptimizer,
  kData,
};
inline constexpr std::size_t kNumMemTags = 5;

std::string_view to_string(MemTag tag);

// Live/peak byte counters for tensor payloads. One counter belongs to one run;
// buffers allocated while a CounterScope is active report to that counter for
// their whole lifetime.
class MemoryCounter {
 public:
  void on_alloc(MemTag tag, std::int64_t bytes);
  void on_free(MemTag tag, std::int64_t bytes);

  std::int64_t live(MemTag tag) const { return live_[index(tag)]; }
  std::int64_t peak(MemTag tag) const { return peak_[index(tag)]; }
  std::int64_t live_total() const { return live_total_; }
  std::int64_t peak_total() const { return peak_total_; }

  // Restart peak tracking from the current live values.
  void reset_peaks();

 private:
  static std::size_t index(MemTag tag) { return static_cast<std::size_t>(tag); }

  std::array<std::int64_t, kNumMemTags> live_{};
  std::array<std::int64_t, kNumMemTags> peak_{};
  std::int64_t live_total_ = 0;
  std::int64_t peak_total_ = 0;
};

// Installs a fresh counter as the current thread's allocation sink.
class CounterScope {
 public:
  CounterScope();
  ~CounterScope();
  CounterScope(const CounterScope&) = delete;
  CounterScope& operator=(const CounterScope&) = delete;

  MemoryCounter& counter() { return *counter_; }
  const MemoryCounter& counter() const { return *counter_; }

 private:
  std::shared_ptr<MemoryCounter> counter_;
  std::shared_ptr<MemoryCounter> previous_;
};

// Counter active on this thread, or null.
std::shared_ptr<MemoryCounter> current_counter();

}  // namespace hagan
