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
#include <functional>
#include <string>
#include <vector>

#include "hagan/memory.hpp"
#include "hagan/trainer.hpp"

namespace hagan {

enum class MemoryMode { kTrainAmortized, kTrainFull, kInference };
std::string_view mode_name(MemoryMode mode);

// Byte counts of tensor payloads. Component fields are peaks of their own
// category; peak_total is the peak of their sum, so it can be smaller than
// the sum of the component peaks.
struct MemoryReport {
  MemoryMode mode = MemoryMode::kTrainAmortized;
  Ratio multiplier{1, 8};
  std::int64_t params_bytes = 0;  // parameters and buffers
  std::int64_t optimizer_bytes = 0;
  std::int64_t grads_bytes = 0;
  std::int64_t activations_bytes = 0;
  std::int64_t data_bytes = 0;
  std::int64_t peak_total = 0;
  // Analytic only: activations recorded by one taped forward of G^H and E^H
  // at the training window, the part of the model that amortisation shrinks.
  std::int64_t high_branch_bytes = 0;
  std::string config;

  // Two-column "field  value" table.
  std::string table() const;
};

// Live-set model of one training iteration (or one generate_full call): every
// tensor the trainer allocates is replayed by shape, kept alive while a handle
// or a tape node refers to it, and released the way the tape releases it
// during backward. kTrainFull trains on the whole depth (multiplier 1).
MemoryReport analytic_memory(const TrainConfig& cfg, MemoryMode mode);

// Counters over whatever `run` allocates while it executes.
MemoryReport measured_memory(const std::function<void()>& run);

// Builds a trainer and runs one iteration (or one generation) on synthetic
// data of the right extents, all inside a fresh counter.
MemoryReport measure_step(const TrainConfig& cfg, MemoryMode mode);

struct SweepRow {
  std::int64_t resolution = 0;
  std::int64_t parameters = 0;
  std::int64_t train_peak = 0;  // analytic, amortised
  std::int64_t full_peak = 0;   // analytic, full-volume training
};

// One row per resolution; low_resolution follows as resolution / 4.
std::vector<SweepRow> resolution_sweep(const TrainConfig& base, const std::vector<std::int64_t>& resolutions);
std::string sweep_table(const std::vector<SweepRow>& rows);

}  // namespace hagan
