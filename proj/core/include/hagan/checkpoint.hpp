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
#include <string>
#include <vector>

#include "hagan/param_store.hpp"

namespace hagan {

// Everything in a checkpoint besides the tensors.
struct CheckpointMeta {
  std::string config;  // run configuration echo, "key = value" lines
  std::string rng_state;
  std::int64_t step = 0;
  std::vector<double> class_prior;
};

// Checkpoint file: "HAGC", u16 version, config echo, step, rng state, class
// prior, then a named tensor table (name, trainable flag, shape, float32
// payload, and for trainable entries the Adam step and both moments), closed
// by a CRC-32 of everything before it. Payloads are always stored as float32.
template <typename T>
void save_checkpoint(const std::string& path, const ParamStore<T>& store, const CheckpointMeta& meta);

// Restores into an existing store whose names and shapes must match the file
// exactly (ShapeError otherwise).
template <typename T>
CheckpointMeta load_checkpoint(const std::string& path, ParamStore<T>& store);

// Reads only the metadata (still verifies magic, version and checksum).
CheckpointMeta read_checkpoint_meta(const std::string& path);

}  // namespace hagan
