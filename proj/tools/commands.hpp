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
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "hagan/run_config.hpp"

namespace hagan::cli {

// Bad flags or missing required inputs; maps to exit code 1.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Options every subcommand accepts. `overrides` are "--key value" pairs for
// RunConfig fields, left over after the subcommand's own flags are parsed.
struct Common {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::vector<std::string> overrides;
};

RunConfig resolve_config(const Common& c, bool needs_seed);

struct TrainArgs {
  Common common;
};
struct GenerateArgs {
  Common common;
  std::string checkpoint;
  int n = 8;
  int label = -1;
};
struct EncodeArgs {
  Common common;
  std::string checkpoint, in;
};
struct ReconstructArgs {
  Common common;
  std::string checkpoint, in;
};
struct InterpolateArgs {
  Common common;
  std::string checkpoint;
  int steps = 5;
};
struct FitDirectionArgs {
  Common common;
  std::string checkpoint, target = "organ_voxels";
  int count = 100;
  std::uint64_t phantom_seed = 20000;
  int traverse = 0;
};
struct EvalArgs {
  Common common;
  std::string real, fake, metrics = "fid,mmd";
  double bandwidth = 0.0;
};
struct MemsimArgs {
  Common common;
  std::string multiplier;
  std::int64_t resolution = 0;
  std::string mode = "analytic";
  std::vector<std::int64_t> sweep;
};
struct SrTrainArgs {
  Common common;
};
struct SrEvalArgs {
  Common common;
  std::string checkpoint, in;
};
struct PhantomsArgs {
  Common common;
  int n = 10;
  std::int64_t extent = 64;
  bool masks = false;
};
struct AugmentArgs {
  Common common;
  std::string checkpoint;
  std::int64_t resolution = 32;
  int classifier_steps = 700;
};

int run_train(const TrainArgs& a);
int run_generate(const GenerateArgs& a);
int run_encode(const EncodeArgs& a);
int run_reconstruct(const ReconstructArgs& a);
int run_interpolate(const InterpolateArgs& a);
int run_fit_direction(const FitDirectionArgs& a);
int run_eval(const EvalArgs& a);
int run_memsim(const MemsimArgs& a);
int run_sr_train(const SrTrainArgs& a);
int run_sr_eval(const SrEvalArgs& a);
int run_phantoms(const PhantomsArgs& a);
int run_augment(const AugmentArgs& a);

}  // namespace hagan::cli
