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
#include <memory>
#include <string>
#include <vector>

#include "hagan/phantom.hpp"
#include "hagan/run_config.hpp"
#include "hagan/superres.hpp"
#include "hagan/trainer.hpp"

namespace hagan {

// Seed of the frozen feature extractor behind every MMD / Fréchet number.
inline constexpr std::uint64_t kExtractorSeed = 12345;

using Progress = std::function<void(const std::string&)>;

// `n` volumes from G^H(G^A(z)) with latents drawn from `seed`; a conditional
// model cycles through `labels`.
std::vector<Volume> sample_volumes(Trainer<float>& model, int n, std::uint64_t seed,
                                   const std::vector<int>& labels = {});

struct GanRunResult {
  bool finite = true;
  std::int64_t steps = 0;
  // Distribution metrics against the held-out split. The RBF bandwidth is the
  // median pairwise distance of (held-out real ∪ step-0 samples), frozen and
  // reused for the final evaluation.
  double bandwidth = 0.0;
  double mmd_start = 0.0, mmd_end = 0.0;
  double fid_start = 0.0, fid_end = 0.0;
  double recon_l1 = 0.0;  // mean over held-out volumes
  // Ridge of organ voxel count on encoded latents (fit on train, scored on both).
  double r2_train = 0.0, r2_test = 0.0;
  // Organ count predicted from E(G(z̄ + t w)) for t over the traversal grid.
  std::vector<double> traversal_t, traversal_pred;
  std::string log_path, checkpoint_path;
};

// Phantom training set, training loop with a step-by-step run log, then the
// evaluation above. Writes run.jsonl, model.ckpt and manifest.json to `dir`.
// A non-finite loss leaves snapshot.ckpt, snapshot.jsonl (the failing step
// and last finite report) and snapshot.txt (the error, naming the phase) in
// `dir` before the NumericError propagates.
GanRunResult run_gan_experiment(const RunConfig& cfg, const std::string& dir, const Progress& progress = {});

struct SrRunResult {
  bool finite = true;
  SRReport start, end;
  std::string log_path, checkpoint_path;
};

// Run configuration embedded in a checkpoint, and models restored from one.
RunConfig checkpoint_config(const std::string& path);
std::unique_ptr<Trainer<float>> load_trainer(const std::string& path);
std::unique_ptr<SRTrainer<float>> load_sr_trainer(const std::string& path);

// Paired phantoms (a separate seed range from the GAN set), SR training with a
// run log, and held-out SR vs trilinear metrics before and after. Writes
// sr_run.jsonl, sr_model.ckpt and manifest.json to `dir`.
SrRunResult run_sr_experiment(const RunConfig& cfg, const std::string& dir, const Progress& progress = {});

}  // namespace hagan
