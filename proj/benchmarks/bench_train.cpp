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

#include <benchmark/benchmark.h>

#include "hagan/inference.hpp"
#include "hagan/phantom.hpp"
#include "hagan/trainer.hpp"

namespace {

hagan::Dataset phantoms(std::int64_t extent, int n) {
  hagan::Dataset d;
  for (int i = 0; i < n; ++i) d.volumes.push_back(hagan::phantom_generate(i, i % 5, extent).volume);
  return d;
}

// One four-phase iteration at the desk configuration; arg is the multiplier
// denominator.
void BM_TrainStep(benchmark::State& state) {
  hagan::TrainConfig cfg;
  cfg.seed = 1;
  cfg.net.subvol_multiplier = {1, state.range(0)};
  hagan::Trainer<float> model(cfg);
  const auto data = phantoms(cfg.net.full_resolution, 4);
  for (auto _ : state) benchmark::DoNotOptimize(model.step(data));
}
BENCHMARK(BM_TrainStep)->Arg(8)->Arg(2)->Unit(benchmark::kMillisecond);

void BM_GenerateFull(benchmark::State& state) {
  hagan::TrainConfig cfg;
  hagan::Trainer<float> model(cfg);
  hagan::Rng rng(3);
  const auto z = hagan::sample_latent<float>(rng, 1, cfg.net.latent_dim);
  for (auto _ : state) benchmark::DoNotOptimize(hagan::generate_full(model, z));
}
BENCHMARK(BM_GenerateFull)->Unit(benchmark::kMillisecond);

}  // namespace
