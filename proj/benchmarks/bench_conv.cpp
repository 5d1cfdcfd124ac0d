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

#include "hagan/ops.hpp"
#include "hagan/rng.hpp"
#include "hagan/tape.hpp"

namespace {

using hagan::ConvAlgo;
using hagan::Tensor;

Tensor<float> random(const hagan::Shape& shape, hagan::Rng& rng) {
  auto t = Tensor<float>::zeros(shape);
  for (auto& v : t.values()) v = static_cast<float>(rng.normal());
  return t;
}

// args: channels, extent, kernel, stride, algo
void BM_Conv3dForward(benchmark::State& state) {
  const auto c = state.range(0), n = state.range(1), k = state.range(2), s = state.range(3);
  const auto algo = static_cast<ConvAlgo>(state.range(4));
  hagan::Rng rng(1);
  const auto x = random({2, c, n, n, n}, rng);
  const auto w = random({c, c, k, k, k}, rng);
  const auto b = random({c}, rng);
  const std::int64_t p = k == 4 ? 1 : k / 2;
  for (auto _ : state) benchmark::DoNotOptimize(hagan::conv3d(x, w, b, {s, s, s}, {p, p, p}, algo));
  state.SetItemsProcessed(state.iterations() * 2 * c * n * n * n);
}
BENCHMARK(BM_Conv3dForward)
    ->ArgNames({"c", "n", "k", "s", "algo"})
    ->Args({8, 32, 3, 1, 1})
    ->Args({8, 32, 3, 1, 2})
    ->Args({16, 32, 4, 2, 1})
    ->Args({16, 32, 4, 2, 2})
    ->Unit(benchmark::kMillisecond);

void BM_Conv3dBackward(benchmark::State& state) {
  const auto c = state.range(0), n = state.range(1);
  hagan::Rng rng(2);
  auto x = random({2, c, n, n, n}, rng);
  auto w = random({c, c, 3, 3, 3}, rng);
  auto b = random({c}, rng);
  x.set_requires_grad(true);
  w.set_requires_grad(true);
  for (auto _ : state) {
    hagan::GradientTape<float> tape;
    Tensor<float> loss;
    {
      auto rec = tape.record();
      loss = hagan::sum(hagan::conv3d(x, w, b, {1, 1, 1}, {1, 1, 1}));
    }
    tape.backward(loss);
    benchmark::DoNotOptimize(w.grad());
    x.clear_grad();
    w.clear_grad();
  }
}
BENCHMARK(BM_Conv3dBackward)->Args({8, 32})->Unit(benchmark::kMillisecond);

}  // namespace
