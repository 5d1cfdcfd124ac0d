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
#include <optional>
#include <string>
#include <vector>

#include "hagan/geometry.hpp"
#include "hagan/networks.hpp"
#include "hagan/param_store.hpp"
#include "hagan/rng.hpp"
#include "hagan/volume.hpp"

namespace hagan {

struct LossWeights {
  double lambda1 = 5.0;
  double lambda2 = 5.0;
};

struct TrainConfig {
  NetConfig net;
  LossWeights weights;
  double lr_g = 1e-4;
  double lr_d = 4e-4;
  double lr_e = 1e-4;
  double beta1 = 0.0;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  int batch = 2;
  std::int64_t steps = 2000;
  std::uint64_t seed = 0;
  bool saturating = false;
  double class_weight = 1.0;
  // 0 disables clipping.
  double max_grad_norm = 0.0;
  // Ablations: cycle r over this many equally spaced positions (0: random r),
  // drop the low-resolution branch, drop the encoder.
  int deterministic_r = 0;
  bool low_branch = true;
  bool encoder = true;

  void validate() const;
};

// Real data: volumes at full resolution plus optional class labels.
struct Dataset {
  std::vector<Volume> volumes;
  std::vector<int> labels;

  std::size_t size() const { return volumes.size(); }
  // Empirical class frequencies over `classes` labels.
  std::vector<double> class_frequencies(int classes) const;
};

struct StepReport {
  std::int64_t step = 0;
  double d_low = 0, d_high = 0, g_low = 0, g_high = 0, rec_h = 0, rec_g = 0;
  std::optional<double> cls;
  SliceWindow window;
};

enum class Phase { kDiscriminator, kGenerator, kEncoderHigh, kEncoderGlobal };

// Tensors shared by the four phases of one iteration.
template <typename T>
struct StepContext {
  Tensor<T> x_high, x_low, real_sub;
  SliceWindow window;
  Tensor<T> z;                   // latent rows, one-hot appended when conditional
  std::vector<int> real_labels;  // empty when unconditional
  std::vector<int> fake_labels;
};

// Owns the seven networks, their parameters and the three optimizer groups
// (generator {G^A, G^L, G^H}, discriminator {D^L, D^H}, encoder {E^H, E^G}).
template <typename T>
class Trainer {
 public:
  explicit Trainer(TrainConfig cfg);

  const TrainConfig& config() const { return cfg_; }
  ParamStore<T>& store() { return store_; }
  const ParamStore<T>& store() const { return store_; }
  Rng& rng() { return rng_; }
  std::int64_t step_count() const { return step_; }
  void set_step_count(std::int64_t s) { step_ = s; }
  void set_class_prior(std::vector<double> prior) { class_prior_ = std::move(prior); }
  const std::vector<double>& class_prior() const { return class_prior_; }

  Network<T>& g_a() { return *g_a_; }
  Network<T>& g_l() { return *g_l_; }
  Network<T>& g_h() { return *g_h_; }
  Network<T>& d_l() { return *d_l_; }
  Network<T>& d_h() { return *d_h_; }
  Network<T>& e_h() { return *e_h_; }
  Network<T>& e_g() { return *e_g_; }

  // Draws a batch, r, Z and class codes for one iteration.
  StepContext<T> prepare(const Dataset& data);
  StepContext<T> prepare(const Tensor<T>& x_high, std::vector<int> labels);

  // Individual phases; each updates only its own parameter group.
  void d_step(const StepContext<T>& ctx, StepReport& report);
  void g_step(const StepContext<T>& ctx, StepReport& report);
  void eh_step(const StepContext<T>& ctx, StepReport& report);
  void eg_step(const StepContext<T>& ctx, StepReport& report);

  // One full alternation over the four phases.
  StepReport step(const Dataset& data);
  StepReport step(const StepContext<T>& ctx);

  // Hierarchical encoding of X^H [N,1,D,H,W] -> Ẑ [N, latent_dim].
  Tensor<T> encode(const Tensor<T>& x_high);
  // A = G^A(z) for latent rows (class one-hot appended by the caller).
  Tensor<T> common(const Tensor<T>& z) { return g_a_->forward(z); }

  static constexpr const char* kGenerator[3] = {"g_a/", "g_l/", "g_h/"};
  static constexpr const char* kDiscriminator[2] = {"d_l/", "d_h/"};

 private:
  void update(const std::vector<std::string>& prefixes, double lr);
  void freeze_all();

  TrainConfig cfg_;
  ParamStore<T> store_;
  Rng rng_;
  std::int64_t step_ = 0;
  std::vector<double> class_prior_;
  std::unique_ptr<Network<T>> g_a_, g_l_, g_h_, d_l_, d_h_, e_h_, e_g_;
};

// Latent rows [N, latent_dim] of standard normals, with one-hot class rows
// appended when `labels` is non-empty.
template <typename T>
Tensor<T> sample_latent(Rng& rng, std::int64_t n, std::int64_t latent_dim,
                        const std::vector<int>& labels = {}, int classes = 0);

// Low-resolution image from the full-resolution one (trilinear x1/4).
template <typename T>
Tensor<T> downsample_low(const Tensor<T>& x_high);

extern template class Trainer<float>;
extern template class Trainer<double>;

}  // namespace hagan
