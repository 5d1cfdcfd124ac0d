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
#include <memory>
#include <string>
#include <vector>

#include "hagan/geometry.hpp"
#include "hagan/networks.hpp"
#include "hagan/param_store.hpp"
#include "hagan/rng.hpp"
#include "hagan/volume.hpp"

namespace hagan {

// Additive Gaussian noise, trilinear x1/2 (2x2x2 box average), clip to [-1, 1].
Volume degrade(const Volume& hr, double noise_sigma, Rng& rng);

struct PairedSample {
  Volume hr, lr;
};
// Each pair is degraded with its own generator seeded from `seed` and its
// index, so a pair does not depend on the rest of the set.
std::vector<PairedSample> make_pairs(const std::vector<Volume>& hr, double noise_sigma, std::uint64_t seed);

// Discriminator objective on (HR, upsampled LR) pairs; same form as the GAN loss.
template <typename T>
Tensor<T> sr_d_loss(const Tensor<T>& real_logits, const Tensor<T>& fake_logits);
// Non-saturating adversarial term plus lambda * l1(real, fake).
template <typename T>
Tensor<T> sr_g_loss(const Tensor<T>& fake_logits, const Tensor<T>& hr_real, const Tensor<T>& hr_fake, double lambda);

struct SRStepReport {
  std::int64_t step = 0;
  double d_loss = 0, g_adv = 0, g_l1 = 0;
  SliceWindow window;
};

template <typename T>
class SRTrainer {
 public:
  SRTrainer(SRConfig cfg, std::uint64_t seed, int batch = 2);

  const SRConfig& config() const { return cfg_; }
  ParamStore<T>& store() { return store_; }
  Rng& rng() { return rng_; }
  Network<T>& generator() { return *g_; }
  Network<T>& discriminator() { return *d_; }
  std::int64_t step_count() const { return step_; }
  void set_step_count(std::int64_t s) { step_ = s; }

  // Window on the LR grid and its synchronized HR window (scale 2).
  SliceWindow sample_window();
  // D update then G update on lr [N,1,L,h,w] / hr [N,1,2L,2h,2w] windows.
  SRStepReport step(const Tensor<T>& lr_sub, const Tensor<T>& hr_sub, const SliceWindow& w);
  // Draws a batch and a window from `data`.
  SRStepReport step(const std::vector<PairedSample>& data);

  // Whole-volume super-resolution in a single generator pass.
  Tensor<T> infer(const Tensor<T>& lr_full);
  Volume infer(const Volume& lr);

 private:
  SRConfig cfg_;
  int batch_;
  ParamStore<T> store_;
  Rng rng_;
  std::int64_t step_ = 0;
  std::unique_ptr<Network<T>> g_, d_;
};

// Volume-level comparison of SR output and the trilinear baseline against HR.
struct SRReport {
  double ssim_sr = 0, nmse_sr = 0, psnr_sr = 0;
  double ssim_base = 0, nmse_base = 0, psnr_base = 0;
  int volumes = 0;
  // Rows {trilinear, ha-gan-sr} with columns SSIM, NMSE(%), PSNR.
  std::string table() const;
};

template <typename T>
SRReport sr_evaluate(SRTrainer<T>& model, const std::vector<PairedSample>& test);

// Trilinear x2 upsample of an LR volume.
Volume upsample_trilinear(const Volume& lr, std::int64_t factor = 2);

extern template class SRTrainer<float>;
extern template class SRTrainer<double>;

}  // namespace hagan
