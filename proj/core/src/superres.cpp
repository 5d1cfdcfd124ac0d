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

#include "hagan/superres.hpp"

#include <algorithm>
#include <cstdio>

#include "hagan/errors.hpp"
#include "hagan/losses.hpp"
#include "hagan/metrics.hpp"
#include "hagan/ops.hpp"
#include "hagan/tape.hpp"

namespace hagan {

Volume degrade(const Volume& hr, double noise_sigma, Rng& rng) {
  if (hr.d % 2 || hr.h % 2 || hr.w % 2) throw ShapeError("degrade needs even extents");
  if (noise_sigma < 0) throw ConfigError("noise_sigma must be nonnegative");
  auto x = Tensor<double>::zeros({1, 1, hr.d, hr.h, hr.w}, MemTag::kData);
  auto v = x.values();
  for (std::size_t i = 0; i < v.size(); ++i) {
    v[i] = hr.data[i];
    if (noise_sigma > 0) v[i] += noise_sigma * rng.normal();
  }
  auto lr = from_batch(trilinear_interp(x, Ratio{1, 2}, kNetworkAlignCorners));
  for (auto& p : lr.data) p = std::clamp(p, -1.0f, 1.0f);
  return lr;
}

std::vector<PairedSample> make_pairs(const std::vector<Volume>& hr, double noise_sigma, std::uint64_t seed) {
  std::vector<PairedSample> out;
  for (std::size_t i = 0; i < hr.size(); ++i) {
    Rng rng(seed * 1000003ull + i);
    out.push_back({hr[i], degrade(hr[i], noise_sigma, rng)});
  }
  return out;
}

Volume upsample_trilinear(const Volume& lr, std::int64_t factor) {
  const auto x = to_batch<double>(lr);
  auto up = from_batch(trilinear_interp(x, Ratio{factor, 1}, kNetworkAlignCorners));
  return up;
}

template <typename T>
Tensor<T> sr_d_loss(const Tensor<T>& real_logits, const Tensor<T>& fake_logits) {
  return d_gan_loss(real_logits, fake_logits);
}

template <typename T>
Tensor<T> sr_g_loss(const Tensor<T>& fake_logits, const Tensor<T>& hr_real, const Tensor<T>& hr_fake, double lambda) {
  return add(g_gan_loss(fake_logits), scale(recon_loss(hr_real, hr_fake), lambda));
}

template <typename T>
SRTrainer<T>::SRTrainer(SRConfig cfg, std::uint64_t seed, int batch) : cfg_(std::move(cfg)), batch_(batch), rng_(seed) {
  cfg_.validate();
  if (batch_ < 1) throw ConfigError("SR batch must be positive");
  g_ = std::make_unique<Network<T>>(build_sr_generator(cfg_), store_);
  d_ = std::make_unique<Network<T>>(build_sr_discriminator(cfg_), store_);
  g_->init_params(rng_);
  d_->init_params(rng_);
  store_.set_requires_grad("", false);
}

template <typename T>
SliceWindow SRTrainer<T>::sample_window() {
  return sample_r(cfg_.lr_resolution(), cfg_.subvol_len(), cfg_.sr_factor, rng_);
}

template <typename T>
SRStepReport SRTrainer<T>::step(const Tensor<T>& lr_sub, const Tensor<T>& hr_sub, const SliceWindow& w) {
  const auto n = lr_sub.dim(0);
  if (hr_sub.dim(0) != n || hr_sub.dim(2) != cfg_.sr_factor * lr_sub.dim(2)) {
    throw ShapeError("SR step: LR " + shape_str(lr_sub.shape()) + " and HR " + shape_str(hr_sub.shape()) +
                     " windows do not correspond");
  }
  SRStepReport r;
  r.window = w;
  const Ratio up_scale{cfg_.sr_factor, 1};
  const auto up = trilinear_interp(lr_sub, up_scale, kNetworkAlignCorners);
  auto wrap = [this](const char* phase, auto&& body) {
    try {
      body();
    } catch (const NumericError& e) {
      throw NumericError("SR step " + std::to_string(step_) + ", " + phase + " phase: " + e.what());
    }
  };

  wrap("discriminator", [&] {
    const auto fake = g_->forward(lr_sub);
    store_.set_requires_grad("sr_d/", true);
    GradientTape<T> tape;
    Tensor<T> loss;
    {
      auto rec = tape.record();
      const auto pairs = concat<T>({concat<T>({hr_sub, up}, 1), concat<T>({fake, up}, 1)}, 0);
      const auto logits = d_->forward(pairs, ForwardMode{true});
      loss = sr_d_loss(slice(logits, 0, 0, n), slice(logits, 0, n, n));
    }
    r.d_loss = loss.item();
    tape.backward(loss);
    adam_step(store_, "sr_d/", AdamConfig{cfg_.lr_d, 0.0, 0.999, 1e-8});
    store_.clear_grads();
    store_.set_requires_grad("", false);
  });

  wrap("generator", [&] {
    store_.set_requires_grad("sr_g/", true);
    GradientTape<T> tape;
    Tensor<T> loss;
    {
      auto rec = tape.record();
      const auto fake = g_->forward(lr_sub, ForwardMode{true});
      const auto adv = g_gan_loss(d_->forward(concat<T>({fake, up}, 1)));
      const auto l1 = recon_loss(hr_sub, fake);
      r.g_adv = adv.item();
      r.g_l1 = l1.item();
      loss = add(adv, scale(l1, cfg_.lambda));
    }
    tape.backward(loss);
    adam_step(store_, "sr_g/", AdamConfig{cfg_.lr_g, 0.0, 0.999, 1e-8});
    store_.clear_grads();
    store_.set_requires_grad("", false);
  });
  r.step = ++step_;
  return r;
}

template <typename T>
SRStepReport SRTrainer<T>::step(const std::vector<PairedSample>& data) {
  if (data.empty()) throw ConfigError("empty SR training set");
  std::vector<const Volume*> lr, hr;
  for (int i = 0; i < batch_; ++i) {
    const auto k = static_cast<std::size_t>(rng_.uniform_int(0, static_cast<std::int64_t>(data.size()) - 1));
    lr.push_back(&data[k].lr);
    hr.push_back(&data[k].hr);
  }
  const auto w = sample_window();
  const auto lr_b = to_batch<T>(lr);
  const auto hr_b = to_batch<T>(hr);
  if (lr_b.dim(2) != cfg_.lr_resolution() || hr_b.dim(2) != cfg_.hr_resolution) {
    throw ShapeError("SR data extents do not match the configuration");
  }
  return step(select_low(lr_b, w), select_high(hr_b, w), w);
}

template <typename T>
Tensor<T> SRTrainer<T>::infer(const Tensor<T>& lr_full) {
  return g_->forward(lr_full.detach());
}

template <typename T>
Volume SRTrainer<T>::infer(const Volume& lr) {
  return from_batch(infer(to_batch<T>(lr)));
}

std::string SRReport::table() const {
  char buf[256];
  std::string out = "method        SSIM     NMSE(%)   PSNR(dB)\n";
  std::snprintf(buf, sizeof buf, "%-12s %7.4f  %8.4f  %8.3f\n", "trilinear", ssim_base, 100 * nmse_base, psnr_base);
  out += buf;
  std::snprintf(buf, sizeof buf, "%-12s %7.4f  %8.4f  %8.3f\n", "ha-gan-sr", ssim_sr, 100 * nmse_sr, psnr_sr);
  out += buf;
  return out;
}

template <typename T>
SRReport sr_evaluate(SRTrainer<T>& model, const std::vector<PairedSample>& test) {
  if (test.empty()) throw ConfigError("empty SR test set");
  SRReport r;
  for (const auto& p : test) {
    auto sr = model.infer(p.lr);
    for (auto& v : sr.data) v = std::clamp(v, -1.0f, 1.0f);
    // Baseline in the model's precision, so an untrained (zero-residual)
    // generator scores identically to it.
    const auto base = from_batch(
        trilinear_interp(to_batch<T>(p.lr), Ratio{model.config().sr_factor, 1}, kNetworkAlignCorners));
    r.ssim_sr += ssim(p.hr, sr);
    r.nmse_sr += nmse(p.hr, sr);
    r.psnr_sr += psnr(p.hr, sr);
    r.ssim_base += ssim(p.hr, base);
    r.nmse_base += nmse(p.hr, base);
    r.psnr_base += psnr(p.hr, base);
  }
  const double n = static_cast<double>(test.size());
  r.volumes = static_cast<int>(test.size());
  for (double* v : {&r.ssim_sr, &r.nmse_sr, &r.psnr_sr, &r.ssim_base, &r.nmse_base, &r.psnr_base}) *v /= n;
  return r;
}

template class SRTrainer<float>;
template class SRTrainer<double>;
template Tensor<float> sr_d_loss<float>(const Tensor<float>&, const Tensor<float>&);
template Tensor<double> sr_d_loss<double>(const Tensor<double>&, const Tensor<double>&);
template Tensor<float> sr_g_loss<float>(const Tensor<float>&, const Tensor<float>&, const Tensor<float>&, double);
template Tensor<double> sr_g_loss<double>(const Tensor<double>&, const Tensor<double>&, const Tensor<double>&, double);
template SRReport sr_evaluate<float>(SRTrainer<float>&, const std::vector<PairedSample>&);
template SRReport sr_evaluate<double>(SRTrainer<double>&, const std::vector<PairedSample>&);

}  // namespace hagan
