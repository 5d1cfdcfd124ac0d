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

#include "hagan/trainer.hpp"

#include <cmath>

#include "hagan/errors.hpp"
#include "hagan/losses.hpp"
#include "hagan/ops.hpp"
#include "hagan/tape.hpp"

namespace hagan {
namespace {

const char* phase_name(Phase p) {
  switch (p) {
    case Phase::kDiscriminator: return "discriminator";
    case Phase::kGenerator: return "generator";
    case Phase::kEncoderHigh: return "encoder E^H";
    case Phase::kEncoderGlobal: return "encoder E^G";
  }
  return "?";
}

template <typename F>
void guarded(Phase phase, std::int64_t step, F&& body) {
  try {
    body();
  } catch (const NumericError& e) {
    throw NumericError("step " + std::to_string(step) + ", " + phase_name(phase) + " phase: " + e.what());
  }
}

int draw_class(Rng& rng, const std::vector<double>& prior) {
  const double u = rng.uniform();
  double acc = 0.0;
  for (std::size_t k = 0; k < prior.size(); ++k) {
    acc += prior[k];
    if (u < acc) return static_cast<int>(k);
  }
  return static_cast<int>(prior.size()) - 1;
}

template <typename T>
Tensor<T> add_opt(const Tensor<T>& acc, const Tensor<T>& term) {
  return acc.defined() ? add(acc, term) : term;
}

}  // namespace

void TrainConfig::validate() const {
  net.validate();
  if (batch < 1) throw ConfigError("batch must be positive");
  if (steps < 0) throw ConfigError("steps must be nonnegative");
  if (weights.lambda1 < 0 || weights.lambda2 < 0) throw ConfigError("loss weights must be nonnegative");
  if (lr_g <= 0 || lr_d <= 0 || lr_e <= 0) throw ConfigError("learning rates must be positive");
  if (beta1 < 0 || beta1 >= 1 || beta2 < 0 || beta2 >= 1) throw ConfigError("Adam betas must lie in [0, 1)");
  if (deterministic_r < 0) throw ConfigError("deterministic_r must be nonnegative");
}

std::vector<double> Dataset::class_frequencies(int classes) const {
  std::vector<double> f(static_cast<std::size_t>(classes), 0.0);
  if (labels.empty()) return f;
  for (int l : labels) {
    if (l < 0 || l >= classes) throw ConfigError("dataset label out of range");
    f[static_cast<std::size_t>(l)] += 1.0;
  }
  for (auto& v : f) v /= static_cast<double>(labels.size());
  return f;
}

template <typename T>
Tensor<T> sample_latent(Rng& rng, std::int64_t n, std::int64_t latent_dim, const std::vector<int>& labels,
                        int classes) {
  auto z = Tensor<T>::zeros({n, latent_dim});
  for (auto& v : z.values()) v = static_cast<T>(rng.normal());
  if (labels.empty()) return z;
  if (static_cast<std::int64_t>(labels.size()) != n) throw ShapeError("one label per latent row required");
  return concat<T>({z, one_hot<T>(labels, classes)}, 1);
}

template <typename T>
Tensor<T> downsample_low(const Tensor<T>& x_high) {
  return trilinear_interp(x_high, Ratio{1, 4}, kNetworkAlignCorners);
}

template <typename T>
Trainer<T>::Trainer(TrainConfig cfg) : cfg_(std::move(cfg)), rng_(cfg_.seed) {
  cfg_.validate();
  const auto g = build_hagan(cfg_.net);
  g_a_ = std::make_unique<Network<T>>(g.g_a, store_);
  g_l_ = std::make_unique<Network<T>>(g.g_l, store_);
  g_h_ = std::make_unique<Network<T>>(g.g_h, store_);
  d_l_ = std::make_unique<Network<T>>(g.d_l, store_);
  d_h_ = std::make_unique<Network<T>>(g.d_h, store_);
  e_h_ = std::make_unique<Network<T>>(g.e_h, store_);
  e_g_ = std::make_unique<Network<T>>(g.e_g, store_);
  for (auto* n : {g_a_.get(), g_l_.get(), g_h_.get(), d_l_.get(), d_h_.get(), e_h_.get(), e_g_.get()}) {
    n->init_params(rng_);
  }
  if (cfg_.net.conditional()) {
    class_prior_.assign(static_cast<std::size_t>(cfg_.net.num_classes), 1.0 / static_cast<double>(cfg_.net.num_classes));
  }
}

template <typename T>
void Trainer<T>::freeze_all() {
  store_.set_requires_grad("", false);
}

template <typename T>
void Trainer<T>::update(const std::vector<std::string>& prefixes, double lr) {
  if (cfg_.max_grad_norm > 0) {
    double sq = 0.0;
    for (const auto& p : prefixes) {
      for (const auto& name : store_.names(p, true)) {
        for (auto g : store_.at(name).grad()) sq += static_cast<double>(g) * g;
      }
    }
    const double norm = std::sqrt(sq);
    if (norm > cfg_.max_grad_norm) {
      const auto f = static_cast<T>(cfg_.max_grad_norm / norm);
      for (const auto& p : prefixes) {
        for (const auto& name : store_.names(p, true)) {
          for (auto& g : store_.at(name).mutable_grad()) g *= f;
        }
      }
    }
  }
  AdamConfig adam{lr, cfg_.beta1, cfg_.beta2, cfg_.adam_eps};
  for (const auto& p : prefixes) adam_step(store_, p, adam);
  // Gradients are released rather than zeroed so they do not occupy memory
  // between phases.
  store_.clear_grads();
  freeze_all();
}

template <typename T>
StepContext<T> Trainer<T>::prepare(const Dataset& data) {
  if (data.size() == 0) throw ConfigError("empty training set");
  std::vector<const Volume*> vols;
  std::vector<int> labels;
  for (int i = 0; i < cfg_.batch; ++i) {
    const auto k = static_cast<std::size_t>(rng_.uniform_int(0, static_cast<std::int64_t>(data.size()) - 1));
    vols.push_back(&data.volumes[k]);
    if (cfg_.net.conditional()) labels.push_back(data.labels.at(k));
  }
  return prepare(to_batch<T>(vols), std::move(labels));
}

template <typename T>
StepContext<T> Trainer<T>::prepare(const Tensor<T>& x_high, std::vector<int> labels) {
  const auto& net = cfg_.net;
  const Shape expect{x_high.dim(0), 1, net.full_resolution, net.full_resolution, net.full_resolution};
  if (x_high.shape() != expect) {
    throw ShapeError("training batch must be " + shape_str(expect) + ", got " + shape_str(x_high.shape()));
  }
  StepContext<T> ctx;
  ctx.x_high = x_high;
  ctx.x_low = downsample_low(x_high);
  const auto n = x_high.dim(0);
  if (cfg_.deterministic_r > 0) {
    ctx.window = deterministic_r(step_, cfg_.deterministic_r, net.low_resolution, net.subvol_depth_low(), 4);
  } else {
    ctx.window = sample_r(net.low_resolution, net.subvol_depth_low(), 4, rng_);
  }
  ctx.real_sub = select_high(x_high, ctx.window);
  if (net.conditional()) {
    if (static_cast<std::int64_t>(labels.size()) != n) throw ConfigError("conditional training needs one label per volume");
    ctx.real_labels = std::move(labels);
    for (std::int64_t i = 0; i < n; ++i) ctx.fake_labels.push_back(draw_class(rng_, class_prior_));
  }
  ctx.z = sample_latent<T>(rng_, n, net.latent_dim, ctx.fake_labels, static_cast<int>(net.num_classes));
  return ctx;
}

template <typename T>
void Trainer<T>::d_step(const StepContext<T>& ctx, StepReport& report) {
  guarded(Phase::kDiscriminator, step_, [&] {
    freeze_all();
    const auto n = ctx.x_high.dim(0);
    // Fakes are produced without a tape: no gradient reaches the generator.
    const auto a = g_a_->forward(ctx.z);
    const auto fake_sub = g_h_->forward(select_low(a, ctx.window));
    Tensor<T> fake_low;
    if (cfg_.low_branch) fake_low = g_l_->forward(a);

    std::vector<std::string> groups{"d_h/"};
    if (cfg_.low_branch) groups.push_back("d_l/");
    for (const auto& p : groups) store_.set_requires_grad(p, true);
    const ForwardMode train{true};
    GradientTape<T> tape;
    Tensor<T> total, cls;
    {
      auto rec = tape.record();
      auto score = [&](Network<T>& d, const Tensor<T>& real, const Tensor<T>& fake, double& out) {
        const auto outs = d.forward_all(concat<T>({real, fake}, 0), train);
        const auto loss = d_gan_loss(slice(outs[0], 0, 0, n), slice(outs[0], 0, n, n));
        out = loss.item();
        total = add_opt(total, loss);
        if (cfg_.net.conditional()) {
          const auto c = add(class_loss(slice(outs[1], 0, 0, n), ctx.real_labels),
                             class_loss(slice(outs[1], 0, n, n), ctx.fake_labels));
          cls = add_opt(cls, c);
        }
      };
      if (cfg_.low_branch) score(*d_l_, ctx.x_low, fake_low, report.d_low);
      score(*d_h_, ctx.real_sub, fake_sub, report.d_high);
      if (cls.defined()) {
        report.cls = cls.item();
        total = add(total, scale(cls, cfg_.class_weight));
      }
    }
    tape.backward(total);
    update(groups, cfg_.lr_d);
  });
}

template <typename T>
void Trainer<T>::g_step(const StepContext<T>& ctx, StepReport& report) {
  guarded(Phase::kGenerator, step_, [&] {
    freeze_all();
    std::vector<std::string> groups{"g_a/", "g_h/"};
    if (cfg_.low_branch) groups.push_back("g_l/");
    for (const auto& p : groups) store_.set_requires_grad(p, true);
    GradientTape<T> tape;
    Tensor<T> total;
    {
      auto rec = tape.record();
      const auto a = g_a_->forward(ctx.z);
      auto adversarial = [&](Network<T>& d, const Tensor<T>& fake, double& out) {
        const auto outs = d.forward_all(fake);
        auto loss = g_gan_loss(outs[0], cfg_.saturating);
        out = loss.item();
        if (cfg_.net.conditional()) loss = add(loss, scale(class_loss(outs[1], ctx.fake_labels), cfg_.class_weight));
        total = add_opt(total, loss);
      };
      if (cfg_.low_branch) adversarial(*d_l_, g_l_->forward(a), report.g_low);
      adversarial(*d_h_, g_h_->forward(select_low(a, ctx.window)), report.g_high);
    }
    tape.backward(total);
    update(groups, cfg_.lr_g);
  });
}

template <typename T>
void Trainer<T>::eh_step(const StepContext<T>& ctx, StepReport& report) {
  guarded(Phase::kEncoderHigh, step_, [&] {
    freeze_all();
    store_.set_requires_grad("e_h/", true);
    GradientTape<T> tape;
    Tensor<T> total;
    {
      auto rec = tape.record();
      const auto a_r = e_h_->forward(ctx.real_sub);
      const auto loss = recon_loss(ctx.real_sub, g_h_->forward(a_r));
      report.rec_h = loss.item();
      total = scale(loss, cfg_.weights.lambda1);
    }
    tape.backward(total);
    update({"e_h/"}, cfg_.lr_e);
  });
}

template <typename T>
Tensor<T> Trainer<T>::encode(const Tensor<T>& x_high) {
  if (x_high.ndim() != 5) throw ShapeError("encode expects [N,1,D,H,W]");
  const auto len = cfg_.net.subvol_depth();
  if (x_high.dim(2) % len != 0) {
    throw ConfigError("depth " + std::to_string(x_high.dim(2)) + " is not divisible into windows of " +
                      std::to_string(len));
  }
  const auto part = make_partition(x_high.dim(2), x_high.dim(2) / len);
  std::vector<Tensor<T>> feats;
  for (const auto& sub : partition_volume(x_high, part)) feats.push_back(e_h_->forward(sub));
  std::vector<std::int64_t> starts;
  for (auto s : part.starts) starts.push_back(s / 4);
  return e_g_->forward(concat_subvolumes(feats, starts));
}

template <typename T>
void Trainer<T>::eg_step(const StepContext<T>& ctx, StepReport& report) {
  guarded(Phase::kEncoderGlobal, step_, [&] {
    freeze_all();
    // Â from the frozen E^H, outside the tape.
    const auto len = cfg_.net.subvol_depth();
    const auto part = make_partition(ctx.x_high.dim(2), ctx.x_high.dim(2) / len);
    std::vector<Tensor<T>> feats;
    for (const auto& sub : partition_volume(ctx.x_high, part)) feats.push_back(e_h_->forward(sub));
    std::vector<std::int64_t> starts;
    for (auto s : part.starts) starts.push_back(s / 4);
    const auto a_hat = concat_subvolumes(feats, starts);
    feats.clear();

    store_.set_requires_grad("e_g/", true);
    GradientTape<T> tape;
    Tensor<T> total;
    {
      auto rec = tape.record();
      auto z_hat = e_g_->forward(a_hat);
      if (cfg_.net.conditional()) {
        z_hat = concat<T>({z_hat, one_hot<T>(ctx.real_labels, static_cast<int>(cfg_.net.num_classes))}, 1);
      }
      const auto a = g_a_->forward(z_hat);
      Tensor<T> loss = recon_loss(ctx.real_sub, g_h_->forward(select_low(a, ctx.window)));
      if (cfg_.low_branch) loss = add(loss, recon_loss(ctx.x_low, g_l_->forward(a)));
      report.rec_g = loss.item();
      total = scale(loss, cfg_.weights.lambda2);
    }
    tape.backward(total);
    update({"e_g/"}, cfg_.lr_e);
  });
}

template <typename T>
StepReport Trainer<T>::step(const StepContext<T>& ctx) {
  StepReport r;
  r.window = ctx.window;
  d_step(ctx, r);
  g_step(ctx, r);
  if (cfg_.encoder) {
    eh_step(ctx, r);
    eg_step(ctx, r);
  }
  r.step = ++step_;
  return r;
}

template <typename T>
StepReport Trainer<T>::step(const Dataset& data) {
  return step(prepare(data));
}

template class Trainer<float>;
template class Trainer<double>;
template Tensor<float> sample_latent<float>(Rng&, std::int64_t, std::int64_t, const std::vector<int>&, int);
template Tensor<double> sample_latent<double>(Rng&, std::int64_t, std::int64_t, const std::vector<int>&, int);
template Tensor<float> downsample_low<float>(const Tensor<float>&);
template Tensor<double> downsample_low<double>(const Tensor<double>&);

}  // namespace hagan
