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

#include "hagan/augment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "hagan/errors.hpp"
#include "hagan/ops.hpp"
#include "hagan/tape.hpp"

namespace hagan {

Volume resample(const Volume& v, std::int64_t extent) {
  if (v.d != v.h || v.h != v.w) throw ShapeError("resample expects a cubic volume");
  if (v.d == extent) return v;
  const Ratio s = extent > v.d ? Ratio{extent / v.d, 1} : Ratio{1, v.d / extent};
  if (s.num * v.d / s.den != extent) throw ShapeError("resample: extents are not related by an integer factor");
  return from_batch(trilinear_interp(to_batch<float>(v), s, kNetworkAlignCorners));
}

Classifier::Classifier(std::int64_t resolution, int classes, std::uint64_t seed)
    : resolution_(resolution), classes_(classes), rng_(seed) {
  net_ = std::make_unique<Network<float>>(build_classifier(resolution, classes), store_);
  net_->init_params(rng_);
  store_.set_requires_grad("", false);
}

void Classifier::train(const std::vector<Volume>& volumes, const std::vector<int>& labels, int steps, int batch,
                       double lr) {
  if (volumes.empty() || volumes.size() != labels.size()) throw ConfigError("classifier needs one label per volume");
  const AdamConfig adam{lr, 0.9, 0.999, 1e-8};
  for (int s = 0; s < steps; ++s) {
    std::vector<const Volume*> vs;
    std::vector<int> ls;
    for (int i = 0; i < batch; ++i) {
      const auto k = static_cast<std::size_t>(rng_.uniform_int(0, static_cast<std::int64_t>(volumes.size()) - 1));
      vs.push_back(&volumes[k]);
      ls.push_back(labels[k]);
    }
    const auto x = to_batch<float>(vs);
    store_.set_requires_grad("cls/", true);
    GradientTape<float> tape;
    Tensor<float> loss;
    {
      auto rec = tape.record();
      loss = cross_entropy(net_->forward(x, ForwardMode{true}), std::span<const int>(ls));
    }
    tape.backward(loss);
    adam_step(store_, "cls/", adam);
    store_.clear_grads();
    store_.set_requires_grad("", false);
  }
}

std::vector<int> Classifier::predict(const std::vector<Volume>& volumes) {
  std::vector<int> out;
  for (const auto& v : volumes) {
    const auto logits = net_->forward(to_batch<float>(v));
    const auto vals = logits.values();
    out.push_back(static_cast<int>(std::max_element(vals.begin(), vals.end()) - vals.begin()));
  }
  return out;
}

double Classifier::accuracy(const std::vector<Volume>& volumes, const std::vector<int>& labels) {
  if (volumes.empty() || volumes.size() != labels.size()) throw ConfigError("accuracy needs one label per volume");
  const auto pred = predict(volumes);
  int hit = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) hit += pred[i] == labels[i];
  return static_cast<double>(hit) / static_cast<double>(pred.size());
}

std::vector<int> proportional_counts(const std::vector<int>& real_counts, int total) {
  const double n = std::accumulate(real_counts.begin(), real_counts.end(), 0.0);
  if (n <= 0) throw ConfigError("proportional_counts: empty real set");
  std::vector<int> out(real_counts.size());
  std::vector<std::pair<double, std::size_t>> rem;
  int assigned = 0;
  for (std::size_t k = 0; k < real_counts.size(); ++k) {
    const double exact = total * real_counts[k] / n;
    out[k] = static_cast<int>(std::floor(exact));
    assigned += out[k];
    rem.push_back({exact - out[k], k});
  }
  std::stable_sort(rem.begin(), rem.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
  for (int i = 0; i < total - assigned; ++i) ++out[rem[static_cast<std::size_t>(i)].second];
  return out;
}

std::string AugmentResult::table() const {
  std::string out = "training_set   train_size  accuracy\n";
  for (const auto& r : rows) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "%-13s  %10d  %8.4f\n", r.name.c_str(), r.train_size, r.accuracy);
    out += buf;
  }
  return out;
}

AugmentResult augment_study(const AugmentConfig& cfg, const std::vector<Volume>& train,
                            const std::vector<int>& train_labels, const std::vector<Volume>& test,
                            const std::vector<int>& test_labels, int classes, const ClassSampler& sampler) {
  if (!(cfg.synthetic_fraction >= 0 && cfg.synthetic_fraction < 1)) throw ConfigError("synthetic_fraction must lie in [0, 1)");
  if (!sampler) throw ConfigError("augment_study needs a conditional sampler");
  auto fit = [&](const std::vector<Volume>& v) {
    std::vector<Volume> out;
    for (const auto& x : v) out.push_back(resample(x, cfg.resolution));
    return out;
  };
  const auto real = fit(train);
  const auto held_out = fit(test);

  AugmentResult res;
  res.real_counts.assign(static_cast<std::size_t>(classes), 0);
  for (int l : train_labels) ++res.real_counts.at(static_cast<std::size_t>(l));
  const int n_syn = static_cast<int>(std::lround(cfg.synthetic_fraction / (1 - cfg.synthetic_fraction) * real.size()));
  res.synthetic_counts = proportional_counts(res.real_counts, n_syn);

  auto mixed = real;
  auto mixed_labels = train_labels;
  for (int k = 0; k < classes; ++k) {
    const int c = res.synthetic_counts[static_cast<std::size_t>(k)];
    if (c == 0) continue;
    const auto vols = sampler(k, c);
    if (static_cast<int>(vols.size()) != c) throw Error("class sampler returned the wrong number of volumes");
    for (const auto& v : vols) {
      mixed.push_back(resample(v, cfg.resolution));
      mixed_labels.push_back(k);
    }
  }

  Classifier base(cfg.resolution, classes, cfg.seed);
  base.train(real, train_labels, cfg.steps, cfg.batch, cfg.lr);
  res.rows.push_back({"baseline", base.accuracy(held_out, test_labels), static_cast<int>(real.size())});
  Classifier aug(cfg.resolution, classes, cfg.seed);
  aug.train(mixed, mixed_labels, cfg.steps, cfg.batch, cfg.lr);
  res.rows.push_back({"augmented", aug.accuracy(held_out, test_labels), static_cast<int>(mixed.size())});
  return res;
}

}  // namespace hagan
