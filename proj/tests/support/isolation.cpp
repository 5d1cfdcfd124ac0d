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

#include <algorithm>
#include <cmath>
#include <map>

#include "testkit.hpp"

namespace hagan::testkit {

Dataset random_dataset(const NetConfig& cfg, int count, std::uint64_t seed) {
  Rng rng(seed);
  Dataset d;
  const auto r = cfg.full_resolution;
  for (int i = 0; i < count; ++i) {
    auto v = Volume::filled(r, r, r);
    for (auto& x : v.data) x = static_cast<float>(std::tanh(rng.normal()));
    d.volumes.push_back(std::move(v));
    if (cfg.conditional()) d.labels.push_back(static_cast<int>(rng.uniform_int(0, cfg.num_classes - 1)));
  }
  return d;
}

IsolationResult update_isolation(const TrainConfig& cfg, int steps) {
  static const char* kGroups[] = {"g_a/", "g_l/", "g_h/", "d_l/", "d_h/", "e_h/", "e_g/"};
  Trainer<float> tr(cfg);
  const auto data = random_dataset(cfg.net, 4, cfg.seed + 99);
  IsolationResult out;
  auto hashes = [&] {
    std::map<std::string, std::uint64_t> h;
    for (const char* g : kGroups) h[g] = tr.store().hash(g);
    return h;
  };
  struct PhaseSpec {
    const char* name;
    std::vector<std::string> own;
    void (Trainer<float>::*run)(const StepContext<float>&, StepReport&);
  };
  const std::vector<PhaseSpec> phases{
      {"discriminator", {"d_l/", "d_h/"}, &Trainer<float>::d_step},
      {"generator", {"g_a/", "g_l/", "g_h/"}, &Trainer<float>::g_step},
      {"encoder-high", {"e_h/"}, &Trainer<float>::eh_step},
      {"encoder-global", {"e_g/"}, &Trainer<float>::eg_step},
  };
  for (int s = 0; s < steps; ++s) {
    const auto ctx = tr.prepare(data);
    StepReport report;
    for (const auto& p : phases) {
      const auto before = hashes();
      (tr.*p.run)(ctx, report);
      const auto after = hashes();
      for (const char* g : kGroups) {
        const bool own = std::find(p.own.begin(), p.own.end(), g) != p.own.end();
        const bool changed = before.at(g) != after.at(g);
        if (changed != own) {
          out.violations.push_back("step " + std::to_string(s) + ", " + p.name + " phase: " +
                                   (own ? "intended group " + std::string(g) + " unchanged"
                                        : "group " + std::string(g) + " changed"));
        }
      }
      ++out.phases;
    }
  }
  return out;
}

}  // namespace hagan::testkit
