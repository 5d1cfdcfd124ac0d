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

#include "hagan/phantom.hpp"

#include <array>
#include <cmath>
#include <numbers>

#include "hagan/errors.hpp"
#include "hagan/rng.hpp"

namespace hagan {
namespace {

struct Ellipsoid {
  std::array<double, 3> c, r;
  bool contains(double z, double y, double x) const {
    const double a = (z - c[0]) / r[0], b = (y - c[1]) / r[1], e = (x - c[2]) / r[2];
    return a * a + b * b + e * e <= 1.0;
  }
};

constexpr std::array<double, kPhantomClasses> kClassPrior{0.3, 0.2, 0.2, 0.15, 0.15};

}  // namespace

int phantom_label(std::uint64_t seed) {
  Rng rng(seed ^ 0x9e3779b97f4a7c15ULL);
  const double u = rng.uniform();
  double acc = 0.0;
  for (int k = 0; k < kPhantomClasses; ++k) {
    acc += kClassPrior[static_cast<std::size_t>(k)];
    if (u < acc) return k;
  }
  return kPhantomClasses - 1;
}

Phantom phantom_generate(std::uint64_t seed, int label, std::int64_t extent, bool keep_masks) {
  if (extent < 16) throw ConfigError("phantom extent must be at least 16, got " + std::to_string(extent));
  if (label < 0 || label >= kPhantomClasses) throw ConfigError("phantom class out of range");
  Rng rng(seed);
  auto jitter = [&rng](double amp) { return amp * (2.0 * rng.uniform() - 1.0); };

  Ellipsoid body{{jitter(0.03), jitter(0.03), jitter(0.03)},
                 {0.85 * (1 + jitter(0.05)), 0.8 * (1 + jitter(0.05)), 0.75 * (1 + jitter(0.05))}};
  const double f = 0.55 + 0.45 * rng.uniform();
  Ellipsoid organ{{jitter(0.08), jitter(0.08), jitter(0.08)}, {0.55 * f, 0.5 * f, 0.45 * f}};

  std::array<std::array<double, 4>, 3> waves{};  // frequency (3) + phase per wave
  for (auto& wv : waves) {
    for (int k = 0; k < 3; ++k) wv[static_cast<std::size_t>(k)] = std::numbers::pi * (1.0 + 2.0 * rng.uniform());
    wv[3] = 2.0 * std::numbers::pi * rng.uniform();
  }

  std::vector<Ellipsoid> lesions;
  const int count = 2 * label;
  for (int i = 0; i < count; ++i) {
    // Centre uniformly inside the inner 70% of the organ.
    double z, y, x;
    do {
      z = jitter(1.0);
      y = jitter(1.0);
      x = jitter(1.0);
    } while (z * z + y * y + x * x > 1.0);
    const double rad = (0.07 + 0.02 * label) * (0.8 + 0.4 * rng.uniform());
    lesions.push_back({{organ.c[0] + 0.7 * organ.r[0] * z, organ.c[1] + 0.7 * organ.r[1] * y,
                        organ.c[2] + 0.7 * organ.r[2] * x},
                       {rad, rad, rad}});
  }

  Phantom p;
  p.seed = seed;
  p.label = label;
  p.organ_factor = f;
  p.volume = Volume::filled(extent, extent, extent, -1.0f);
  const auto n = static_cast<std::size_t>(p.volume.size());
  if (keep_masks) {
    p.body_mask.assign(n, 0);
    p.organ_mask.assign(n, 0);
    p.lesion_mask.assign(n, 0);
  }
  const double step = 2.0 / static_cast<double>(extent);
  std::size_t i = 0;
  for (std::int64_t zi = 0; zi < extent; ++zi) {
    const double z = -1.0 + (zi + 0.5) * step;
    for (std::int64_t yi = 0; yi < extent; ++yi) {
      const double y = -1.0 + (yi + 0.5) * step;
      for (std::int64_t xi = 0; xi < extent; ++xi, ++i) {
        const double x = -1.0 + (xi + 0.5) * step;
        if (!body.contains(z, y, x)) continue;
        double tex = 0.0;
        for (const auto& wv : waves) tex += std::cos(wv[0] * z + wv[1] * y + wv[2] * x + wv[3]);
        tex /= static_cast<double>(waves.size());
        double v = 0.1 + 0.06 * tex;
        ++p.body_voxels;
        if (keep_masks) p.body_mask[i] = 1;
        if (organ.contains(z, y, x)) {
          v = -0.5 + 0.04 * tex;
          ++p.organ_voxels;
          if (keep_masks) p.organ_mask[i] = 1;
          for (const auto& l : lesions) {
            if (l.contains(z, y, x)) {
              v = -0.9;
              ++p.lesion_voxels;
              if (keep_masks) p.lesion_mask[i] = 1;
              break;
            }
          }
        }
        p.volume.data[i] = static_cast<float>(v);
      }
    }
  }
  return p;
}

PhantomSet make_phantom_set(int count, std::uint64_t base_seed, std::int64_t extent, double train_fraction) {
  if (count < 2) throw ConfigError("phantom set needs at least two volumes");
  const int n_train = static_cast<int>(std::lround(train_fraction * count));
  PhantomSet set;
  for (int i = 0; i < count; ++i) {
    const auto seed = base_seed + static_cast<std::uint64_t>(i);
    auto p = phantom_generate(seed, phantom_label(seed), extent);
    (i < n_train ? set.train : set.test).push_back(std::move(p));
  }
  return set;
}

}  // namespace hagan
