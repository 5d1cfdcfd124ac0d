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
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "hagan/rng.hpp"
#include "hagan/volume.hpp"

namespace hagan {

// Rows are samples. `fingerprint` identifies the extractor that produced them.
struct FeatureSet {
  Eigen::MatrixXd features;
  std::string fingerprint;
};

// |mu_a - mu_b|² + tr(S_a + S_b - 2 (S_a S_b)^{1/2}). The cross term is
// evaluated as tr((S_a^{1/2} S_b S_a^{1/2})^{1/2}) with symmetric
// eigendecompositions; eigenvalues above -1e-10 are clamped to zero, lower
// ones raise NumericError.
double frechet_distance(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);
// Refuses sets from different extractors (ConfigError).
double frechet_distance(const FeatureSet& a, const FeatureSet& b);

struct MmdOptions {
  double bandwidth = 0.0;  // <= 0: median pairwise distance of the pooled set
  bool unbiased = true;
};

// Squared MMD with k(x, y) = exp(-|x - y|² / (2 h²)).
double mmd_rbf(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, const MmdOptions& opt = {});
double mmd_rbf(const FeatureSet& a, const FeatureSet& b, const MmdOptions& opt = {});
// Median of pairwise Euclidean distances among the rows of `x`.
double median_distance(const Eigen::MatrixXd& x);
// Permutation p-value of the MMD statistic (bandwidth fixed from the pooled
// data before shuffling).
double mmd_permutation_test(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, int permutations, Rng& rng,
                            const MmdOptions& opt = {});

inline constexpr double kPsnrCap = 100.0;

// Mean SSIM over all voxels with a 3D Gaussian window (sigma 1.5, radius 5)
// renormalised where it leaves the volume; k1 = 0.01, k2 = 0.03.
double ssim(const Volume& a, const Volume& b, double dynamic_range = 2.0, double sigma = 1.5);
// 10 log10(max² / MSE), capped at kPsnrCap for identical volumes.
double psnr(const Volume& a, const Volume& b, double max_value = 2.0);
// |ref - x|² / |ref|²; NumericError for an all-zero reference.
double nmse(const Volume& reference, const Volume& x);

// 2|A ∩ B| / (|A| + |B|), 1 when both masks are empty.
double dice(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b);

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
};
// Two-sample Kolmogorov-Smirnov test with the asymptotic p-value.
KsResult ks_test(std::vector<double> a, std::vector<double> b);
// Q_KS(lambda) = 2 sum_j (-1)^{j-1} exp(-2 j² lambda²).
double kolmogorov_q(double lambda);

inline constexpr double kHuLow = -1024.0;
inline constexpr double kHuHigh = 600.0;
// Clip to [lo, hi] and map affinely onto [-1, 1]; and back.
double hu_to_unit(double hu, double lo = kHuLow, double hi = kHuHigh);
double unit_to_hu(double u, double lo = kHuLow, double hi = kHuHigh);
Volume hu_window_map(std::int64_t d, std::int64_t h, std::int64_t w, std::span<const float> hu,
                     double lo = kHuLow, double hi = kHuHigh);

// Projection of the centred rows onto the two leading principal axes.
Eigen::MatrixXd pca2(const Eigen::MatrixXd& x);

}  // namespace hagan
