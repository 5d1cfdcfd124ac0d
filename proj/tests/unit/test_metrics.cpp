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

#include <cmath>

#include <gtest/gtest.h>

#include "hagan/errors.hpp"
#include "hagan/extractor.hpp"
#include "hagan/metrics.hpp"
#include "hagan/phantom.hpp"
#include "testkit.hpp"

namespace hagan {
namespace {

Volume line(std::vector<float> v) {
  Volume out;
  out.d = 1;
  out.h = 1;
  out.w = static_cast<std::int64_t>(v.size());
  out.data = std::move(v);
  return out;
}

Eigen::MatrixXd normal_rows(Rng& rng, int n, int f, double shift = 0.0, double sd = 1.0) {
  Eigen::MatrixXd x(n, f);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < f; ++j) x(i, j) = shift + sd * rng.normal();
  return x;
}

TEST(MetricOracles, AllListedCasesHold) {
  for (const auto& c : testkit::metric_oracle_checks()) {
    EXPECT_TRUE(c.ok()) << c.what << ": got " << c.value << ", expected " << c.expected;
  }
}

TEST(Frechet, NonnegativeAndZeroForShiftFreeCopies) {
  Rng rng(3);
  for (int t = 0; t < 5; ++t) {
    const auto a = normal_rows(rng, 60, 4), b = normal_rows(rng, 80, 4, 0.3, 1.5);
    EXPECT_GE(frechet_distance(a, b), 0.0);
  }
  const auto a = normal_rows(rng, 50, 3);
  EXPECT_NEAR(frechet_distance(a, a), 0.0, 1e-9);
}

TEST(Frechet, MeanShiftAddsSquaredNorm) {
  Rng rng(4);
  const auto a = normal_rows(rng, 100, 3);
  Eigen::MatrixXd b = a;
  b.col(1).array() += 2.0;
  EXPECT_NEAR(frechet_distance(a, b), 4.0, 1e-8);
}

TEST(Frechet, RejectsMismatchedInputs) {
  Rng rng(5);
  EXPECT_THROW(frechet_distance(normal_rows(rng, 10, 3), normal_rows(rng, 10, 4)), ShapeError);
  EXPECT_THROW(frechet_distance(normal_rows(rng, 1, 3), normal_rows(rng, 10, 3)), ConfigError);
  auto bad = normal_rows(rng, 10, 3);
  bad(2, 1) = std::nan("");
  EXPECT_THROW(frechet_distance(bad, normal_rows(rng, 10, 3)), NumericError);
  FeatureSet fa{normal_rows(rng, 10, 3), "x"}, fb{normal_rows(rng, 10, 3), "y"};
  EXPECT_THROW(frechet_distance(fa, fb), ConfigError);
  EXPECT_THROW(mmd_rbf(fa, fb), ConfigError);
}

TEST(Mmd, SeparatesShiftedDistributions) {
  Rng rng(6);
  const auto a = normal_rows(rng, 200, 3), same = normal_rows(rng, 200, 3), shifted = normal_rows(rng, 200, 3, 1.0);
  MmdOptions opt;
  opt.bandwidth = 1.5;
  EXPECT_GT(mmd_rbf(a, shifted, opt), 10 * std::abs(mmd_rbf(a, same, opt)));
  Rng perm(1);
  EXPECT_LT(mmd_permutation_test(a, shifted, 50, perm, opt), 0.05);
  EXPECT_GT(mmd_permutation_test(a, same, 50, perm, opt), 0.05);
}

TEST(Mmd, MedianDistanceOfKnownPoints) {
  Eigen::MatrixXd x(3, 1);
  x << 0, 1, 3;  // pairwise 1, 2, 3
  EXPECT_DOUBLE_EQ(median_distance(x), 2.0);
}

TEST(Ssim, BoundedAndDecreasingWithNoise) {
  Rng rng(8);
  auto a = Volume::filled(8, 8, 8, 0.0f);
  for (auto& v : a.data) v = static_cast<float>(0.5 * rng.normal());
  auto b = a, c = a;
  for (auto& v : b.data) v += static_cast<float>(0.05 * rng.normal());
  for (auto& v : c.data) v += static_cast<float>(0.3 * rng.normal());
  const double sb = ssim(a, b), sc = ssim(a, c);
  EXPECT_LT(sb, 1.0);
  EXPECT_GT(sb, sc);
  EXPECT_GE(sc, -1.0);
  EXPECT_NEAR(ssim(a, b), ssim(b, a), 1e-12);
}

TEST(Psnr, MatchesMseFormula) {
  const auto a = line({0.0f, 0.0f, 0.0f, 0.0f});
  const auto b = line({0.1f, -0.1f, 0.1f, -0.1f});
  const double mse = 0.01;
  EXPECT_NEAR(psnr(a, b), 10 * std::log10(4.0 / mse), 1e-5);
  EXPECT_THROW(psnr(a, line({0.0f, 0.0f})), ShapeError);
}

TEST(Nmse, ZeroReferenceThrows) {
  EXPECT_THROW(nmse(line({0.0f, 0.0f}), line({1.0f, 0.0f})), NumericError);
}

TEST(Dice, EmptyMasksAgreeAndSizesMustMatch) {
  const std::vector<std::uint8_t> e(4, 0), s{1, 0};
  EXPECT_EQ(dice(e, e), 1.0);
  EXPECT_THROW(dice(e, s), ShapeError);
}

TEST(Ks, PValueSmallForDifferentSamples) {
  Rng rng(9);
  std::vector<double> a(500), b(500), c(500);
  for (auto& x : a) x = rng.normal();
  for (auto& x : b) x = rng.normal();
  for (auto& x : c) x = 1 + rng.normal();
  EXPECT_GT(ks_test(a, b).p_value, 0.01);
  EXPECT_LT(ks_test(a, c).p_value, 1e-6);
  EXPECT_THROW(ks_test({}, a), ConfigError);
}

TEST(Ks, KolmogorovQKnownValues) {
  EXPECT_NEAR(kolmogorov_q(1.36), 0.0494, 5e-4);  // the classic 5% critical value
  EXPECT_NEAR(kolmogorov_q(0.0), 1.0, 1e-12);
  EXPECT_LT(kolmogorov_q(3.0), 1e-7);
}

TEST(Hu, ClampsOutsideTheWindow) {
  EXPECT_EQ(hu_to_unit(-3000), -1.0);
  EXPECT_EQ(hu_to_unit(3000), 1.0);
  EXPECT_THROW(hu_to_unit(0, 10, 10), ConfigError);
  const std::vector<float> hu{-1024, -212, 600, 2000};
  const auto v = hu_window_map(1, 2, 2, hu);
  EXPECT_FLOAT_EQ(v.data[0], -1.0f);
  EXPECT_NEAR(v.data[1], 0.0f, 1e-7);
  EXPECT_FLOAT_EQ(v.data[3], 1.0f);
}

TEST(Pca2, RecoversDominantAxis) {
  Rng rng(10);
  Eigen::MatrixXd x(200, 3);
  for (int i = 0; i < 200; ++i) {
    const double t = 5 * rng.normal();
    x.row(i) << t, t + 0.01 * rng.normal(), 0.1 * rng.normal();
  }
  const auto p = pca2(x);
  ASSERT_EQ(p.cols(), 2);
  Eigen::VectorXd first = p.col(0);
  EXPECT_GT(first.squaredNorm(), 100 * p.col(1).squaredNorm());
}

TEST(Extractor, DeterministicAndSeedDependent) {
  const auto v = phantom_generate(3, 1, 32).volume;
  const FeatureExtractor e1(42, 32), e2(42, 32), e3(43, 32);
  EXPECT_EQ(e1.features(v), e2.features(v));
  EXPECT_EQ(e1.fingerprint(), e2.fingerprint());
  EXPECT_NE(e1.fingerprint(), e3.fingerprint());
  EXPECT_EQ(static_cast<std::int64_t>(e1.features(v).size()), e1.feature_dim());
}

TEST(Extractor, ZeroVolumeGivesZeroFeatures) {
  const FeatureExtractor e(1, 16);
  for (double f : e.features(Volume::filled(16, 16, 16, 0.0f))) EXPECT_EQ(f, 0.0);
}

TEST(Extractor, RefusesWrongExtent) {
  const FeatureExtractor e(1, 16);
  EXPECT_THROW(e.features(Volume::filled(32, 32, 32)), ShapeError);
  EXPECT_THROW(FeatureExtractor(1, 12), ConfigError);
}

}  // namespace
}  // namespace hagan
