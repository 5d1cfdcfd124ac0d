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

#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include <Eigen/Dense>

#include "hagan/errors.hpp"
#include "hagan/memory.hpp"
#include "hagan/ops.hpp"
#include "hagan/param_store.hpp"
#include "hagan/spectral_norm.hpp"
#include "hagan/tape.hpp"
#include "testkit.hpp"

namespace hagan {
namespace {

using testkit::randn;

std::vector<double> to_vec(const Tensor<double>& t) { return {t.values().begin(), t.values().end()}; }

TEST(Tensor, ZerosFullFromAndClone) {
  auto z = Tensor<double>::zeros({2, 3});
  EXPECT_EQ(z.numel(), 6);
  for (double v : z.values()) EXPECT_EQ(v, 0.0);
  auto f = Tensor<float>::full({4}, 2.5f);
  EXPECT_EQ(f.values()[3], 2.5f);
  const std::vector<double> src{1, 2, 3};
  auto t = Tensor<double>::from({3}, src);
  auto c = t.clone();
  c.values()[0] = 9;
  EXPECT_EQ(t.values()[0], 1.0);
  EXPECT_THROW(Tensor<double>::from({2}, src), ShapeError);
  EXPECT_THROW(Tensor<double>::zeros({2}).item(), ShapeError);
}

TEST(Tensor, CastRoundTrip) {
  const std::vector<float> src{0.5f, -1.25f};
  auto d = cast<double>(Tensor<float>::from({2}, src));
  EXPECT_EQ(d.values()[1], -1.25);
}

TEST(Memory, CounterTracksLiveAndPeakPerTag) {
  CounterScope scope;
  {
    auto a = Tensor<float>::zeros({1000}, MemTag::kActivation);
    auto p = Tensor<double>::zeros({10}, MemTag::kParameter);
    EXPECT_EQ(scope.counter().live(MemTag::kActivation), 4000);
    EXPECT_EQ(scope.counter().live(MemTag::kParameter), 80);
    EXPECT_EQ(scope.counter().live_total(), 4080);
  }
  EXPECT_EQ(scope.counter().live_total(), 0);
  EXPECT_EQ(scope.counter().peak_total(), 4080);
  scope.counter().reset_peaks();
  EXPECT_EQ(scope.counter().peak_total(), 0);
}

TEST(Memory, BufferReportsToItsCreationScope) {
  Tensor<float> outer;
  CounterScope a;
  {
    CounterScope b;
    outer = Tensor<float>::zeros({8});
    EXPECT_EQ(b.counter().live_total(), 32);
  }
  EXPECT_EQ(a.counter().live_total(), 0);
  outer = Tensor<float>();
  EXPECT_EQ(a.counter().live_total(), 0);
}

TEST(Conv3d, UnitKernelIsIdentity) {
  Rng rng(1);
  auto x = randn({1, 1, 3, 4, 5}, rng);
  auto w = Tensor<double>::full({1, 1, 1, 1, 1}, 1.0);
  auto b = Tensor<double>::zeros({1});
  auto y = conv3d(x, w, b, {1, 1, 1}, {0, 0, 0});
  EXPECT_EQ(to_vec(y), to_vec(x));
}

TEST(Conv3d, OnesKernelCountsInBoundsTaps) {
  auto x = Tensor<double>::full({1, 1, 2, 2, 2}, 1.0);
  auto w = Tensor<double>::full({1, 1, 3, 3, 3}, 1.0);
  for (auto algo : {ConvAlgo::kDirect, ConvAlgo::kSliceGemm}) {
    auto y = conv3d(x, w, Tensor<double>{}, {1, 1, 1}, {1, 1, 1}, algo);
    ASSERT_EQ(y.shape(), (Shape{1, 1, 2, 2, 2}));
    for (double v : y.values()) EXPECT_EQ(v, 8.0);
  }
  auto x3 = Tensor<double>::full({1, 1, 3, 3, 3}, 1.0);
  auto y3 = conv3d(x3, w, Tensor<double>{}, {1, 1, 1}, {1, 1, 1});
  EXPECT_EQ(y3.values()[0], 8.0);   // corner
  EXPECT_EQ(y3.values()[1], 12.0);  // edge
  EXPECT_EQ(y3.values()[13], 27.0);  // centre
}

TEST(Conv3d, StrideTwoShape) {
  EXPECT_EQ(conv_out_extent(4, 4, 2, 1), 2);
  auto y = conv3d(Tensor<double>::zeros({1, 1, 4, 4, 4}), Tensor<double>::zeros({1, 1, 4, 4, 4}), Tensor<double>{},
                  {2, 2, 2}, {1, 1, 1});
  EXPECT_EQ(y.shape(), (Shape{1, 1, 2, 2, 2}));
  EXPECT_THROW(conv_out_extent(2, 5, 1, 0), ShapeError);
  EXPECT_THROW(conv3d(Tensor<double>::zeros({1, 2, 4, 4, 4}), Tensor<double>::zeros({1, 3, 1, 1, 1}), Tensor<double>{},
                      {1, 1, 1}, {0, 0, 0}),
               ShapeError);
}

TEST(Conv3d, MatchesNestedLoopOracleOnRandom8Cubed) {
  Rng rng(2);
  auto x = randn({2, 3, 8, 8, 8}, rng);
  auto w = randn({4, 3, 3, 3, 3}, rng, 0.2);
  auto b = randn({4}, rng);
  for (auto [stride, pad, k] : std::vector<std::tuple<Int3, Int3, int>>{{{1, 1, 1}, {1, 1, 1}, 3},
                                                                        {{2, 2, 2}, {1, 1, 1}, 3},
                                                                        {{1, 1, 1}, {0, 0, 0}, 3}}) {
    const auto ref = testkit::conv3d_oracle(x, w, b, stride, pad);
    double scale = 0;
    for (double v : ref.values()) scale = std::max(scale, std::abs(v));
    for (auto algo : {ConvAlgo::kDirect, ConvAlgo::kSliceGemm, ConvAlgo::kAuto}) {
      const auto y = conv3d(x, w, b, stride, pad, algo);
      ASSERT_EQ(y.shape(), ref.shape());
      EXPECT_LT(testkit::max_abs_diff(y.values(), ref.values()) / scale, 1e-6) << k;
    }
  }
  auto w4 = randn({2, 3, 4, 4, 4}, rng, 0.2);
  const auto ref = testkit::conv3d_oracle(x, w4, Tensor<double>{}, {2, 2, 2}, {1, 1, 1});
  EXPECT_LT(testkit::max_abs_diff(conv3d(x, w4, Tensor<double>{}, {2, 2, 2}, {1, 1, 1}).values(), ref.values()), 1e-9);
}

TEST(Conv3d, SliceGemmIsBitwiseDeterministic) {
  Rng rng(3);
  auto x = cast<float>(randn({1, 4, 6, 6, 6}, rng));
  auto w = cast<float>(randn({4, 4, 3, 3, 3}, rng));
  auto b = Tensor<float>::zeros({4});
  const auto a = conv3d(x, w, b, {1, 1, 1}, {1, 1, 1});
  const auto c = conv3d(x, w, b, {1, 1, 1}, {1, 1, 1});
  EXPECT_TRUE(std::equal(a.values().begin(), a.values().end(), c.values().begin()));
}

TEST(Interp, ConstantIsPreserved) {
  auto x = Tensor<double>::full({1, 1, 3, 3, 3}, 0.7);
  for (bool corners : {false, true}) {
    auto y = trilinear_interp(x, Ratio{2, 1}, corners);
    EXPECT_EQ(y.shape(), (Shape{1, 1, 6, 6, 6}));
    for (double v : y.values()) EXPECT_NEAR(v, 0.7, 1e-15);
  }
}

TEST(Interp, AlignedCornersReproduceLinearRamp) {
  auto x = Tensor<double>::zeros({1, 1, 4, 2, 2});
  for (int z = 0; z < 4; ++z)
    for (int i = 0; i < 4; ++i) x.values()[z * 4 + i] = 0.5 * z - 1;
  auto y = trilinear_interp(x, Ratio{2, 1}, true);
  ASSERT_EQ(y.dim(2), 8);
  for (int z = 0; z < 8; ++z) {
    const double expect = -1 + 0.5 * (3.0 * z / 7.0);
    for (int i = 0; i < 16; ++i) EXPECT_NEAR(y.values()[z * 16 + i], expect, 1e-12);
  }
}

TEST(Interp, HalfPixelRampIsExactAwayFromBorder) {
  auto x = Tensor<double>::zeros({1, 1, 6, 1, 1});
  for (int z = 0; z < 6; ++z) x.values()[z] = 2.0 * z;
  auto y = trilinear_interp(x, Ratio{2, 1}, false);
  // Output i samples source (i + 0.5) / 2 - 0.5, clamped at the ends.
  ASSERT_EQ(y.shape(), (Shape{1, 1, 12, 2, 2}));
  for (int i = 1; i < 11; ++i) EXPECT_NEAR(y.values()[i * 4], 2.0 * ((i + 0.5) / 2 - 0.5), 1e-12);
  EXPECT_EQ(y.values()[0], 0.0);
  EXPECT_EQ(y.values()[11 * 4], 10.0);
}

TEST(Interp, HalfDownsampleIsBoxAverage) {
  Rng rng(4);
  auto x = randn({1, 1, 4, 4, 4}, rng);
  auto y = trilinear_interp(x, Ratio{1, 2}, false);
  ASSERT_EQ(y.shape(), (Shape{1, 1, 2, 2, 2}));
  auto X = [&](int z, int r, int c) { return x.values()[(z * 4 + r) * 4 + c]; };
  for (int z = 0; z < 2; ++z)
    for (int r = 0; r < 2; ++r)
      for (int c = 0; c < 2; ++c) {
        double s = 0;
        for (int a = 0; a < 8; ++a) s += X(2 * z + (a >> 2), 2 * r + ((a >> 1) & 1), 2 * c + (a & 1));
        EXPECT_NEAR(y.values()[(z * 2 + r) * 2 + c], s / 8, 1e-12);
      }
}

TEST(Interp, DeskExtentAndErrors) {
  auto y = trilinear_interp(Tensor<float>::zeros({1, 1, 8, 8, 8}), Ratio{2, 1}, false);
  EXPECT_EQ(y.dim(4), 16);
  EXPECT_THROW(trilinear_interp(Tensor<float>::zeros({1, 1, 3, 3, 3}), Ratio{1, 2}, false), ShapeError);
}

TEST(GroupNorm, GroupStatisticsAreStandardised) {
  Rng rng(5);
  for (int trial = 0; trial < 5; ++trial) {
    auto x = randn({2, 6, 2, 3, 3}, rng, 1 + 3 * rng.uniform());
    for (auto& v : x.values()) v += 5;
    GroupNormOptions o;
    o.groups = 3;
    auto y = group_norm(x, Tensor<double>::full({6}, 1.0), Tensor<double>::zeros({6}), o);
    const std::int64_t group = 2 * 18;
    for (std::int64_t g = 0; g < 2 * 3; ++g) {
      double m = 0, v = 0;
      for (std::int64_t i = 0; i < group; ++i) m += y.values()[g * group + i];
      m /= group;
      for (std::int64_t i = 0; i < group; ++i) v += std::pow(y.values()[g * group + i] - m, 2);
      v /= group;
      EXPECT_LT(std::abs(m), 1e-5);
      EXPECT_NEAR(v, 1.0, 1e-4);
    }
  }
}

TEST(GroupNorm, ScaleInvarianceAndLayerNormCase) {
  Rng rng(6);
  auto x = randn({1, 4, 2, 2, 2}, rng);
  auto gamma = Tensor<double>::full({4}, 1.0), beta = Tensor<double>::zeros({4});
  GroupNormOptions o;
  o.groups = 1;
  o.eps = 0;
  const auto y = group_norm(x, gamma, beta, o);
  const auto y10 = group_norm(scale(x, 10.0), gamma, beta, o);
  EXPECT_LT(testkit::max_abs_diff(y.values(), y10.values()), 1e-12);
  double m = 0, v = 0;
  for (double a : x.values()) m += a;
  m /= 32;
  for (double a : x.values()) v += (a - m) * (a - m);
  v /= 32;
  for (int i = 0; i < 32; ++i) EXPECT_NEAR(y.values()[i], (x.values()[i] - m) / std::sqrt(v), 1e-12);
  o.groups = 3;
  EXPECT_THROW(group_norm(x, gamma, beta, o), ShapeError);
}

TEST(GroupNorm, PerSliceNormalisesEachDepthSlice) {
  Rng rng(7);
  auto x = randn({1, 2, 3, 4, 4}, rng);
  GroupNormOptions o;
  o.per_slice = true;
  auto y = group_norm(x, Tensor<double>::full({2}, 1.0), Tensor<double>::zeros({2}), o);
  for (int z = 0; z < 3; ++z) {
    double m = 0;
    for (int c = 0; c < 2; ++c)
      for (int i = 0; i < 16; ++i) m += y.values()[(c * 3 + z) * 16 + i];
    EXPECT_LT(std::abs(m / 32), 1e-12);
  }
}

TEST(BatchNorm, TrainingUpdatesRunningStatistics) {
  auto x = Tensor<double>::zeros({2, 1, 1, 1, 2});
  const double vals[] = {1, 2, 3, 6};
  std::copy(vals, vals + 4, x.values().begin());
  auto rm = Tensor<double>::zeros({1}), rv = Tensor<double>::full({1}, 1.0);
  auto y = batch_norm(x, Tensor<double>::full({1}, 1.0), Tensor<double>::zeros({1}), rm, rv, true, 0.1, 0.0);
  EXPECT_NEAR(rm.values()[0], 0.1 * 3, 1e-12);
  // Running variance uses the unbiased batch variance (14 / 3).
  EXPECT_NEAR(rv.values()[0], 0.9 + 0.1 * 14.0 / 3.0, 1e-12);
  EXPECT_NEAR(y.values()[0], (1 - 3) / std::sqrt(3.5), 1e-12);
  auto e = batch_norm(x, Tensor<double>::full({1}, 1.0), Tensor<double>::zeros({1}), rm, rv, false, 0.1, 0.0);
  EXPECT_NEAR(e.values()[3], (6 - rm.values()[0]) / std::sqrt(rv.values()[0]), 1e-12);
}

TEST(SpectralNorm, IdentityIsUnchanged) {
  auto w = Tensor<double>::zeros({3, 3});
  for (int i = 0; i < 3; ++i) w.values()[i * 4] = 1;
  std::vector<double> u{0.3, 0.5, 0.8}, v(3, 0.0);
  auto r = spectral_norm(w, std::span<double>(u), std::span<double>(v), 1, true);
  EXPECT_NEAR(r.sigma, 1.0, 1e-12);
  EXPECT_LT(testkit::max_abs_diff(r.weight.values(), w.values()), 1e-12);
}

TEST(SpectralNorm, DiagonalConvergesToTopSingularValue) {
  auto w = Tensor<double>::zeros({2, 2});
  w.values()[0] = 3;
  w.values()[3] = 1;
  std::vector<double> u{0.6, 0.8};
  EXPECT_NEAR(power_iteration_sigma(w, std::span<double>(u), 20), 3.0, 1e-6);
}

double top_singular_value(const Tensor<double>& w, std::int64_t rows) {
  Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> m(
      w.data(), rows, w.numel() / rows);
  return Eigen::JacobiSVD<Eigen::MatrixXd>(m).singularValues()(0);
}

TEST(SpectralNorm, NormalisedMatrixHasUnitTopSingularValue) {
  Rng rng(8);
  for (auto [rows, cols, iters] : std::vector<std::tuple<int, int, int>>{{8, 8, 100}, {16, 40, 100}, {64, 64, 400}}) {
    auto w = randn({rows, cols}, rng);
    std::vector<double> u(static_cast<std::size_t>(rows)), v(static_cast<std::size_t>(cols));
    for (auto& a : u) a = rng.normal();
    auto r = spectral_norm(w, std::span<double>(u), std::span<double>(v), iters, true);
    EXPECT_FALSE(r.degenerate);
    const double s = top_singular_value(r.weight, rows);
    EXPECT_GE(s, 0.95) << rows << "x" << cols;
    EXPECT_LE(s, 1.05) << rows << "x" << cols;
  }
}

TEST(SpectralNorm, ZeroMatrixIsDegenerate) {
  auto w = Tensor<double>::zeros({2, 3});
  std::vector<double> u{1, 0}, v(3, 0.0);
  auto r = spectral_norm(w, std::span<double>(u), std::span<double>(v), 1, true);
  EXPECT_TRUE(r.degenerate);
  for (double a : r.weight.values()) EXPECT_EQ(a, 0.0);
}

TEST(Activations, ClosedFormValues) {
  const std::vector<double> src{0.0, -1.0};
  auto x = Tensor<double>::from({2}, src);
  EXPECT_EQ(tanh(x).values()[0], 0.0);
  EXPECT_DOUBLE_EQ(leaky_relu(x, 0.2).values()[1], -0.2);
  EXPECT_EQ(relu(x).values()[1], 0.0);
  EXPECT_DOUBLE_EQ(sigmoid(x).values()[0], 0.5);
  EXPECT_NEAR(elu(x).values()[1], std::exp(-1.0) - 1, 1e-15);
  auto s = softmax(Tensor<double>::full({1, 5}, 3.0), 1);
  for (double v : s.values()) EXPECT_NEAR(v, 0.2, 1e-15);
  EXPECT_NEAR(softplus(800.0), 800.0, 1e-12);
  EXPECT_NEAR(softplus(0.0), std::log(2.0), 1e-15);
}

TEST(Dense, HandMatrixProducts) {
  auto ones = Tensor<double>::full({1, 3}, 1.0);
  auto y = dense(ones, Tensor<double>::full({2, 3}, 1.0), Tensor<double>::full({2}, 1.0));
  EXPECT_EQ(to_vec(y), (std::vector<double>{4, 4}));
  auto eye = Tensor<double>::zeros({3, 3});
  for (int i = 0; i < 3; ++i) eye.values()[i * 4] = 1;
  const std::vector<double> src{1, -2, 3};
  auto x = Tensor<double>::from({1, 3}, src);
  EXPECT_EQ(to_vec(dense(x, eye, Tensor<double>::zeros({3}))), src);
  EXPECT_THROW(dense(x, Tensor<double>::zeros({2, 4}), Tensor<double>{}), ShapeError);
}

TEST(Dense, LatentToSeedVolumeShape) {
  auto y = dense(Tensor<float>::zeros({1, 1024}), Tensor<float>::zeros({512 * 64, 1024}), Tensor<float>{});
  EXPECT_EQ(reshape(y, {1, 512, 4, 4, 4}).shape(), (Shape{1, 512, 4, 4, 4}));
}

TEST(Tape, SumOfSquaresGradient) {
  const std::vector<double> src{1, 2};
  auto x = Tensor<double>::from({2}, src);
  x.set_requires_grad(true);
  GradientTape<double> tape;
  Tensor<double> loss;
  {
    auto rec = tape.record();
    loss = sum(mul(x, x));
  }
  tape.backward(loss);
  EXPECT_EQ(std::vector<double>(x.grad().begin(), x.grad().end()), (std::vector<double>{2, 4}));
  EXPECT_TRUE(tape.empty());
}

TEST(Tape, ReusedTensorAccumulates) {
  const std::vector<double> src{3};
  auto x = Tensor<double>::from({1}, src);
  x.set_requires_grad(true);
  GradientTape<double> tape;
  Tensor<double> loss;
  {
    auto rec = tape.record();
    loss = sum(add(scale(x, 2.0), mul(x, x)));
  }
  tape.backward(loss);
  EXPECT_EQ(x.grad()[0], 2.0 + 6.0);
}

TEST(Tape, ErrorsAndNoRecordingWithoutTape) {
  auto x = Tensor<double>::full({2}, 1.0);
  x.set_requires_grad(true);
  GradientTape<double> tape;
  Tensor<double> y;
  {
    auto rec = tape.record();
    y = scale(x, 2.0);
  }
  EXPECT_THROW(tape.backward(y), AutodiffError);
  GradientTape<double> other;
  EXPECT_THROW(other.backward(sum(x)), AutodiffError);
  auto untaped = sum(x);
  EXPECT_TRUE(untaped.is_leaf());
}

TEST(Tape, ConvNormTanhChainMatchesFiniteDifferences) {
  Rng rng(9);
  auto loss = [](const std::vector<Tensor<double>>& v) {
    GroupNormOptions o;
    o.groups = 2;
    return sum(tanh(group_norm(conv3d(v[0], v[1], v[2], {1, 1, 1}, {1, 1, 1}), v[3], v[4], o)));
  };
  auto r = testkit::grad_check(loss,
                               {randn({1, 2, 3, 3, 3}, rng), randn({4, 2, 3, 3, 3}, rng, 0.3), randn({4}, rng),
                                randn({4}, rng), randn({4}, rng)},
                               1e-5);
  EXPECT_LT(r.max_rel_error, 1e-4) << r.worst;
}

class GradientSuite : public ::testing::TestWithParam<std::size_t> {};

TEST_P(GradientSuite, MatchesCentralDifferences) {
  static const auto cases = testkit::gradient_suite();
  const auto& c = cases.at(GetParam());
  const auto r = testkit::grad_check(c.loss, c.inputs, 1e-6, c.max_elements);
  EXPECT_GT(r.checked, 0);
  EXPECT_LT(r.max_rel_error, 1e-4) << c.name << ": " << r.worst;
}

INSTANTIATE_TEST_SUITE_P(AllCases, GradientSuite,
                         ::testing::Range<std::size_t>(0, testkit::gradient_suite().size()),
                         [](const auto& info) { return testkit::gradient_suite()[info.param].name; });

TEST(Adam, ZeroGradientLeavesParameter) {
  ParamStore<double> store;
  auto& p = store.create("p", {3});
  p.values()[0] = 1.5;
  p.ensure_grad();
  adam_step(store, "", AdamConfig{0.1, 0.0, 0.999, 1e-8});
  EXPECT_EQ(p.values()[0], 1.5);
}

TEST(Adam, HandComputedSteps) {
  ParamStore<double> store;
  auto& p = store.create("p", {1});
  const AdamConfig cfg{0.01, 0.5, 0.9, 1e-8};
  double m = 0, v = 0, x = 0;
  const double grads[] = {1.0, -2.0, 0.5};
  for (int t = 1; t <= 3; ++t) {
    const double g = grads[t - 1];
    p.ensure_grad()[0] = g;
    adam_step(store, "", cfg);
    m = 0.5 * m + 0.5 * g;
    v = 0.9 * v + 0.1 * g * g;
    x -= 0.01 * (m / (1 - std::pow(0.5, t))) / (std::sqrt(v / (1 - std::pow(0.9, t))) + 1e-8);
    EXPECT_NEAR(p.values()[0], x, 1e-15);
    p.clear_grad();
  }
  EXPECT_EQ(store.entry("p").step, 3);
}

TEST(Adam, FirstStepMagnitudeAndZeroBeta1) {
  ParamStore<double> store;
  auto& p = store.create("p", {2});
  p.ensure_grad()[0] = 1.0;
  p.mutable_grad()[1] = 1.0;
  adam_step(store, "", AdamConfig{1e-3, 0.0, 0.999, 1e-8});
  EXPECT_NEAR(p.values()[0], -1e-3 / (1 + 1e-8), 1e-15);
  p.mutable_grad()[0] = -4.0;
  adam_step(store, "", AdamConfig{1e-3, 0.0, 0.999, 1e-8});
  EXPECT_EQ(store.entry("p").m.values()[0], -4.0);
}

TEST(Adam, MissingGradientThrows) {
  ParamStore<double> store;
  store.create("a/w", {2});
  store.create("a/u", {2}, false);
  EXPECT_THROW(adam_step(store, "a/", AdamConfig{}), AutodiffError);
}

TEST(ParamStore, HashCountAndPrefixes) {
  ParamStore<float> store;
  store.create("g_a/w", {2, 3});
  store.create("g_a/u", {2}, false);
  store.create("g_h/w", {4});
  EXPECT_EQ(store.count("g_a/"), 6);
  EXPECT_EQ(store.names("g_a/").size(), 2u);
  EXPECT_EQ(store.names("g_a/", true).size(), 1u);
  const auto h = store.hash("g_h/");
  store.at("g_a/w").values()[0] = 1;
  EXPECT_EQ(store.hash("g_h/"), h);
  store.at("g_h/w").values()[0] = 1;
  EXPECT_NE(store.hash("g_h/"), h);
  EXPECT_TRUE(has_prefix("g_a/w", "g_a/"));
  EXPECT_FALSE(has_prefix("g_a/w", "g_h/"));
}

TEST(Finite, NanOutputRaisesNumericError) {
  const std::vector<double> src{std::numeric_limits<double>::quiet_NaN()};
  auto x = Tensor<double>::from({1}, src);
  EXPECT_THROW(tanh(x), NumericError);
  set_finite_checks(false);
  EXPECT_NO_THROW(tanh(x));
  set_finite_checks(true);
}

}  // namespace
}  // namespace hagan
