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

#include "hagan/errors.hpp"
#include "hagan/networks.hpp"
#include "hagan/ops.hpp"
#include "testkit.hpp"

namespace hagan {
namespace {

Shape out_shape(const NetworkGraph& g, const Shape& in, std::size_t k = 0) {
  return infer_shapes(g, in).at(static_cast<std::size_t>(g.outputs.at(k)));
}

TEST(Reference, EveryNetworkMatchesLayerTables) {
  for (const auto& c : testkit::reference_shape_checks()) {
    EXPECT_TRUE(c.ok()) << c.what << ": expected " << shape_str(c.expected) << ", got " << shape_str(c.actual);
  }
}

TEST(Desk, ShapesFollowScaledTables) {
  const auto cfg = NetConfig::desk();
  const auto g = build_hagan(cfg);
  EXPECT_EQ(out_shape(g.g_a, {64}), (Shape{8, 16, 16, 16}));
  EXPECT_EQ(out_shape(g.g_l, {8, 16, 16, 16}), (Shape{1, 16, 16, 16}));
  EXPECT_EQ(out_shape(g.g_h, {8, 2, 16, 16}), (Shape{1, 8, 64, 64}));
  EXPECT_EQ(out_shape(g.e_h, {1, 8, 64, 64}), (Shape{8, 2, 16, 16}));
  EXPECT_EQ(out_shape(g.e_g, {8, 16, 16, 16}), (Shape{64}));
  EXPECT_EQ(out_shape(build_classifier(32, 5), {1, 32, 32, 32}), (Shape{5}));
  auto cond = cfg;
  cond.num_classes = 5;
  const auto gc = build_hagan(cond);
  EXPECT_EQ(gc.g_a.input_shape, (Shape{69}));
  EXPECT_EQ(out_shape(gc.d_h, {1, 8, 64, 64}, 0), (Shape{1}));
  EXPECT_EQ(out_shape(gc.d_h, {1, 8, 64, 64}, 1), (Shape{5}));
  EXPECT_THROW(infer_shapes(g.g_l, {3, 16, 16, 16}), ShapeError);
}

TEST(Config, ValidationRejectsInconsistentValues) {
  auto c = NetConfig::desk();
  c.full_resolution = 60;
  EXPECT_THROW(c.validate(), ConfigError);
  c = NetConfig::desk();
  c.low_resolution = 12;
  c.full_resolution = 48;
  EXPECT_THROW(c.validate(), ConfigError);
  c = NetConfig::desk();
  c.subvol_multiplier = {3, 8};
  EXPECT_THROW(c.validate(), ConfigError);
  c = NetConfig::desk();
  c.subvol_multiplier = {1, 32};
  EXPECT_THROW(c.validate(), ConfigError);
  EXPECT_EQ(NetConfig::desk().channels(64), 8);
  EXPECT_EQ(NetConfig::desk().channels(16), 2);
  EXPECT_EQ(NetConfig::reference().channels(512), 512);
}

TEST(ParameterCount, DenseLayerAndEmptyGraph) {
  const auto g = build_g_a(NetConfig::reference());
  std::int64_t dense = 0;
  for (const auto& p : param_specs(g)) {
    if (p.name.rfind("g_a/dense/", 0) == 0 && p.trainable) {
      std::int64_t n = 1;
      for (auto e : p.shape) n *= e;
      dense += n;
    }
  }
  EXPECT_EQ(dense, 1024 * 32768 + 32768);
  NetworkGraph empty;
  empty.layers.push_back(LayerSpec{});
  empty.input_shape = {4};
  EXPECT_EQ(parameter_count(empty), 0);
}

TEST(ParameterCount, GrowthFrom32To256IsBelowSevenPercent) {
  auto at = [](std::int64_t res) {
    auto c = NetConfig::reference();
    c.full_resolution = res;
    c.low_resolution = res / 4;
    c.subvol_multiplier = {1, std::min<std::int64_t>(8, res / 4)};
    return parameter_count(build_hagan(c).all());
  };
  const double small = static_cast<double>(at(32)), large = static_cast<double>(at(256));
  EXPECT_GT(large, small);
  EXPECT_LT(large / small - 1, 0.07);
}

TEST(ParameterCount, IndependentOfMultiplier) {
  auto c = NetConfig::desk();
  const auto base = parameter_count(build_hagan(c).all());
  for (Ratio m : {Ratio{1, 4}, Ratio{1, 2}, Ratio{1, 1}}) {
    c.subvol_multiplier = m;
    EXPECT_EQ(parameter_count(build_hagan(c).all()), base);
  }
}

TEST(Conditional, SharesParameterNamesExceptInputAndHeads) {
  auto c = NetConfig::desk();
  auto cond = c;
  cond.num_classes = 5;
  const auto u = build_hagan(c), k = build_hagan(cond);
  const auto gu = u.all(), gk = k.all();
  for (std::size_t i = 0; i < gu.size(); ++i) {
    std::map<std::string, Shape> a, b;
    for (const auto& p : param_specs(*gu[i])) a[p.name] = p.shape;
    for (const auto& p : param_specs(*gk[i])) b[p.name] = p.shape;
    for (const auto& [name, shape] : a) {
      ASSERT_TRUE(b.count(name)) << name;
      if (name != "g_a/dense/weight") EXPECT_EQ(b[name], shape) << name;
    }
    for (const auto& [name, shape] : b) {
      if (!a.count(name)) EXPECT_NE(name.find("cls"), std::string::npos) << name;
    }
  }
}

TEST(Forward, DecoderOutputsLieInOpenUnitInterval) {
  ParamStore<float> store;
  const auto cfg = NetConfig::desk();
  Network<float> gl(build_g_l(cfg), store);
  Rng rng(4);
  gl.init_params(rng);
  auto a = Tensor<float>::zeros({1, 8, 16, 16, 16});
  for (auto& v : a.values()) v = static_cast<float>(30 * rng.normal());
  const auto y = gl.forward(a);
  EXPECT_EQ(y.shape(), (Shape{1, 1, 16, 16, 16}));
  for (float v : y.values()) {
    EXPECT_GE(v, -1.0f);
    EXPECT_LE(v, 1.0f);
  }
}

TEST(Forward, ClassifierLogitsSoftmaxToOne) {
  ParamStore<float> store;
  Network<float> cls(build_classifier(32, 5), store);
  Rng rng(5);
  cls.init_params(rng);
  auto x = Tensor<float>::zeros({2, 1, 32, 32, 32});
  for (auto& v : x.values()) v = static_cast<float>(rng.uniform() * 2 - 1);
  const auto p = softmax(cls.forward(x), 1);
  for (int i = 0; i < 2; ++i) {
    double s = 0;
    for (int k = 0; k < 5; ++k) s += p.values()[i * 5 + k];
    EXPECT_NEAR(s, 1.0, 1e-6);
  }
}

TEST(Consistency, WindowedHighBranchEqualsCropOutsideMargin) {
  for (Ratio m : {Ratio{1, 2}, Ratio{1, 1}}) {
    auto cfg = NetConfig::desk();
    cfg.subvol_multiplier = m;
    const auto r = testkit::gh_window_consistency(cfg, 21);
    EXPECT_GT(r.compared, 0);
    EXPECT_EQ(r.max_diff, 0.0) << m.num << "/" << m.den;
  }
}

TEST(Consistency, MarginIsNeeded) {
  // Without the margin the zero padding at window edges shows up.
  auto cfg = NetConfig::desk();
  cfg.subvol_multiplier = {1, 2};
  EXPECT_GT(testkit::gh_window_consistency(cfg, 21, 0).max_diff, 0.0);
}

TEST(Consistency, SuperResolutionGenerator) {
  SRConfig cfg;
  cfg.hr_resolution = 32;
  cfg.subvol_multiplier = {1, 2};
  const auto r = testkit::sr_window_consistency(cfg, 22);
  EXPECT_GT(r.compared, 0);
  EXPECT_EQ(r.max_diff, 0.0);
}

TEST(Summary, ListsEveryLayer) {
  const auto g = build_e_h(NetConfig::desk());
  const auto s = summary(g, {1, 8, 64, 64});
  // One row per layer, with a norm and its activation sharing a row.
  std::size_t convs = 0, rows = 0, pos = 0;
  for (const auto& l : g.layers) convs += l.kind == LayerKind::kConv;
  while ((pos = s.find("Conv3D", pos)) != std::string::npos) ++rows, ++pos;
  EXPECT_EQ(rows, convs);
  EXPECT_NE(s.find("1x8x64x64"), std::string::npos);
  EXPECT_NE(s.find("8x2x16x16"), std::string::npos);
}

TEST(Network, ForwardCountsPasses) {
  ParamStore<float> store;
  Network<float> gl(build_g_l(NetConfig::desk()), store);
  Rng rng(1);
  gl.init_params(rng);
  gl.forward(Tensor<float>::zeros({1, 8, 16, 16, 16}));
  EXPECT_EQ(gl.forward_count(), 1);
}

}  // namespace
}  // namespace hagan
