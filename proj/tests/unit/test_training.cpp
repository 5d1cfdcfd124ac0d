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
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "hagan/checkpoint.hpp"
#include "hagan/errors.hpp"
#include "hagan/losses.hpp"
#include "hagan/phantom.hpp"
#include "hagan/tape.hpp"
#include "hagan/trainer.hpp"
#include "testkit.hpp"

namespace hagan {
namespace {

namespace fs = std::filesystem;

// Small but structurally complete configuration for fast tests.
TrainConfig tiny(std::int64_t classes = 0) {
  TrainConfig c;
  c.net.full_resolution = 32;
  c.net.low_resolution = 8;
  c.net.latent_dim = 16;
  c.net.feature_channels = 4;
  c.net.subvol_multiplier = {1, 4};
  c.net.num_classes = classes;
  c.seed = 5;
  return c;
}

fs::path temp_path(const std::string& name) {
  auto dir = fs::temp_directory_path() / "hagan_test_training";
  fs::create_directories(dir);
  return dir / name;
}

Tensor<double> logits(std::vector<double> v) {
  const auto n = static_cast<std::int64_t>(v.size());
  return Tensor<double>::from({n, 1}, v);
}

TEST(GanLoss, ZeroLogitsAndLimits) {
  EXPECT_NEAR(d_gan_loss(logits({0, 0}), logits({0, 0})).item(), 2 * std::log(2.0), 1e-15);
  EXPECT_NEAR(g_gan_loss(logits({0})).item(), std::log(2.0), 1e-15);
  EXPECT_NEAR(g_gan_loss(logits({0}), true).item(), -std::log(2.0), 1e-15);
  EXPECT_LT(d_gan_loss(logits({60}), logits({-60})).item(), 1e-20);
  const std::vector<double> nan{std::nan("")};
  EXPECT_THROW(d_gan_loss(Tensor<double>::from({1, 1}, nan), logits({0})), NumericError);
}

TEST(ClassLoss, UniformAndConfident) {
  const std::vector<int> labels{3};
  EXPECT_NEAR(class_loss(Tensor<double>::zeros({1, 5}), labels).item(), std::log(5.0), 1e-15);
  auto sure = Tensor<double>::zeros({1, 5});
  sure.values()[3] = 60;
  EXPECT_LT(class_loss(sure, labels).item(), 1e-20);
  const std::vector<int> bad{5};
  EXPECT_THROW(class_loss(sure, bad), ShapeError);
}

TEST(ReconLoss, ConstantsAndShapes) {
  auto a = Tensor<double>::full({1, 1, 2, 2, 2}, 0.25), b = Tensor<double>::full({1, 1, 2, 2, 2}, -0.25);
  EXPECT_DOUBLE_EQ(recon_loss(a, b).item(), 0.5);
  EXPECT_EQ(recon_loss(a, a).item(), 0.0);
  // A generator mapping everything to zero against inputs of 0.3, high plus low term.
  auto x = Tensor<double>::full({1, 1, 2, 2, 2}, 0.3), zero = Tensor<double>::zeros({1, 1, 2, 2, 2});
  EXPECT_NEAR(add(recon_loss(x, zero), recon_loss(x, zero)).item(), 0.6, 1e-15);
  EXPECT_THROW(recon_loss(a, Tensor<double>::zeros({1, 1, 2, 2, 3})), ShapeError);
}

TEST(Config, DefaultLossWeightsAndValidation) {
  TrainConfig c;
  EXPECT_EQ(c.weights.lambda1, 5.0);
  EXPECT_EQ(c.weights.lambda2, 5.0);
  EXPECT_EQ(c.beta1, 0.0);
  EXPECT_EQ(c.beta2, 0.999);
  c.batch = 0;
  EXPECT_THROW(c.validate(), ConfigError);
}

TEST(Prepare, SharedWindowAndShapes) {
  Trainer<float> tr(tiny());
  const auto data = testkit::random_dataset(tr.config().net, 3, 1);
  const auto ctx = tr.prepare(data);
  const auto len = tr.config().net.subvol_depth();
  EXPECT_EQ(ctx.window.scale, 4);
  EXPECT_EQ(ctx.window.length * 4, len);
  EXPECT_EQ(ctx.real_sub.shape(), (Shape{2, 1, len, 32, 32}));
  EXPECT_EQ(ctx.x_low.shape(), (Shape{2, 1, 8, 8, 8}));
  EXPECT_EQ(ctx.z.shape(), (Shape{2, 16}));
  // The real sub-volume is the same window of the batch.
  const auto crop = select_high(ctx.x_high, ctx.window);
  EXPECT_EQ(testkit::max_abs_diff(crop.values(), ctx.real_sub.values()), 0.0);
}

TEST(Isolation, EachPhaseUpdatesOnlyItsGroups) {
  for (std::int64_t classes : {0, 3}) {
    const auto r = testkit::update_isolation(tiny(classes), 2);
    EXPECT_EQ(r.phases, 8);
    for (const auto& v : r.violations) ADD_FAILURE() << v;
  }
}

TEST(Isolation, EncoderHighBackwardLeavesGeneratorWithoutGradients) {
  Trainer<float> tr(tiny());
  const auto ctx = tr.prepare(testkit::random_dataset(tr.config().net, 2, 2));
  tr.store().set_requires_grad("e_h/", true);
  GradientTape<float> tape;
  Tensor<float> loss;
  {
    auto rec = tape.record();
    loss = recon_loss(ctx.real_sub, tr.g_h().forward(tr.e_h().forward(ctx.real_sub)));
  }
  tape.backward(loss);
  for (const auto& [name, e] : tr.store().entries()) {
    if (has_prefix(name, "e_h/") && e.trainable) {
      EXPECT_TRUE(e.value.has_grad()) << name;
    } else {
      EXPECT_FALSE(e.value.has_grad()) << name;
    }
  }
  tr.store().clear_grads();
  tr.store().set_requires_grad("", false);
}

TEST(Training, StepsAreFiniteAndNonnegative) {
  for (std::int64_t classes : {0, 3}) {
    Trainer<float> tr(tiny(classes));
    const auto data = testkit::random_dataset(tr.config().net, 4, 3);
    for (int s = 0; s < 3; ++s) {
      const auto r = tr.step(data);
      for (double v : {r.d_low, r.d_high, r.g_low, r.g_high, r.rec_h, r.rec_g}) {
        EXPECT_TRUE(std::isfinite(v));
        EXPECT_GE(v, 0.0);
      }
      EXPECT_EQ(r.cls.has_value(), classes > 0);
      EXPECT_EQ(r.step, s + 1);
    }
  }
}

TEST(Training, AblationsSkipTheirParts) {
  auto c = tiny();
  c.low_branch = false;
  c.encoder = false;
  c.deterministic_r = 2;
  Trainer<float> tr(c);
  const auto data = testkit::random_dataset(c.net, 2, 4);
  const auto h = tr.store().hash("e_");
  const auto r0 = tr.step(data);
  const auto r1 = tr.step(data);
  const auto r2 = tr.step(data);
  EXPECT_EQ(tr.store().hash("e_"), h);
  EXPECT_EQ(r0.d_low, 0.0);
  EXPECT_EQ(r0.rec_h, 0.0);
  EXPECT_NE(r0.window.start, r1.window.start);
  EXPECT_EQ(r0.window.start, r2.window.start);
}

TEST(Training, SameSeedReproducesTrajectoryBitwise) {
  auto run = [] {
    Trainer<float> tr(tiny(3));
    const auto data = testkit::random_dataset(tr.config().net, 4, 6);
    std::vector<double> trace;
    for (int s = 0; s < 3; ++s) {
      const auto r = tr.step(data);
      for (double v : {r.d_low, r.d_high, r.g_low, r.g_high, r.rec_h, r.rec_g, *r.cls}) trace.push_back(v);
    }
    trace.push_back(static_cast<double>(tr.store().hash()));
    return trace;
  };
  const auto a = run();
  std::vector<char*> noise;
  for (int i = 0; i < 200; ++i) noise.push_back(new char[static_cast<std::size_t>(i * 53 % 997 + 1)]);
  const auto b = run();
  for (auto* p : noise) delete[] p;
  EXPECT_EQ(a, b);
}

TEST(Training, ReconstructionDropsOnPhantoms) {
  TrainConfig c;  // desk defaults
  c.seed = 3;
  const auto set = make_phantom_set(24, 500, 64, 1.0);
  Dataset data;
  for (const auto& p : set.train) data.volumes.push_back(p.volume);
  Trainer<float> tr(c);
  const auto first = tr.step(data);
  double last_h = 0, last_g = 0;
  const int tail = 20;
  for (int s = 2; s <= 200; ++s) {
    const auto r = tr.step(data);
    for (double v : {r.d_low, r.d_high, r.g_low, r.g_high, r.rec_h, r.rec_g}) ASSERT_TRUE(std::isfinite(v));
    if (s > 200 - tail) {
      last_h += r.rec_h / tail;
      last_g += r.rec_g / tail;
    }
  }
  EXPECT_LT(last_h, 0.7 * first.rec_h);
  EXPECT_LT(last_g, 0.7 * first.rec_g);
}

TEST(Training, NonFiniteInputReportsStepAndPhase) {
  Trainer<float> tr(tiny());
  auto data = testkit::random_dataset(tr.config().net, 2, 7);
  for (auto& v : data.volumes) v.data[100] = std::nanf("");
  try {
    tr.step(data);
    FAIL() << "expected NumericError";
  } catch (const NumericError& e) {
    const std::string what = e.what();
    EXPECT_NE(what.find("step 0"), std::string::npos) << what;
    EXPECT_NE(what.find("phase"), std::string::npos) << what;
  }
}

TEST(Checkpoint, RoundTripThenStepIsBitwiseIdentical) {
  const auto c = tiny(3);
  const auto data = testkit::random_dataset(c.net, 4, 8);
  Trainer<float> a(c);
  a.step(data);
  const auto path = temp_path("round_trip.hagc").string();
  save_checkpoint(path, a.store(), CheckpointMeta{"echo", a.rng().state(), a.step_count(), a.class_prior()});

  auto cb = c;
  cb.seed = 999;  // everything below must come from the file
  Trainer<float> b(cb);
  const auto meta = load_checkpoint(path, b.store());
  b.rng().set_state(meta.rng_state);
  b.set_step_count(meta.step);
  b.set_class_prior(meta.class_prior);
  EXPECT_EQ(meta.config, "echo");
  EXPECT_EQ(b.store().hash(), a.store().hash());

  const auto ra = a.step(data);
  const auto rb = b.step(data);
  EXPECT_EQ(ra.d_high, rb.d_high);
  EXPECT_EQ(ra.rec_g, rb.rec_g);
  EXPECT_EQ(ra.step, rb.step);
  EXPECT_EQ(a.store().hash(), b.store().hash());
  for (const auto& [name, e] : a.store().entries()) {
    if (!e.trainable) continue;
    const auto& f = b.store().entry(name);
    EXPECT_EQ(e.step, f.step);
    EXPECT_TRUE(std::equal(e.m.values().begin(), e.m.values().end(), f.m.values().begin())) << name;
  }
}

TEST(Checkpoint, CorruptionAndTruncationAreDetected) {
  Trainer<float> a(tiny());
  const auto path = temp_path("corrupt.hagc").string();
  save_checkpoint(path, a.store(), CheckpointMeta{"x", a.rng().state(), 0, {}});
  std::string bytes;
  {
    std::ifstream in(path, std::ios::binary);
    bytes.assign(std::istreambuf_iterator<char>(in), {});
  }
  auto write = [&](const std::string& b) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out.write(b.data(), static_cast<std::streamsize>(b.size()));
  };
  auto bad_magic = bytes;
  bad_magic[0] = 'X';
  write(bad_magic);
  EXPECT_THROW(load_checkpoint(path, a.store()), FormatError);
  auto flipped = bytes;
  flipped[bytes.size() / 2] ^= 0x10;
  write(flipped);
  EXPECT_THROW(load_checkpoint(path, a.store()), FormatError);
  write(bytes.substr(0, bytes.size() - 7));
  EXPECT_THROW(read_checkpoint_meta(path), FormatError);
  EXPECT_THROW(load_checkpoint(temp_path("missing.hagc").string(), a.store()), Error);
}

TEST(Checkpoint, CrossConfigLoadIsAShapeError) {
  Trainer<float> a(tiny());
  const auto path = temp_path("cross.hagc").string();
  save_checkpoint(path, a.store(), CheckpointMeta{});
  auto wider = tiny();
  wider.net.base_channels = 16;
  Trainer<float> b(wider);
  EXPECT_THROW(load_checkpoint(path, b.store()), ShapeError);
  Trainer<float> cond(tiny(3));
  EXPECT_THROW(load_checkpoint(path, cond.store()), ShapeError);
}

TEST(Checkpoint, DoubleStoreRoundTripsThroughFloat) {
  ParamStore<double> s;
  s.create("w", {3}).values()[1] = 0.1;
  const auto path = temp_path("double.hagc").string();
  save_checkpoint(path, s, CheckpointMeta{});
  ParamStore<double> t;
  t.create("w", {3});
  load_checkpoint(path, t);
  EXPECT_EQ(t.at("w").values()[1], static_cast<double>(0.1f));
}

TEST(Latent, SampleLatentAppendsOneHot) {
  Rng rng(1);
  const auto z = sample_latent<float>(rng, 2, 4, {1, 2}, 3);
  ASSERT_EQ(z.shape(), (Shape{2, 7}));
  EXPECT_EQ(z.values()[4], 0.0f);
  EXPECT_EQ(z.values()[5], 1.0f);
  EXPECT_EQ(z.values()[13], 1.0f);
}

TEST(Downsample, QuarterResolution) {
  auto x = Tensor<float>::full({1, 1, 16, 16, 16}, 0.5f);
  const auto y = downsample_low(x);
  EXPECT_EQ(y.shape(), (Shape{1, 1, 4, 4, 4}));
  for (float v : y.values()) EXPECT_FLOAT_EQ(v, 0.5f);
}

}  // namespace
}  // namespace hagan
