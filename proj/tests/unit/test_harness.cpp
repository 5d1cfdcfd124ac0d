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

#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>

#include <gtest/gtest.h>

#include "hagan/augment.hpp"
#include "hagan/errors.hpp"
#include "hagan/phantom.hpp"
#include "hagan/run_config.hpp"
#include "hagan/run_log.hpp"
#include "hagan/volume.hpp"
#include "json.hpp"

namespace hagan {
namespace {

namespace fs = std::filesystem;

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("hagan_harness_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::vector<std::string> lines_of(const fs::path& p) {
  std::ifstream f(p);
  std::vector<std::string> out;
  for (std::string l; std::getline(f, l);) out.push_back(l);
  return out;
}

TEST(RunConfig, EchoParseRoundTrip) {
  auto c = RunConfig::desk();
  c.set("steps", "123");
  c.set("subvol_multiplier", "0.25");
  c.set("sr.lambda", "3.5");
  c.set("saturating", "true");
  const auto back = RunConfig::parse(c.echo());
  EXPECT_EQ(back.echo(), c.echo());
  EXPECT_EQ(back.train.steps, 123);
  EXPECT_EQ(back.train.net.subvol_multiplier.num, 1);
  EXPECT_EQ(back.train.net.subvol_multiplier.den, 4);
  EXPECT_TRUE(back.train.saturating);
}

TEST(RunConfig, EveryKeyIsEchoed) {
  const auto echo = RunConfig::desk().echo();
  for (const auto& k : RunConfig::keys()) EXPECT_NE(echo.find(k + " = "), std::string::npos) << k;
}

TEST(RunConfig, DeskUsesStrongerSrReconstructionWeight) {
  EXPECT_EQ(RunConfig::desk().sr.lambda, 100.0);
  EXPECT_EQ(SRConfig{}.lambda, 1.0);
}

TEST(RunConfig, CommentsAndBlankLines) {
  const auto c = RunConfig::parse("# header\n\n  steps = 7   # trailing\nseed=3\n");
  EXPECT_EQ(c.train.steps, 7);
  EXPECT_EQ(c.train.seed, 3u);
}

TEST(RunConfig, RejectsBadInput) {
  EXPECT_THROW(RunConfig::parse("nonsense = 1"), ConfigError);
  EXPECT_THROW(RunConfig::parse("steps = many"), ConfigError);
  EXPECT_THROW(RunConfig::parse("steps 5"), ConfigError);
  EXPECT_THROW(RunConfig::parse("lr_g = nan"), ConfigError);
  EXPECT_THROW(RunConfig::parse("encoder = maybe"), ConfigError);
  EXPECT_THROW(RunConfig::load("/nonexistent/hagan.cfg"), ConfigError);
  auto c = RunConfig::desk();
  c.phantoms = 1;
  EXPECT_THROW(c.validate(), ConfigError);
  EXPECT_THROW((void)c.get("missing"), ConfigError);
}

TEST(ParseRatio, FractionsAndDecimals) {
  const auto a = parse_ratio("2/16");
  EXPECT_EQ(a.num, 1);
  EXPECT_EQ(a.den, 8);
  const auto b = parse_ratio("0.125");
  EXPECT_EQ(b.num, 1);
  EXPECT_EQ(b.den, 8);
  const auto c = parse_ratio(" 1 ");
  EXPECT_EQ(c.num, 1);
  EXPECT_EQ(c.den, 1);
  EXPECT_THROW(parse_ratio("0"), ConfigError);
  EXPECT_THROW(parse_ratio("-1/2"), ConfigError);
  EXPECT_THROW(parse_ratio("0.1234567891"), ConfigError);
  EXPECT_THROW(parse_ratio("a/b"), ConfigError);
}

TEST(VolumeIo, RoundTripIsExact) {
  auto v = Volume::filled(3, 4, 5);
  for (std::size_t i = 0; i < v.data.size(); ++i) v.data[i] = static_cast<float>(i) / 60.0f - 0.5f;
  const auto dir = scratch("io");
  write_volume((dir / "a.hagv").string(), v);
  const auto back = read_volume((dir / "a.hagv").string());
  EXPECT_TRUE(back.same_extents(v));
  EXPECT_EQ(back.data, v.data);
  EXPECT_EQ(list_volumes(dir.string()), std::vector<std::string>{(dir / "a.hagv").string()});
}

TEST(VolumeIo, CorruptionIsDetected) {
  auto bytes = encode_volume(Volume::filled(2, 2, 2, 0.25f));
  auto flipped = bytes;
  flipped[25] ^= 0x10;
  EXPECT_THROW(decode_volume(flipped), FormatError);
  auto truncated = bytes;
  truncated.resize(10);
  EXPECT_THROW(decode_volume(truncated), FormatError);
  auto magic = bytes;
  magic[0] = 'X';
  EXPECT_THROW(decode_volume(magic), FormatError);
  EXPECT_THROW(read_volume("/nonexistent.hagv"), Error);
}

TEST(Phantom, DeterministicPerSeed) {
  const auto a = phantom_generate(11, 2, 32, true), b = phantom_generate(11, 2, 32, true);
  EXPECT_EQ(a.volume.data, b.volume.data);
  EXPECT_EQ(a.organ_voxels, b.organ_voxels);
  EXPECT_NE(phantom_generate(12, 2, 32).volume.data, a.volume.data);
  EXPECT_EQ(phantom_label(11), phantom_label(11));
}

TEST(Phantom, MasksAndRanges) {
  const auto p = phantom_generate(5, 4, 32, true);
  for (float v : p.volume.data) {
    EXPECT_GE(v, -1.0f);
    EXPECT_LE(v, 1.0f);
  }
  EXPECT_EQ(std::accumulate(p.organ_mask.begin(), p.organ_mask.end(), std::int64_t{0}), p.organ_voxels);
  EXPECT_EQ(std::accumulate(p.lesion_mask.begin(), p.lesion_mask.end(), std::int64_t{0}), p.lesion_voxels);
  EXPECT_GE(p.organ_factor, 0.55);
  EXPECT_LE(p.organ_factor, 1.0);
  EXPECT_GT(p.body_voxels, p.organ_voxels);
  EXPECT_TRUE(phantom_generate(5, 4, 32).organ_mask.empty());
}

TEST(Phantom, LesionBurdenGrowsWithClass) {
  double low = 0, high = 0;
  for (std::uint64_t s = 0; s < 100; ++s) {
    low += phantom_generate(100 + s, 0, 32).lesion_fraction();
    high += phantom_generate(100 + s, 4, 32).lesion_fraction();
  }
  EXPECT_GT(high, low);
}

TEST(Phantom, SetSplitAndErrors) {
  const auto set = make_phantom_set(10, 50, 16);
  EXPECT_EQ(set.train.size(), 8u);
  EXPECT_EQ(set.test.size(), 2u);
  EXPECT_EQ(set.test[0].seed, 58u);
  EXPECT_THROW(make_phantom_set(1, 0, 16), ConfigError);
  EXPECT_THROW(phantom_generate(0, 0, 8), ConfigError);
  EXPECT_THROW(phantom_generate(0, kPhantomClasses, 16), ConfigError);
}

TEST(RunLog, HeaderThenStepRecords) {
  const auto dir = scratch("log");
  const auto path = dir / "run.jsonl";
  {
    RunLog log(path.string(), "train", "steps = 2\n");
    StepReport r;
    r.step = 1;
    r.d_low = 0.5;
    log.append(r);
    log.append("eval", {{"mmd", 0.25}});
  }
  const auto lines = lines_of(path);
  ASSERT_EQ(lines.size(), 3u);
  const auto h = nlohmann::json::parse(lines[0]);
  EXPECT_EQ(h["kind"], "train");
  EXPECT_EQ(h["config"], "steps = 2\n");
  EXPECT_EQ(h["build"], build_fingerprint());
  const auto s = nlohmann::json::parse(lines[1]);
  EXPECT_EQ(s["step"], 1);
  EXPECT_EQ(s["d_low"], 0.5);
  EXPECT_FALSE(s.contains("class"));
  EXPECT_EQ(nlohmann::json::parse(lines[2])["mmd"], 0.25);
}

TEST(RunLog, StepRecordIsBitwiseStable) {
  StepReport r;
  r.step = 3;
  r.g_high = 1.0 / 3.0;
  r.cls = 0.1;
  EXPECT_EQ(step_record(r), step_record(r));
  EXPECT_NE(step_record(r).find("\"class\""), std::string::npos);
}

TEST(Manifest, ListsFilesAndConfig) {
  const auto dir = scratch("manifest");
  write_manifest(dir.string(), "generate", "seed = 1\n", {"a.hagv", "b.hagv"});
  std::ifstream f(dir / "manifest.json");
  const auto m = nlohmann::json::parse(f);
  EXPECT_EQ(m["kind"], "generate");
  EXPECT_EQ(m["files"].size(), 2u);
  EXPECT_EQ(m["config"], "seed = 1\n");
}

TEST(OutputDir, EnvironmentOverride) {
  ::unsetenv("HAGAN_OUT_DIR");
  EXPECT_EQ(output_dir("x"), "x");
  ::setenv("HAGAN_OUT_DIR", "/tmp/hagan_y", 1);
  EXPECT_EQ(output_dir("x"), "/tmp/hagan_y");
  ::unsetenv("HAGAN_OUT_DIR");
}

TEST(Augment, ProportionalCountsLargestRemainder) {
  EXPECT_EQ(proportional_counts({10, 10, 0}, 5), (std::vector<int>{3, 2, 0}));
  const std::vector<int> real{37, 21, 9, 3};
  const auto c = proportional_counts(real, 17);
  EXPECT_EQ(std::accumulate(c.begin(), c.end(), 0), 17);
  for (std::size_t i = 0; i < real.size(); ++i) EXPECT_LE(std::abs(c[i] - 17.0 * real[i] / 70.0), 1.0);
  EXPECT_THROW(proportional_counts({0, 0}, 3), ConfigError);
}

TEST(Augment, ResampleConstantAndErrors) {
  const auto v = resample(Volume::filled(32, 32, 32, 0.3f), 16);
  EXPECT_EQ(v.d, 16);
  for (float x : v.data) EXPECT_NEAR(x, 0.3f, 1e-6);
  EXPECT_THROW(resample(Volume::filled(8, 8, 4), 4), ShapeError);
}

TEST(Augment, StudyReportsBothRowsWithClassMatchedSynthetics) {
  std::vector<Volume> train, test;
  std::vector<int> tl, sl;
  for (int i = 0; i < 12; ++i) {
    const int label = i % 2 == 0 ? 0 : 4;
    train.push_back(phantom_generate(200 + i, label, 32).volume);
    tl.push_back(label);
  }
  for (int i = 0; i < 4; ++i) {
    const int label = i % 2 == 0 ? 0 : 4;
    test.push_back(phantom_generate(300 + i, label, 32).volume);
    sl.push_back(label);
  }
  std::vector<int> requested(kPhantomClasses, 0);
  ClassSampler sampler = [&](int label, int count) {
    requested[static_cast<std::size_t>(label)] += count;
    std::vector<Volume> out;
    for (int i = 0; i < count; ++i) out.push_back(phantom_generate(900 + i, label, 32).volume);
    return out;
  };
  AugmentConfig cfg;
  cfg.steps = 5;
  cfg.batch = 4;
  const auto r = augment_study(cfg, train, tl, test, sl, kPhantomClasses, sampler);
  ASSERT_EQ(r.rows.size(), 2u);
  EXPECT_EQ(r.rows[0].train_size, 12);
  EXPECT_GT(r.rows[1].train_size, 12);
  EXPECT_EQ(requested[1] + requested[2] + requested[3], 0);
  EXPECT_GT(requested[0] + requested[4], 0);
  EXPECT_LE(std::abs(requested[0] - requested[4]), 1);
  for (const auto& row : r.rows) {
    EXPECT_GE(row.accuracy, 0.0);
    EXPECT_LE(row.accuracy, 1.0);
  }
}

}  // namespace
}  // namespace hagan

namespace hagan {
namespace {

TEST(Augment, BaselineClassifierSeparatesPhantomClasses) {
  std::vector<Volume> train, test;
  std::vector<int> tl, sl;
  // Lesion burden is a small voxel fraction; with fewer than ~200 volumes the
  // classifier memorises the training set instead.
  for (int i = 0; i < 250; ++i) {
    train.push_back(phantom_generate(400 + i, i % kPhantomClasses, 32).volume);
    tl.push_back(i % kPhantomClasses);
  }
  for (int i = 0; i < 25; ++i) {
    test.push_back(phantom_generate(600 + i, i % kPhantomClasses, 32).volume);
    sl.push_back(i % kPhantomClasses);
  }
  Classifier c(32, kPhantomClasses, 1);
  c.train(train, tl, 700, 8, 1e-3);
  EXPECT_GT(c.accuracy(test, sl), 0.6);  // chance is 0.2
}

}  // namespace
}  // namespace hagan
