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

#include "hagan/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "hagan/checkpoint.hpp"
#include "hagan/errors.hpp"
#include "hagan/extractor.hpp"
#include "hagan/inference.hpp"
#include "hagan/latent.hpp"
#include "hagan/metrics.hpp"
#include "hagan/run_log.hpp"

namespace hagan {
namespace {

bool finite_report(const StepReport& r) {
  for (double v : {r.d_low, r.d_high, r.g_low, r.g_high, r.rec_h, r.rec_g}) {
    if (!std::isfinite(v)) return false;
  }
  return !r.cls || std::isfinite(*r.cls);
}

Eigen::MatrixXd latents(Trainer<float>& model, const std::vector<Phantom>& ps, Eigen::VectorXd& organ) {
  const auto dim = model.config().net.latent_dim;
  Eigen::MatrixXd z(static_cast<Eigen::Index>(ps.size()), dim);
  organ.resize(static_cast<Eigen::Index>(ps.size()));
  for (std::size_t i = 0; i < ps.size(); ++i) {
    const auto e = encode_full(model, to_batch<float>(ps[i].volume));
    const auto v = e.values();
    for (std::int64_t j = 0; j < dim; ++j) z(static_cast<Eigen::Index>(i), j) = v[static_cast<std::size_t>(j)];
    organ(static_cast<Eigen::Index>(i)) = static_cast<double>(ps[i].organ_voxels);
  }
  return z;
}

std::vector<int> labels_of(const std::vector<Phantom>& ps) {
  std::vector<int> out;
  for (const auto& p : ps) out.push_back(p.label);
  return out;
}

void write_snapshot(const std::string& dir, const RunConfig& cfg, Trainer<float>& model, const StepReport& last,
                    const std::string& what) {
  const auto base = std::filesystem::path(dir);
  save_checkpoint((base / "snapshot.ckpt").string(), model.store(),
                  CheckpointMeta{cfg.echo(), model.rng().state(), model.step_count(), model.class_prior()});
  RunLog snap((base / "snapshot.jsonl").string(), "numeric-error", cfg.echo());
  snap.append("error", {{"step", static_cast<double>(model.step_count() + 1)}});
  snap.append(last);
  std::ofstream((base / "snapshot.txt").string()) << what << '\n';
}

void say(const Progress& progress, const std::string& msg) {
  if (progress) progress(msg);
}

}  // namespace

std::vector<Volume> sample_volumes(Trainer<float>& model, int n, std::uint64_t seed, const std::vector<int>& labels) {
  const auto& net = model.config().net;
  Rng rng(seed);
  std::vector<Volume> out;
  for (int i = 0; i < n; i += 4) {
    const int b = std::min(4, n - i);
    std::vector<int> lb;
    if (net.conditional()) {
      for (int k = 0; k < b; ++k) lb.push_back(labels.empty() ? 0 : labels[static_cast<std::size_t>(i + k) % labels.size()]);
    }
    const auto z = sample_latent<float>(rng, b, net.latent_dim, lb, static_cast<int>(net.num_classes));
    const auto x = generate_full(model, z);
    for (int k = 0; k < b; ++k) out.push_back(from_batch(x, k));
  }
  return out;
}

GanRunResult run_gan_experiment(const RunConfig& cfg, const std::string& dir, const Progress& progress) {
  cfg.validate();
  std::filesystem::create_directories(dir);
  const auto& net = cfg.train.net;
  const auto set = make_phantom_set(cfg.phantoms, cfg.phantom_seed, net.full_resolution);
  Dataset data;
  for (const auto& p : set.train) {
    data.volumes.push_back(p.volume);
    if (net.conditional()) data.labels.push_back(p.label);
  }
  std::vector<Volume> test;
  for (const auto& p : set.test) test.push_back(p.volume);
  const auto test_labels = labels_of(set.test);

  Trainer<float> model(cfg.train);
  if (net.conditional()) model.set_class_prior(data.class_frequencies(static_cast<int>(net.num_classes)));

  GanRunResult res;
  const FeatureExtractor fx(kExtractorSeed, net.full_resolution);
  const auto real = fx.extract(test);
  const int n_gen = static_cast<int>(test.size());
  const std::uint64_t sample_seed = cfg.train.seed * 7919 + 1;
  const auto f0 = fx.extract(sample_volumes(model, n_gen, sample_seed, test_labels));
  Eigen::MatrixXd pooled(real.features.rows() + f0.features.rows(), real.features.cols());
  pooled << real.features, f0.features;
  MmdOptions mmd;
  mmd.bandwidth = median_distance(pooled);
  res.bandwidth = mmd.bandwidth;
  res.mmd_start = mmd_rbf(f0, real, mmd);
  res.fid_start = frechet_distance(f0, real);
  say(progress, "step 0 mmd " + std::to_string(res.mmd_start) + " frechet " + std::to_string(res.fid_start));

  res.log_path = (std::filesystem::path(dir) / "run.jsonl").string();
  RunLog log(res.log_path, "train", cfg.echo());
  StepReport last;
  for (std::int64_t s = 1; s <= cfg.train.steps; ++s) {
    StepReport r;
    try {
      r = model.step(data);
    } catch (const NumericError& e) {
      write_snapshot(dir, cfg, model, last, e.what());
      throw;
    }
    last = r;
    log.append(r);
    if (!finite_report(r)) res.finite = false;
    if (s % cfg.log_every == 0 || s == cfg.train.steps) {
      say(progress, "step " + std::to_string(s) + " d_high " + std::to_string(r.d_high) + " g_high " +
                        std::to_string(r.g_high) + " rec_h " + std::to_string(r.rec_h));
    }
  }
  res.steps = model.step_count();

  const auto f1 = fx.extract(sample_volumes(model, n_gen, sample_seed, test_labels));
  res.mmd_end = mmd_rbf(f1, real, mmd);
  res.fid_end = frechet_distance(f1, real);

  double l1 = 0;
  for (std::size_t i = 0; i < test.size(); ++i) {
    std::vector<int> lb;
    if (net.conditional()) lb.push_back(test_labels[i]);
    const auto rec = from_batch(reconstruct(model, to_batch<float>(test[i]), lb));
    double s = 0;
    for (std::size_t k = 0; k < rec.data.size(); ++k) s += std::abs(rec.data[k] - test[i].data[k]);
    l1 += s / static_cast<double>(rec.data.size());
  }
  res.recon_l1 = l1 / static_cast<double>(test.size());

  Eigen::VectorXd y_train, y_test;
  const auto z_train = latents(model, set.train, y_train);
  const auto z_test = latents(model, set.test, y_test);
  const auto ridge = ridge_fit(z_train, y_train, 1e-4);
  res.r2_train = r_squared(y_train, ridge.predict(z_train));
  res.r2_test = r_squared(y_test, ridge.predict(z_test));

  // Walk from the mean training latent along the fitted direction, decode,
  // re-encode and read the organ count back off the ridge predictor.
  const auto dir_fit = fit_direction(z_train, y_train, "organ_voxels", 1e-4);
  const Eigen::VectorXd centre = z_train.colwise().mean().transpose();
  const Eigen::VectorXd proj = z_train * dir_fit.w;
  const double spread = std::sqrt((proj.array() - proj.mean()).square().mean());
  for (double t : {-2.0, -1.0, 0.0, 1.0, 2.0}) {
    const Eigen::VectorXd z = dir_fit.move(centre, t * spread);
    auto zt = Tensor<float>::zeros({1, net.latent_dim + net.num_classes}, MemTag::kData);
    for (std::int64_t j = 0; j < net.latent_dim; ++j) zt.values()[static_cast<std::size_t>(j)] = static_cast<float>(z(j));
    if (net.conditional()) zt.values()[static_cast<std::size_t>(net.latent_dim)] = 1.0f;
    const auto e = encode_full(model, generate_full(model, zt));
    Eigen::MatrixXd row(1, net.latent_dim);
    for (std::int64_t j = 0; j < net.latent_dim; ++j) row(0, j) = e.values()[static_cast<std::size_t>(j)];
    res.traversal_t.push_back(t * spread);
    res.traversal_pred.push_back(ridge.predict(row)(0));
  }

  res.checkpoint_path = (std::filesystem::path(dir) / "model.ckpt").string();
  save_checkpoint(res.checkpoint_path, model.store(),
                  CheckpointMeta{cfg.echo(), model.rng().state(), model.step_count(), model.class_prior()});
  log.append("eval", {{"mmd_start", res.mmd_start},
                      {"mmd_end", res.mmd_end},
                      {"bandwidth", res.bandwidth},
                      {"frechet_start", res.fid_start},
                      {"frechet_end", res.fid_end},
                      {"recon_l1", res.recon_l1},
                      {"r2_train", res.r2_train},
                      {"r2_test", res.r2_test}});
  write_manifest(dir, "train", cfg.echo(), {"run.jsonl", "model.ckpt"});
  return res;
}

RunConfig checkpoint_config(const std::string& path) { return RunConfig::parse(read_checkpoint_meta(path).config); }

std::unique_ptr<Trainer<float>> load_trainer(const std::string& path) {
  const auto cfg = checkpoint_config(path);
  auto model = std::make_unique<Trainer<float>>(cfg.train);
  const auto meta = load_checkpoint(path, model->store());
  model->set_step_count(meta.step);
  model->rng().set_state(meta.rng_state);
  model->set_class_prior(meta.class_prior);
  return model;
}

std::unique_ptr<SRTrainer<float>> load_sr_trainer(const std::string& path) {
  const auto cfg = checkpoint_config(path);
  auto model = std::make_unique<SRTrainer<float>>(cfg.sr, cfg.train.seed + 4, cfg.sr_batch);
  const auto meta = load_checkpoint(path, model->store());
  model->set_step_count(meta.step);
  model->rng().set_state(meta.rng_state);
  return model;
}

SrRunResult run_sr_experiment(const RunConfig& cfg, const std::string& dir, const Progress& progress) {
  cfg.validate();
  std::filesystem::create_directories(dir);
  const auto set = make_phantom_set(cfg.sr_phantoms, cfg.sr_phantom_seed, cfg.sr.hr_resolution);
  std::vector<Volume> train, test;
  for (const auto& p : set.train) train.push_back(p.volume);
  for (const auto& p : set.test) test.push_back(p.volume);
  const auto seed = cfg.train.seed;
  const auto train_pairs = make_pairs(train, cfg.sr.noise_sigma, 2 * seed + 1);
  const auto test_pairs = make_pairs(test, cfg.sr.noise_sigma, 2 * seed + 2);

  SRTrainer<float> model(cfg.sr, seed + 4, cfg.sr_batch);
  SrRunResult res;
  res.start = sr_evaluate(model, test_pairs);
  res.log_path = (std::filesystem::path(dir) / "sr_run.jsonl").string();
  RunLog log(res.log_path, "sr-train", cfg.echo());
  for (std::int64_t s = 1; s <= cfg.sr_steps; ++s) {
    const auto r = model.step(train_pairs);
    log.append("step", {{"step", static_cast<double>(r.step)},
                        {"d", r.d_loss},
                        {"g_adv", r.g_adv},
                        {"g_l1", r.g_l1},
                        {"r", static_cast<double>(r.window.start)}});
    if (!std::isfinite(r.d_loss) || !std::isfinite(r.g_adv) || !std::isfinite(r.g_l1)) res.finite = false;
    if (s % cfg.log_every == 0 || s == cfg.sr_steps) {
      say(progress, "sr step " + std::to_string(s) + " d " + std::to_string(r.d_loss) + " l1 " + std::to_string(r.g_l1));
    }
  }
  res.end = sr_evaluate(model, test_pairs);
  log.append("eval", {{"ssim_sr", res.end.ssim_sr},
                      {"ssim_base", res.end.ssim_base},
                      {"psnr_sr", res.end.psnr_sr},
                      {"psnr_base", res.end.psnr_base},
                      {"nmse_sr", res.end.nmse_sr},
                      {"nmse_base", res.end.nmse_base}});
  res.checkpoint_path = (std::filesystem::path(dir) / "sr_model.ckpt").string();
  save_checkpoint(res.checkpoint_path, model.store(),
                  CheckpointMeta{cfg.echo(), model.rng().state(), model.step_count(), {}});
  write_manifest(dir, "sr-train", cfg.echo(), {"sr_run.jsonl", "sr_model.ckpt"});
  return res;
}

}  // namespace hagan
