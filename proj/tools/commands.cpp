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

#include "commands.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "hagan/augment.hpp"
#include "hagan/errors.hpp"
#include "hagan/experiment.hpp"
#include "hagan/extractor.hpp"
#include "hagan/inference.hpp"
#include "hagan/latent.hpp"
#include "hagan/memory_model.hpp"
#include "hagan/metrics.hpp"
#include "hagan/phantom.hpp"
#include "hagan/run_log.hpp"
#include "json.hpp"

namespace hagan::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

void apply_overrides(RunConfig& cfg, const std::vector<std::string>& args) {
  for (std::size_t i = 0; i < args.size(); ++i) {
    const auto& a = args[i];
    if (a.rfind("--", 0) != 0) throw UsageError("unexpected argument '" + a + "'");
    std::string key = a.substr(2), value;
    if (const auto eq = key.find('='); eq != std::string::npos) {
      value = key.substr(eq + 1);
      key.resize(eq);
    } else {
      if (i + 1 >= args.size()) throw UsageError("flag --" + key + " needs a value");
      value = args[++i];
    }
    const auto keys = RunConfig::keys();
    if (std::find(keys.begin(), keys.end(), key) == keys.end()) throw UsageError("unknown flag --" + key);
    cfg.set(key, value);
  }
}

RunConfig resolve(const Common& c, bool needs_seed, RunConfig base) {
  if (!c.config_path.empty()) base = RunConfig::load(c.config_path);
  apply_overrides(base, c.overrides);
  if (c.seed) base.train.seed = *c.seed;
  if (needs_seed && !c.seed) throw UsageError("--seed is required for this command");
  base.out_dir = c.out.empty() ? output_dir(base.out_dir == "." ? "out" : base.out_dir) : c.out;
  base.validate();
  fs::create_directories(base.out_dir);
  return base;
}

// Checkpoint-based commands start from the configuration stored in the file.
RunConfig resolve_from(const Common& c, bool needs_seed, const std::string& checkpoint) {
  if (!fs::exists(checkpoint)) throw UsageError("checkpoint not found: " + checkpoint);
  auto base = checkpoint_config(checkpoint);
  base.out_dir = ".";
  Common without_file = c;
  without_file.config_path.clear();
  return resolve(without_file, needs_seed, base);
}

std::vector<Volume> read_dir(const std::string& dir, std::vector<std::string>* names = nullptr) {
  if (!fs::is_directory(dir)) throw UsageError("not a directory: " + dir);
  std::vector<Volume> out;
  for (const auto& p : list_volumes(dir)) {
    out.push_back(read_volume(p));
    if (names) names->push_back(fs::path(p).filename().string());
  }
  if (out.empty()) throw UsageError("no .hagv volumes in " + dir);
  return out;
}

std::string numbered(const std::string& prefix, int i) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s_%04d.hagv", prefix.c_str(), i);
  return buf;
}

std::vector<std::string> write_all(const std::string& dir, const std::string& prefix, const std::vector<Volume>& vols) {
  std::vector<std::string> files;
  for (std::size_t i = 0; i < vols.size(); ++i) {
    files.push_back(numbered(prefix, static_cast<int>(i)));
    write_volume((fs::path(dir) / files.back()).string(), vols[i]);
  }
  return files;
}

void write_json(const std::string& dir, const std::string& name, const json& j) {
  std::ofstream f(fs::path(dir) / name);
  if (!f) throw Error("cannot write " + name);
  f << j.dump(2) << '\n';
}

Eigen::MatrixXd latent_rows(Trainer<float>& model, const std::vector<Volume>& vols) {
  const auto dim = model.config().net.latent_dim;
  Eigen::MatrixXd z(static_cast<Eigen::Index>(vols.size()), dim);
  for (std::size_t i = 0; i < vols.size(); ++i) {
    const auto e = encode_full(model, to_batch<float>(vols[i]));
    for (std::int64_t j = 0; j < dim; ++j) z(static_cast<Eigen::Index>(i), j) = e.values()[static_cast<std::size_t>(j)];
  }
  return z;
}

Tensor<float> latent_tensor(const Eigen::VectorXd& z, const NetConfig& net, int label) {
  auto t = Tensor<float>::zeros({1, net.latent_dim + net.num_classes}, MemTag::kData);
  for (std::int64_t j = 0; j < net.latent_dim; ++j) t.values()[static_cast<std::size_t>(j)] = static_cast<float>(z(j));
  if (net.conditional()) t.values()[static_cast<std::size_t>(net.latent_dim + label)] = 1.0f;
  return t;
}

// labels.csv as written by `phantoms`: file,label,...
std::map<std::string, int> read_labels(const std::string& dir) {
  std::ifstream f(fs::path(dir) / "labels.csv");
  if (!f) throw UsageError("a conditional model needs labels.csv next to the volumes in " + dir);
  std::map<std::string, int> out;
  std::string line;
  std::getline(f, line);
  while (std::getline(f, line)) {
    std::stringstream ss(line);
    std::string file, label;
    std::getline(ss, file, ',');
    std::getline(ss, label, ',');
    out[file] = std::stoi(label);
  }
  return out;
}

void progress(const std::string& msg) { std::fprintf(stderr, "%s\n", msg.c_str()); }

}  // namespace

RunConfig resolve_config(const Common& c, bool needs_seed) { return resolve(c, needs_seed, RunConfig::desk()); }

int run_train(const TrainArgs& a) {
  const auto cfg = resolve_config(a.common, true);
  const auto r = run_gan_experiment(cfg, cfg.out_dir, progress);
  std::printf("steps            %lld\n", static_cast<long long>(r.steps));
  std::printf("losses finite    %s\n", r.finite ? "yes" : "no");
  std::printf("MMD^2 (h=%.4g)   %.6g -> %.6g\n", r.bandwidth, r.mmd_start, r.mmd_end);
  std::printf("Frechet          %.6g -> %.6g\n", r.fid_start, r.fid_end);
  std::printf("held-out l1      %.4f\n", r.recon_l1);
  std::printf("organ R^2        train %.4f  held-out %.4f\n", r.r2_train, r.r2_test);
  std::printf("checkpoint       %s\n", r.checkpoint_path.c_str());
  return r.finite ? 0 : 2;
}

int run_generate(const GenerateArgs& a) {
  const auto cfg = resolve_from(a.common, true, a.checkpoint);
  auto model = load_trainer(a.checkpoint);
  const auto& net = model->config().net;
  std::vector<int> labels;
  if (net.conditional()) {
    if (a.label >= net.num_classes) throw UsageError("--class must be below " + std::to_string(net.num_classes));
    for (int k = 0; k < (a.label >= 0 ? 1 : static_cast<int>(net.num_classes)); ++k) labels.push_back(a.label >= 0 ? a.label : k);
  } else if (a.label >= 0) {
    throw UsageError("--class given for an unconditional model");
  }
  const auto vols = sample_volumes(*model, a.n, cfg.train.seed, labels);
  auto files = write_all(cfg.out_dir, "sample", vols);
  write_manifest(cfg.out_dir, "generate", cfg.echo(), files);
  std::printf("wrote %zu volumes to %s\n", files.size(), cfg.out_dir.c_str());
  return 0;
}

int run_encode(const EncodeArgs& a) {
  const auto cfg = resolve_from(a.common, false, a.checkpoint);
  auto model = load_trainer(a.checkpoint);
  std::vector<std::string> names;
  const auto vols = read_dir(a.in, &names);
  const auto z = latent_rows(*model, vols);
  std::ofstream f(fs::path(cfg.out_dir) / "latents.csv");
  for (std::size_t i = 0; i < names.size(); ++i) {
    f << names[i];
    for (Eigen::Index j = 0; j < z.cols(); ++j) f << ',' << z(static_cast<Eigen::Index>(i), j);
    f << '\n';
  }
  write_manifest(cfg.out_dir, "encode", cfg.echo(), {"latents.csv"});
  std::printf("encoded %zu volumes to %s/latents.csv\n", names.size(), cfg.out_dir.c_str());
  return 0;
}

int run_reconstruct(const ReconstructArgs& a) {
  const auto cfg = resolve_from(a.common, false, a.checkpoint);
  auto model = load_trainer(a.checkpoint);
  std::vector<std::string> names;
  const auto vols = read_dir(a.in, &names);
  std::map<std::string, int> labels;
  if (model->config().net.conditional()) labels = read_labels(a.in);
  std::vector<Volume> out;
  double l1 = 0;
  for (std::size_t i = 0; i < vols.size(); ++i) {
    std::vector<int> lb;
    if (!labels.empty()) lb.push_back(labels.at(names[i]));
    out.push_back(from_batch(reconstruct(*model, to_batch<float>(vols[i]), lb)));
    double s = 0;
    for (std::size_t k = 0; k < out.back().data.size(); ++k) s += std::abs(out.back().data[k] - vols[i].data[k]);
    l1 += s / static_cast<double>(out.back().data.size());
  }
  auto files = write_all(cfg.out_dir, "recon", out);
  write_manifest(cfg.out_dir, "reconstruct", cfg.echo(), files);
  std::printf("mean l1 %.4f over %zu volumes\n", l1 / static_cast<double>(vols.size()), vols.size());
  return 0;
}

int run_interpolate(const InterpolateArgs& a) {
  const auto cfg = resolve_from(a.common, true, a.checkpoint);
  auto model = load_trainer(a.checkpoint);
  const auto& net = model->config().net;
  Rng rng(cfg.train.seed);
  std::vector<int> lb;
  if (net.conditional()) lb.push_back(0);
  const auto za = sample_latent<float>(rng, 1, net.latent_dim, lb, static_cast<int>(net.num_classes));
  const auto zb = sample_latent<float>(rng, 1, net.latent_dim, lb, static_cast<int>(net.num_classes));
  std::vector<Volume> vols;
  for (const auto& t : interpolate(*model, za, zb, a.steps)) vols.push_back(from_batch(t));
  auto files = write_all(cfg.out_dir, "interp", vols);
  write_manifest(cfg.out_dir, "interpolate", cfg.echo(), files);
  std::printf("wrote %zu volumes to %s\n", files.size(), cfg.out_dir.c_str());
  return 0;
}

int run_fit_direction(const FitDirectionArgs& a) {
  const auto cfg = resolve_from(a.common, false, a.checkpoint);
  auto model = load_trainer(a.checkpoint);
  const auto& net = model->config().net;
  std::vector<Volume> vols;
  Eigen::VectorXd y(a.count);
  for (int i = 0; i < a.count; ++i) {
    const auto seed = a.phantom_seed + static_cast<std::uint64_t>(i);
    auto p = phantom_generate(seed, phantom_label(seed), net.full_resolution);
    y(i) = static_cast<double>(a.target == "organ_voxels"    ? p.organ_voxels
                               : a.target == "lesion_voxels" ? p.lesion_voxels
                                                             : p.body_voxels);
    vols.push_back(std::move(p.volume));
  }
  const auto z = latent_rows(*model, vols);
  const auto dir = fit_direction(z, y, a.target, 1e-4);
  std::printf("%s: R^2 %.4f on %d phantoms\n", a.target.c_str(), dir.r2, a.count);

  json j;
  j["target"] = a.target;
  j["r2"] = dir.r2;
  j["bias"] = dir.bias;
  j["coef"] = std::vector<double>(dir.coef.data(), dir.coef.data() + dir.coef.size());
  j["direction"] = std::vector<double>(dir.w.data(), dir.w.data() + dir.w.size());
  std::vector<std::string> files{"direction.json"};
  if (a.traverse > 0) {
    const Eigen::VectorXd centre = z.colwise().mean().transpose();
    const Eigen::VectorXd proj = z * dir.w;
    const double spread = std::sqrt((proj.array() - proj.mean()).square().mean());
    std::vector<Volume> walk;
    json steps = json::array();
    for (int k = 0; k < a.traverse; ++k) {
      const double t = a.traverse == 1 ? 0.0 : spread * (-2.0 + 4.0 * k / (a.traverse - 1));
      const auto zt = dir.move(centre, t);
      const auto x = generate_full(*model, latent_tensor(zt, net, 0));
      const auto back = latent_rows(*model, {from_batch(x)});
      const double pred = dir.predict(back.row(0).transpose());
      std::printf("  t %+8.3f  predicted %s %.1f\n", t, a.target.c_str(), pred);
      steps.push_back({{"t", t}, {"predicted", pred}});
      walk.push_back(from_batch(x));
    }
    j["traversal"] = steps;
    for (const auto& f : write_all(cfg.out_dir, "walk", walk)) files.push_back(f);
  }
  write_json(cfg.out_dir, "direction.json", j);
  write_manifest(cfg.out_dir, "fit-direction", cfg.echo(), files);
  return 0;
}

int run_eval(const EvalArgs& a) {
  const auto cfg = resolve_config(a.common, false);
  const auto real = read_dir(a.real), fake = read_dir(a.fake);
  std::vector<std::string> metrics;
  std::stringstream ss(a.metrics);
  for (std::string m; std::getline(ss, m, ',');) {
    if (m != "fid" && m != "mmd" && m != "ssim" && m != "psnr" && m != "nmse") throw UsageError("unknown metric " + m);
    metrics.push_back(m);
  }
  json report;
  report["real"] = a.real;
  report["fake"] = a.fake;
  std::printf("metric        value\n");
  const bool distribution = std::count(metrics.begin(), metrics.end(), "fid") + std::count(metrics.begin(), metrics.end(), "mmd") > 0;
  if (distribution) {
    if (real.front().d != real.front().h || real.front().h != real.front().w) throw UsageError("fid/mmd need cubic volumes");
    const FeatureExtractor fx(kExtractorSeed, real.front().d);
    const auto fr = fx.extract(real), ff = fx.extract(fake);
    report["extractor"] = fx.fingerprint();
    for (const auto& m : metrics) {
      if (m == "fid") {
        report["fid"] = frechet_distance(fr, ff);
        std::printf("fid       %12.6g\n", report["fid"].get<double>());
      } else if (m == "mmd") {
        MmdOptions opt;
        opt.bandwidth = a.bandwidth;
        report["mmd"] = mmd_rbf(fr, ff, opt);
        std::printf("mmd       %12.6g\n", report["mmd"].get<double>());
      }
    }
  }
  for (const auto& m : metrics) {
    if (m != "ssim" && m != "psnr" && m != "nmse") continue;
    if (real.size() != fake.size()) throw UsageError(m + " pairs volumes by sorted name; the sets differ in size");
    double sum = 0;
    for (std::size_t i = 0; i < real.size(); ++i) {
      sum += m == "ssim" ? ssim(real[i], fake[i]) : m == "psnr" ? psnr(real[i], fake[i]) : nmse(real[i], fake[i]);
    }
    report[m] = sum / static_cast<double>(real.size());
    std::printf("%-9s %12.6g\n", m.c_str(), report[m].get<double>());
  }
  report["config"] = cfg.echo();
  report["build"] = build_fingerprint();
  write_json(cfg.out_dir, "metrics.json", report);
  return 0;
}

int run_memsim(const MemsimArgs& a) {
  auto cfg = resolve_config(a.common, false);
  auto& net = cfg.train.net;
  if (a.resolution > 0) {
    net.full_resolution = a.resolution;
    net.low_resolution = a.resolution / 4;
  }
  if (!a.multiplier.empty()) net.subvol_multiplier = parse_ratio(a.multiplier);
  cfg.validate();
  std::string text;
  for (MemoryMode mode : {MemoryMode::kTrainAmortized, MemoryMode::kTrainFull, MemoryMode::kInference}) {
    if (a.mode == "analytic" || a.mode == "both") {
      auto r = analytic_memory(cfg.train, mode);
      text += "# analytic " + std::string(mode_name(mode)) + "\n" + r.table() + "\n";
    }
    if (a.mode == "measured" || a.mode == "both") {
      auto r = measure_step(cfg.train, mode);
      text += "# measured " + std::string(mode_name(mode)) + "\n" + r.table() + "\n";
    }
  }
  if (!a.sweep.empty()) text += "# sweep\n" + sweep_table(resolution_sweep(cfg.train, a.sweep));
  std::fputs(text.c_str(), stdout);
  std::ofstream(fs::path(cfg.out_dir) / "memsim.txt") << text;
  write_manifest(cfg.out_dir, "memsim", cfg.echo(), {"memsim.txt"});
  return 0;
}

int run_sr_train(const SrTrainArgs& a) {
  const auto cfg = resolve_config(a.common, true);
  const auto r = run_sr_experiment(cfg, cfg.out_dir, progress);
  std::printf("%s", r.end.table().c_str());
  std::printf("checkpoint %s\n", r.checkpoint_path.c_str());
  return r.finite ? 0 : 2;
}

int run_sr_eval(const SrEvalArgs& a) {
  const auto cfg = resolve_from(a.common, true, a.checkpoint);
  auto model = load_sr_trainer(a.checkpoint);
  const auto hr = read_dir(a.in);
  const auto report = sr_evaluate(*model, make_pairs(hr, cfg.sr.noise_sigma, cfg.train.seed));
  const auto table = report.table();
  std::printf("%s", table.c_str());
  std::ofstream(fs::path(cfg.out_dir) / "sr_eval.txt") << table;
  write_manifest(cfg.out_dir, "sr-eval", cfg.echo(), {"sr_eval.txt"});
  return 0;
}

int run_phantoms(const PhantomsArgs& a) {
  const auto cfg = resolve_config(a.common, true);
  std::vector<std::string> files;
  std::ofstream labels(fs::path(cfg.out_dir) / "labels.csv");
  labels << "file,label,organ_voxels,lesion_voxels,body_voxels,organ_factor\n";
  auto write_mask = [&](const std::vector<std::uint8_t>& m, const Volume& like, const std::string& name) {
    auto v = Volume::filled(like.d, like.h, like.w, 0.0f);
    for (std::size_t i = 0; i < m.size(); ++i) v.data[i] = m[i];
    write_volume((fs::path(cfg.out_dir) / name).string(), v);
    files.push_back(name);
  };
  for (int i = 0; i < a.n; ++i) {
    const auto seed = cfg.train.seed + static_cast<std::uint64_t>(i);
    const auto p = phantom_generate(seed, phantom_label(seed), a.extent, a.masks);
    const auto name = numbered("phantom", i);
    write_volume((fs::path(cfg.out_dir) / name).string(), p.volume);
    files.push_back(name);
    labels << name << ',' << p.label << ',' << p.organ_voxels << ',' << p.lesion_voxels << ',' << p.body_voxels << ','
           << p.organ_factor << '\n';
    if (a.masks) {
      // Masks go in a subdirectory so the volume directory stays loadable.
      fs::create_directories(fs::path(cfg.out_dir) / "masks");
      write_mask(p.organ_mask, p.volume, "masks/" + numbered("organ", i));
      write_mask(p.lesion_mask, p.volume, "masks/" + numbered("lesion", i));
    }
  }
  files.push_back("labels.csv");
  write_manifest(cfg.out_dir, "phantoms", cfg.echo(), files);
  std::printf("wrote %d phantoms to %s\n", a.n, cfg.out_dir.c_str());
  return 0;
}

int run_augment(const AugmentArgs& a) {
  const auto cfg = resolve_from(a.common, true, a.checkpoint);
  auto model = load_trainer(a.checkpoint);
  const auto& net = model->config().net;
  if (!net.conditional()) throw ConfigError("augment-study needs a conditional checkpoint (num_classes > 0)");
  const auto set = make_phantom_set(cfg.phantoms, cfg.phantom_seed, net.full_resolution);
  std::vector<Volume> train, test;
  std::vector<int> tl, sl;
  for (const auto& p : set.train) train.push_back(p.volume), tl.push_back(p.label);
  for (const auto& p : set.test) test.push_back(p.volume), sl.push_back(p.label);
  AugmentConfig ac;
  ac.resolution = a.resolution;
  ac.steps = a.classifier_steps;
  ac.seed = cfg.train.seed;
  const ClassSampler sampler = [&](int label, int count) {
    return sample_volumes(*model, count, cfg.train.seed * 31 + static_cast<std::uint64_t>(label),
                          std::vector<int>(static_cast<std::size_t>(count), label));
  };
  const auto r = augment_study(ac, train, tl, test, sl, static_cast<int>(net.num_classes), sampler);
  const auto table = r.table();
  std::printf("%s", table.c_str());
  std::ofstream(fs::path(cfg.out_dir) / "augment.txt") << table;
  write_manifest(cfg.out_dir, "augment-study", cfg.echo(), {"augment.txt"});
  return 0;
}

}  // namespace hagan::cli
