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

// hagan: train, sample, encode, evaluate and profile hierarchical 3D GANs.
//
// Exit codes: 0 success, 1 usage or invalid configuration, 2 runtime failure.

#include <cstdio>
#include <functional>

#include "CLI11.hpp"
#include "commands.hpp"
#include "hagan/errors.hpp"

namespace {

using namespace hagan::cli;

void add_common(CLI::App* sub, Common& c, bool stochastic) {
  sub->add_option("--config", c.config_path, "Run configuration file (key = value lines)");
  sub->add_option("--seed", c.seed, stochastic ? "Random seed (required)" : "Random seed");
  sub->add_option("--out", c.out, "Output directory (default: $HAGAN_OUT_DIR or ./out)");
  sub->allow_extras();
  sub->footer("Any RunConfig key can be overridden as --<key> <value>, e.g. --steps 500 --sr.lambda 10.");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hagan: hierarchical amortized 3D GAN toolkit"};
  app.require_subcommand(1);

  TrainArgs train;
  auto* s_train = app.add_subcommand("train", "Train on a phantom set, then evaluate and checkpoint");
  add_common(s_train, train.common, true);

  GenerateArgs gen;
  auto* s_gen = app.add_subcommand("generate", "Sample full-resolution volumes from a checkpoint");
  add_common(s_gen, gen.common, true);
  s_gen->add_option("--checkpoint", gen.checkpoint)->required();
  s_gen->add_option("--n", gen.n, "Number of volumes")->check(CLI::PositiveNumber);
  s_gen->add_option("--class", gen.label, "Class label for a conditional model");

  EncodeArgs enc;
  auto* s_enc = app.add_subcommand("encode", "Encode a directory of volumes to latent codes");
  add_common(s_enc, enc.common, false);
  s_enc->add_option("--checkpoint", enc.checkpoint)->required();
  s_enc->add_option("--in", enc.in, "Directory of .hagv volumes")->required();

  ReconstructArgs rec;
  auto* s_rec = app.add_subcommand("reconstruct", "Encode and regenerate a directory of volumes");
  add_common(s_rec, rec.common, false);
  s_rec->add_option("--checkpoint", rec.checkpoint)->required();
  s_rec->add_option("--in", rec.in, "Directory of .hagv volumes")->required();

  InterpolateArgs interp;
  auto* s_interp = app.add_subcommand("interpolate", "Decode a straight latent path between two random codes");
  add_common(s_interp, interp.common, true);
  s_interp->add_option("--checkpoint", interp.checkpoint)->required();
  s_interp->add_option("--steps", interp.steps)->check(CLI::PositiveNumber);

  FitDirectionArgs fit;
  auto* s_fit = app.add_subcommand("fit-direction", "Regress a phantom attribute on latents and walk along it");
  add_common(s_fit, fit.common, false);
  s_fit->add_option("--checkpoint", fit.checkpoint)->required();
  s_fit->add_option("--target", fit.target)->check(CLI::IsMember({"organ_voxels", "lesion_voxels", "body_voxels"}));
  s_fit->add_option("--count", fit.count, "Phantoms to encode")->check(CLI::Range(3, 100000));
  s_fit->add_option("--phantom-seed", fit.phantom_seed);
  s_fit->add_option("--traverse", fit.traverse, "Volumes to decode along the direction (0: none)");

  EvalArgs ev;
  auto* s_eval = app.add_subcommand("eval", "Metrics between two volume sets");
  add_common(s_eval, ev.common, false);
  s_eval->add_option("--real", ev.real)->required();
  s_eval->add_option("--fake", ev.fake)->required();
  s_eval->add_option("--metric", ev.metrics, "Comma list of fid, mmd, ssim, psnr, nmse");
  s_eval->add_option("--bandwidth", ev.bandwidth, "RBF bandwidth (default: pooled median distance)");

  MemsimArgs mem;
  auto* s_mem = app.add_subcommand("memsim", "Memory reports and resolution sweeps");
  add_common(s_mem, mem.common, false);
  s_mem->add_option("--multiplier", mem.multiplier, "Sub-volume multiplier, e.g. 0.125 or 1/8");
  s_mem->add_option("--resolution", mem.resolution, "Full resolution (low = resolution / 4)");
  s_mem->add_option("--mode", mem.mode)->check(CLI::IsMember({"analytic", "measured", "both"}));
  s_mem->add_option("--sweep", mem.sweep, "Resolutions for a sweep table")->delimiter(',');

  SrTrainArgs srt;
  auto* s_srt = app.add_subcommand("sr-train", "Train the super-resolution model on degraded phantom pairs");
  add_common(s_srt, srt.common, true);

  SrEvalArgs sre;
  auto* s_sre = app.add_subcommand("sr-eval", "SR vs trilinear metrics on degraded copies of a volume set");
  add_common(s_sre, sre.common, true);
  s_sre->add_option("--checkpoint", sre.checkpoint)->required();
  s_sre->add_option("--in", sre.in, "Directory of high-resolution .hagv volumes")->required();

  PhantomsArgs ph;
  auto* s_ph = app.add_subcommand("phantoms", "Write synthetic phantom volumes and their labels");
  add_common(s_ph, ph.common, true);
  s_ph->add_option("--n", ph.n)->check(CLI::PositiveNumber);
  s_ph->add_option("--extent", ph.extent);
  s_ph->add_flag("--masks", ph.masks, "Also write organ and lesion masks");

  AugmentArgs aug;
  auto* s_aug = app.add_subcommand("augment-study", "Classifier accuracy with and without conditional samples");
  add_common(s_aug, aug.common, true);
  s_aug->add_option("--checkpoint", aug.checkpoint, "Conditional model checkpoint")->required();
  s_aug->add_option("--resolution", aug.resolution, "Classifier input extent");
  s_aug->add_option("--classifier-steps", aug.classifier_steps);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  const std::vector<std::pair<CLI::App*, std::function<int()>>> table{
      {s_train, [&] { return run_train(train); }},
      {s_gen, [&] { return run_generate(gen); }},
      {s_enc, [&] { return run_encode(enc); }},
      {s_rec, [&] { return run_reconstruct(rec); }},
      {s_interp, [&] { return run_interpolate(interp); }},
      {s_fit, [&] { return run_fit_direction(fit); }},
      {s_eval, [&] { return run_eval(ev); }},
      {s_mem, [&] { return run_memsim(mem); }},
      {s_srt, [&] { return run_sr_train(srt); }},
      {s_sre, [&] { return run_sr_eval(sre); }},
      {s_ph, [&] { return run_phantoms(ph); }},
      {s_aug, [&] { return run_augment(aug); }},
  };
  for (auto& [sub, run] : table) {
    if (!sub->parsed()) continue;
    const auto extras = sub->remaining();
    try {
      // Leftover "--key value" pairs become RunConfig overrides.
      for (Common* c : {&train.common, &gen.common, &enc.common, &rec.common, &interp.common, &fit.common,
                        &ev.common, &mem.common, &srt.common, &sre.common, &ph.common, &aug.common}) {
        c->overrides = extras;
      }
      return run();
    } catch (const UsageError& e) {
      std::fprintf(stderr, "usage error: %s\n", e.what());
      return 1;
    } catch (const hagan::ConfigError& e) {
      std::fprintf(stderr, "invalid configuration: %s\n", e.what());
      return 1;
    } catch (const std::exception& e) {
      std::fprintf(stderr, "error: %s\n", e.what());
      return 2;
    }
  }
  return 1;
}
