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

#include "hagan/memory_model.hpp"

#include <cstdio>
#include <map>
#include <set>

#include "hagan/errors.hpp"
#include "hagan/inference.hpp"
#include "hagan/phantom.hpp"

namespace hagan {
namespace {

constexpr std::int64_t kWord = sizeof(float);

// A tensor handle in the simulation: `buf` is the payload (shared by
// reshapes), `id` the handle identity used for gradient bookkeeping.
struct Value {
  int id = -1;
  int buf = -1;
  bool grad = false;
};

// Replays allocations against a MemoryCounter with reference counting that
// follows Tensor handles and tape nodes.
class Sim {
 public:
  MemoryCounter counter;
  bool taping = false;

  int alloc_raw(std::int64_t bytes, MemTag tag) {
    bufs_.push_back({bytes, tag, 1});
    counter.on_alloc(tag, bytes);
    return static_cast<int>(bufs_.size()) - 1;
  }
  void ref(int b) { ++bufs_[static_cast<std::size_t>(b)].refs; }
  void unref(int b) {
    auto& x = bufs_[static_cast<std::size_t>(b)];
    if (--x.refs == 0) counter.on_free(x.tag, x.bytes);
  }
  std::int64_t bytes(int b) const { return bufs_[static_cast<std::size_t>(b)].bytes; }

  Value leaf(std::int64_t bytes, MemTag tag) { return {next_id_++, alloc_raw(bytes, tag), false}; }
  Value copy(const Value& v) {
    ref(v.buf);
    return v;
  }
  void drop(Value& v) {
    if (v.buf >= 0) unref(v.buf);
    v = Value{};
  }

  // An op producing `bytes` (or aliasing `alias`). Recorded when taping and
  // any input, or a trainable parameter, requires grad; a recorded node holds
  // its inputs and output until backward reaches it.
  Value op(const std::vector<Value>& in, std::int64_t bytes, bool params_grad, std::int64_t param_grad_bytes,
           int alias = -1) {
    Value out;
    out.id = next_id_++;
    if (alias >= 0) {
      out.buf = alias;
      ref(alias);
    } else {
      out.buf = alloc_raw(bytes, MemTag::kActivation);
    }
    bool any = params_grad;
    for (const auto& v : in) any = any || v.grad;
    if (taping && any) {
      out.grad = true;
      Node n{in, out, params_grad ? param_grad_bytes : 0};
      for (const auto& v : n.inputs) ref(v.buf);
      ref(out.buf);
      tape_.push_back(std::move(n));
    }
    return out;
  }

  void backward() {
    if (tape_.empty()) return;
    std::map<int, int> grads;  // handle id -> gradient buffer
    grads[tape_.back().out.id] = alloc_raw(kWord, MemTag::kGradient);
    for (auto it = tape_.rbegin(); it != tape_.rend(); ++it) {
      auto& n = *it;
      const auto g = grads.find(n.out.id);
      if (g != grads.end()) {
        for (const auto& v : n.inputs) {
          if (v.grad && !grads.count(v.id)) grads[v.id] = alloc_raw(bytes(v.buf), MemTag::kGradient);
        }
        if (n.param_grad_bytes > 0) param_grads_.push_back(alloc_raw(n.param_grad_bytes, MemTag::kGradient));
        unref(g->second);
        grads.erase(g);
      }
      for (const auto& v : n.inputs) unref(v.buf);
      unref(n.out.buf);
    }
    // Gradients that reached non-parameter leaves stay with their handles;
    // in the trainer no such leaf outlives the phase.
    for (auto& [id, b] : grads) unref(b);
    tape_.clear();
  }

  // The optimizer update releases all parameter gradients.
  void release_param_grads() {
    for (int b : param_grads_) unref(b);
    param_grads_.clear();
  }

 private:
  struct Buf {
    std::int64_t bytes;
    MemTag tag;
    int refs;
  };
  struct Node {
    std::vector<Value> inputs;
    Value out;
    std::int64_t param_grad_bytes;
  };
  std::vector<Buf> bufs_;
  std::vector<Node> tape_;
  std::vector<int> param_grads_;
  int next_id_ = 0;
};

struct LayerParams {
  std::int64_t weight = 0;     // bytes of the (possibly spectral) weight
  std::int64_t trainable = 0;  // all trainable bytes of the layer
};

std::map<std::string, LayerParams> layer_params(const NetworkGraph& g) {
  std::map<std::string, LayerParams> out;
  for (const auto& p : param_specs(g)) {
    const auto slash = p.name.rfind('/');
    const auto layer = p.name.substr(0, slash);
    const auto field = p.name.substr(slash + 1);
    const auto bytes = shape_numel(p.shape) * kWord;
    if (field == "weight") out[layer].weight = bytes;
    if (p.trainable) out[layer].trainable += bytes;
  }
  return out;
}

// Mirrors Network::forward_all.
std::vector<Value> forward(Sim& s, const NetworkGraph& g, const Value& x, const Shape& sample, std::int64_t batch,
                           bool trainable) {
  const auto shapes = infer_shapes(g, sample);
  const auto params = layer_params(g);
  std::vector<int> last_use(g.layers.size(), -1);
  for (std::size_t i = 1; i < g.layers.size(); ++i) {
    for (int j : g.layers[i].inputs) last_use[static_cast<std::size_t>(j)] = static_cast<int>(i);
  }
  std::vector<Value> vals(g.layers.size());
  vals[0] = s.copy(x);
  for (std::size_t i = 1; i < g.layers.size(); ++i) {
    const auto& l = g.layers[i];
    const auto bytes = batch * shape_numel(shapes[i]) * kWord;
    const Value& in = vals[static_cast<std::size_t>(l.inputs.at(0))];
    const auto key = g.prefix + "/" + l.name;
    const auto pit = params.find(key);
    const LayerParams lp = pit == params.end() ? LayerParams{} : pit->second;
    Value out;
    switch (l.kind) {
      case LayerKind::kInput:
        break;
      case LayerKind::kReshape:
        out = s.op({in}, 0, false, 0, in.buf);
        break;
      case LayerKind::kConv:
      case LayerKind::kDense:
        if (l.spectral) {
          // W / sigma is a fresh tensor on every forward.
          Value w = s.op({}, lp.weight, trainable, 0);
          out = s.op({in, w}, bytes, trainable, lp.trainable);
          s.drop(w);
        } else {
          out = s.op({in}, bytes, trainable, lp.trainable);
        }
        break;
      case LayerKind::kGroupNorm:
      case LayerKind::kBatchNorm:
        out = s.op({in}, bytes, trainable, lp.trainable);
        break;
      case LayerKind::kConcat: {
        std::vector<Value> parts;
        for (int j : l.inputs) parts.push_back(vals[static_cast<std::size_t>(j)]);
        out = s.op(parts, bytes, false, 0);
        break;
      }
      case LayerKind::kAdd:
        out = s.op({in, vals[static_cast<std::size_t>(l.inputs.at(1))]}, bytes, false, 0);
        break;
      default:
        out = s.op({in}, bytes, false, 0);
        break;
    }
    vals[i] = out;
    for (int j : l.inputs) {
      if (j > 0 && last_use[static_cast<std::size_t>(j)] == static_cast<int>(i)) s.drop(vals[static_cast<std::size_t>(j)]);
    }
  }
  std::vector<Value> outs;
  for (int o : g.outputs) outs.push_back(s.copy(vals[static_cast<std::size_t>(o)]));
  for (auto& v : vals) s.drop(v);
  return outs;
}

Value forward1(Sim& s, const NetworkGraph& g, const Value& x, const Shape& sample, std::int64_t batch, bool trainable) {
  auto outs = forward(s, g, x, sample, batch, trainable);
  for (std::size_t i = 1; i < outs.size(); ++i) s.drop(outs[i]);
  return outs.front();
}

void drop_all(Sim& s, std::vector<Value>& vs) {
  for (auto& v : vs) s.drop(v);
  vs.clear();
}

// Replays Trainer::step (or generate_full) for `cfg`.
MemoryCounter simulate(const TrainConfig& cfg, MemoryMode mode) {
  const auto& net = cfg.net;
  const auto g = build_hagan(net);
  const std::int64_t b = cfg.batch;
  const auto hi = net.full_resolution;
  const auto lo = net.low_resolution;
  const auto fc = net.feature_channels;
  const auto sub = net.subvol_depth();
  const auto sub_lo = net.subvol_depth_low();
  const Shape z_shape{net.latent_dim + net.num_classes};
  const Shape a_shape{fc, lo, lo, lo};
  const Shape ar_shape{fc, sub_lo, lo, lo};
  const Shape low_shape{1, lo, lo, lo};
  const Shape sub_shape{1, sub, hi, hi};

  Sim s;
  std::int64_t params = 0, trainable = 0;
  for (const auto* graph : g.all()) {
    for (const auto& p : param_specs(*graph)) {
      params += shape_numel(p.shape);
      if (p.trainable) trainable += shape_numel(p.shape);
    }
  }
  s.alloc_raw(params * kWord, MemTag::kParameter);
  s.alloc_raw(2 * trainable * kWord, MemTag::kOptimizer);

  auto z = s.leaf(b * shape_numel(z_shape) * kWord, MemTag::kActivation);
  if (mode == MemoryMode::kInference) {
    auto a = forward1(s, g.g_a, z, z_shape, b, false);
    auto x = forward1(s, g.g_h, a, a_shape, b, false);
    s.drop(a);
    s.drop(x);
    return s.counter;
  }

  auto x_high = s.leaf(b * hi * hi * hi * kWord, MemTag::kData);
  auto x_low = s.op({x_high}, b * lo * lo * lo * kWord, false, 0);
  auto real_sub = s.op({x_high}, b * sub * hi * hi * kWord, false, 0);
  auto slice_a = [&](const Value& a) { return s.op({a}, b * shape_numel(ar_shape) * kWord, false, 0); };

  // Discriminator phase: untaped fakes, then D on real and fake stacked.
  {
    auto a = forward1(s, g.g_a, z, z_shape, b, false);
    auto ar = slice_a(a);
    auto fake_sub = forward1(s, g.g_h, ar, ar_shape, b, false);
    s.drop(ar);
    Value fake_low;
    if (cfg.low_branch) fake_low = forward1(s, g.g_l, a, a_shape, b, false);
    s.taping = true;
    if (cfg.low_branch) {
      auto cat = s.op({x_low, fake_low}, 2 * b * shape_numel(low_shape) * kWord, false, 0);
      auto outs = forward(s, g.d_l, cat, low_shape, 2 * b, true);
      s.drop(cat);
      drop_all(s, outs);
    }
    auto cat = s.op({real_sub, fake_sub}, 2 * b * shape_numel(sub_shape) * kWord, false, 0);
    auto outs = forward(s, g.d_h, cat, sub_shape, 2 * b, true);
    s.drop(cat);
    drop_all(s, outs);
    s.taping = false;
    s.backward();
    s.release_param_grads();
    s.drop(a);
    s.drop(fake_sub);
    s.drop(fake_low);
  }

  // Generator phase.
  {
    s.taping = true;
    auto a = forward1(s, g.g_a, z, z_shape, b, true);
    if (cfg.low_branch) {
      auto fl = forward1(s, g.g_l, a, a_shape, b, true);
      auto outs = forward(s, g.d_l, fl, low_shape, b, false);
      drop_all(s, outs);
      s.drop(fl);
    }
    auto ar = slice_a(a);
    auto fake = forward1(s, g.g_h, ar, ar_shape, b, true);
    s.drop(ar);
    auto outs = forward(s, g.d_h, fake, sub_shape, b, false);
    drop_all(s, outs);
    s.drop(fake);
    s.drop(a);
    s.taping = false;
    s.backward();
    s.release_param_grads();
  }

  if (cfg.encoder) {
    {
      s.taping = true;
      auto ar = forward1(s, g.e_h, real_sub, sub_shape, b, true);
      auto rec = forward1(s, g.g_h, ar, ar_shape, b, false);
      s.drop(ar);
      s.drop(rec);
      s.taping = false;
      s.backward();
      s.release_param_grads();
    }
    {
      const auto parts = net.partitions();
      std::vector<Value> subs, feats;
      for (std::int64_t v = 0; v < parts; ++v) subs.push_back(s.op({x_high}, b * sub * hi * hi * kWord, false, 0));
      for (auto& p : subs) feats.push_back(forward1(s, g.e_h, p, sub_shape, b, false));
      drop_all(s, subs);
      auto a_hat = s.op(feats, b * shape_numel(a_shape) * kWord, false, 0);
      drop_all(s, feats);
      s.taping = true;
      auto zh = forward1(s, g.e_g, a_hat, a_shape, b, true);
      if (net.conditional()) {
        auto onehot = s.leaf(b * net.num_classes * kWord, MemTag::kActivation);
        auto zc = s.op({zh, onehot}, b * shape_numel(z_shape) * kWord, false, 0);
        s.drop(onehot);
        s.drop(zh);
        zh = zc;
      }
      auto a = forward1(s, g.g_a, zh, z_shape, b, false);
      auto ar = slice_a(a);
      auto fake = forward1(s, g.g_h, ar, ar_shape, b, false);
      s.drop(ar);
      s.drop(fake);
      if (cfg.low_branch) {
        auto fl = forward1(s, g.g_l, a, a_shape, b, false);
        s.drop(fl);
      }
      s.drop(a);
      s.drop(zh);
      s.taping = false;
      s.backward();
      s.release_param_grads();
      s.drop(a_hat);
    }
  }
  s.drop(x_low);
  s.drop(real_sub);
  s.drop(x_high);
  s.drop(z);
  return s.counter;
}

MemoryReport report_from(const MemoryCounter& c, MemoryMode mode, const TrainConfig& cfg) {
  MemoryReport r;
  r.mode = mode;
  r.multiplier = cfg.net.subvol_multiplier;
  r.params_bytes = c.peak(MemTag::kParameter);
  r.optimizer_bytes = c.peak(MemTag::kOptimizer);
  r.grads_bytes = c.peak(MemTag::kGradient);
  r.activations_bytes = c.peak(MemTag::kActivation);
  r.data_bytes = c.peak(MemTag::kData);
  r.peak_total = c.peak_total();
  return r;
}

TrainConfig for_mode(TrainConfig cfg, MemoryMode mode) {
  if (mode == MemoryMode::kTrainFull) cfg.net.subvol_multiplier = {1, 1};
  cfg.validate();
  return cfg;
}

std::string fmt_bytes(std::int64_t b) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%lld (%.2f MiB)", static_cast<long long>(b), static_cast<double>(b) / (1 << 20));
  return buf;
}

}  // namespace

std::string_view mode_name(MemoryMode mode) {
  switch (mode) {
    case MemoryMode::kTrainAmortized: return "train_amortized";
    case MemoryMode::kTrainFull: return "train_full";
    case MemoryMode::kInference: return "inference";
  }
  return "?";
}

std::string MemoryReport::table() const {
  std::string out;
  auto row = [&out](const std::string& k, const std::string& v) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "%-20s %s\n", k.c_str(), v.c_str());
    out += buf;
  };
  row("mode", std::string(mode_name(mode)));
  row("multiplier", std::to_string(multiplier.num) + "/" + std::to_string(multiplier.den));
  row("params_bytes", fmt_bytes(params_bytes));
  row("optimizer_bytes", fmt_bytes(optimizer_bytes));
  row("grads_bytes", fmt_bytes(grads_bytes));
  row("activations_bytes", fmt_bytes(activations_bytes));
  row("data_bytes", fmt_bytes(data_bytes));
  row("peak_total", fmt_bytes(peak_total));
  if (high_branch_bytes > 0) row("high_branch_bytes", fmt_bytes(high_branch_bytes));
  return out;
}

MemoryReport analytic_memory(const TrainConfig& base, MemoryMode mode) {
  const auto cfg = for_mode(base, mode);
  auto r = report_from(simulate(cfg, mode), mode, cfg);
  if (mode != MemoryMode::kInference) {
    const auto& net = cfg.net;
    const auto g = build_hagan(net);
    auto sum = [&](const NetworkGraph& graph, const Shape& in) {
      std::int64_t total = 0;
      const auto shapes = infer_shapes(graph, in);
      for (std::size_t i = 1; i < graph.layers.size(); ++i) {
        if (graph.layers[i].kind != LayerKind::kReshape) total += shape_numel(shapes[i]);
      }
      return total * cfg.batch * kWord;
    };
    const auto lo = net.low_resolution, hi = net.full_resolution;
    r.high_branch_bytes = sum(g.g_h, {net.feature_channels, net.subvol_depth_low(), lo, lo}) +
                          sum(g.e_h, {1, net.subvol_depth(), hi, hi});
  }
  return r;
}

MemoryReport measured_memory(const std::function<void()>& run) {
  CounterScope scope;
  run();
  MemoryReport r;
  const auto& c = scope.counter();
  r.params_bytes = c.peak(MemTag::kParameter);
  r.optimizer_bytes = c.peak(MemTag::kOptimizer);
  r.grads_bytes = c.peak(MemTag::kGradient);
  r.activations_bytes = c.peak(MemTag::kActivation);
  r.data_bytes = c.peak(MemTag::kData);
  r.peak_total = c.peak_total();
  return r;
}

MemoryReport measure_step(const TrainConfig& base, MemoryMode mode) {
  const auto cfg = for_mode(base, mode);
  auto r = measured_memory([&] {
    Trainer<float> trainer(cfg);
    if (mode == MemoryMode::kInference) {
      std::vector<int> labels;
      for (int i = 0; i < cfg.batch && cfg.net.conditional(); ++i) labels.push_back(i % static_cast<int>(cfg.net.num_classes));
      const auto z = sample_latent<float>(trainer.rng(), cfg.batch, cfg.net.latent_dim, labels,
                                          static_cast<int>(cfg.net.num_classes));
      generate_full(trainer, z);
      return;
    }
    std::vector<Phantom> ph;
    std::vector<const Volume*> vols;
    std::vector<int> labels;
    for (int i = 0; i < cfg.batch; ++i) {
      ph.push_back(phantom_generate(static_cast<std::uint64_t>(i), i % kPhantomClasses, cfg.net.full_resolution));
    }
    for (const auto& p : ph) {
      vols.push_back(&p.volume);
      if (cfg.net.conditional()) labels.push_back(p.label % static_cast<int>(cfg.net.num_classes));
    }
    const auto ctx = trainer.prepare(to_batch<float>(vols), labels);
    trainer.step(ctx);
  });
  r.mode = mode;
  r.multiplier = cfg.net.subvol_multiplier;
  return r;
}

std::vector<SweepRow> resolution_sweep(const TrainConfig& base, const std::vector<std::int64_t>& resolutions) {
  std::vector<SweepRow> rows;
  for (auto res : resolutions) {
    auto cfg = base;
    cfg.net.full_resolution = res;
    cfg.net.low_resolution = res / 4;
    cfg.validate();
    SweepRow row;
    row.resolution = res;
    row.parameters = parameter_count(build_hagan(cfg.net).all());
    row.train_peak = analytic_memory(cfg, MemoryMode::kTrainAmortized).peak_total;
    row.full_peak = analytic_memory(cfg, MemoryMode::kTrainFull).peak_total;
    rows.push_back(row);
  }
  return rows;
}

std::string sweep_table(const std::vector<SweepRow>& rows) {
  std::string out = "resolution  parameters  train_peak_MiB  full_train_peak_MiB\n";
  for (const auto& r : rows) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "%10lld  %10lld  %14.1f  %19.1f\n", static_cast<long long>(r.resolution),
                  static_cast<long long>(r.parameters), static_cast<double>(r.train_peak) / (1 << 20),
                  static_cast<double>(r.full_peak) / (1 << 20));
    out += buf;
  }
  return out;
}

}  // namespace hagan
