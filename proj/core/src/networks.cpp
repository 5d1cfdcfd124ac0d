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

#include "hagan/networks.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <functional>
#include <limits>
#include <string>

#include "hagan/errors.hpp"
#include "hagan/spectral_norm.hpp"

namespace hagan {
namespace {

bool is_pow2(std::int64_t v) { return v > 0 && std::has_single_bit(static_cast<std::uint64_t>(v)); }

std::int64_t log2i(std::int64_t v) {
  return static_cast<std::int64_t>(std::bit_width(static_cast<std::uint64_t>(v))) - 1;
}

std::int64_t scale_channels(std::int64_t table, std::int64_t base) {
  return std::max<std::int64_t>(1, (table * base + 63) / 64);
}

// Largest divisor of `channels` that is at most 8.
std::int64_t gn_groups(std::int64_t channels) {
  for (std::int64_t g = std::min<std::int64_t>(8, channels); g > 1; --g) {
    if (channels % g == 0) return g;
  }
  return 1;
}

// The last `n` entries of `table`, padded at the front with table[0].
std::vector<std::int64_t> tail(const std::vector<std::int64_t>& table, std::int64_t n) {
  std::vector<std::int64_t> out;
  const auto size = static_cast<std::int64_t>(table.size());
  for (std::int64_t i = size - n; i < size; ++i) out.push_back(table[static_cast<std::size_t>(std::max<std::int64_t>(i, 0))]);
  return out;
}

class Builder {
 public:
  Builder(Role role, std::string prefix, Shape input) {
    g_.role = role;
    g_.prefix = std::move(prefix);
    g_.input_shape = std::move(input);
    LayerSpec in;
    in.kind = LayerKind::kInput;
    in.name = "input";
    g_.layers.push_back(in);
  }

  int add(LayerSpec spec) {
    if (spec.inputs.empty()) spec.inputs = {last()};
    g_.layers.push_back(std::move(spec));
    return last();
  }

  int conv(const std::string& name, std::int64_t out, Int3 k, Int3 s, Int3 p, bool spectral = false) {
    LayerSpec l;
    l.kind = LayerKind::kConv;
    l.name = name;
    l.out = out;
    l.kernel = k;
    l.stride = s;
    l.pad = p;
    l.spectral = spectral;
    return add(l);
  }
  int conv3(const std::string& name, std::int64_t out) { return conv(name, out, {3, 3, 3}, {1, 1, 1}, {1, 1, 1}); }
  int conv4s2(const std::string& name, std::int64_t out, bool spectral = false) {
    return conv(name, out, {4, 4, 4}, {2, 2, 2}, {1, 1, 1}, spectral);
  }

  int dense(const std::string& name, std::int64_t out, bool spectral = false) {
    LayerSpec l;
    l.kind = LayerKind::kDense;
    l.name = name;
    l.out = out;
    l.spectral = spectral;
    return add(l);
  }

  int gn_relu(const std::string& name, std::int64_t channels, bool per_slice = false) {
    LayerSpec l;
    l.kind = LayerKind::kGroupNorm;
    l.name = name;
    l.groups = gn_groups(channels);
    l.per_slice = per_slice;
    l.fuse_relu = true;
    return add(l);
  }

  int simple(LayerKind kind, const std::string& name, std::vector<int> inputs = {}) {
    LayerSpec l;
    l.kind = kind;
    l.name = name;
    l.inputs = std::move(inputs);
    return add(l);
  }

  int interp(const std::string& name, Ratio s, std::vector<int> inputs = {}) {
    LayerSpec l;
    l.kind = LayerKind::kInterp;
    l.name = name;
    l.scale = s;
    l.inputs = std::move(inputs);
    return add(l);
  }

  int reshape(const std::string& name, Shape shape, std::vector<int> inputs = {}) {
    LayerSpec l;
    l.kind = LayerKind::kReshape;
    l.name = name;
    l.shape = std::move(shape);
    l.inputs = std::move(inputs);
    return add(l);
  }

  LayerSpec& at(int i) { return g_.layers[static_cast<std::size_t>(i)]; }
  int last() const { return static_cast<int>(g_.layers.size()) - 1; }

  NetworkGraph finish(std::vector<int> outputs) {
    g_.outputs = std::move(outputs);
    // Validate at construction: every graph must accept its nominal input.
    infer_shapes(g_, g_.input_shape);
    return std::move(g_);
  }

 private:
  NetworkGraph g_;
};

void require(bool ok, const std::string& what) {
  if (!ok) throw ConfigError(what);
}

}  // namespace

NetConfig NetConfig::reference() {
  NetConfig c;
  c.full_resolution = 256;
  c.low_resolution = 64;
  c.latent_dim = 1024;
  c.base_channels = 64;
  c.subvol_multiplier = {1, 8};
  c.feature_channels = 64;
  return c;
}

NetConfig NetConfig::desk() { return NetConfig{}; }

void NetConfig::validate() const {
  require(is_pow2(low_resolution) && low_resolution >= 4,
          "low_resolution must be a power of two >= 4, got " + std::to_string(low_resolution));
  require(full_resolution == 4 * low_resolution,
          "full_resolution must equal 4 * low_resolution (" + std::to_string(full_resolution) +
              " vs " + std::to_string(low_resolution) + ")");
  require(latent_dim >= 1, "latent_dim must be positive");
  require(base_channels >= 1, "base_channels must be positive");
  require(feature_channels >= 1, "feature_channels must be positive");
  require(num_classes >= 0, "num_classes must be nonnegative");
  const auto& m = subvol_multiplier;
  require(m.num > 0 && m.den > 0 && m.num <= m.den, "subvol_multiplier must lie in (0, 1]");
  require((low_resolution * m.num) % m.den == 0,
          "subvol_multiplier * low_resolution must be an integer");
  require(low_resolution % (low_resolution * m.num / m.den) == 0,
          "sub-volume length must divide the depth");
  require(subvol_depth() >= kConsistencyMargin, "sub-volume shorter than the receptive-field margin");
}

std::int64_t NetConfig::channels(std::int64_t table) const { return scale_channels(table, base_channels); }

std::int64_t NetConfig::subvol_depth() const { return 4 * subvol_depth_low(); }

std::int64_t NetConfig::subvol_depth_low() const {
  return low_resolution * subvol_multiplier.num / subvol_multiplier.den;
}

std::int64_t NetConfig::partitions() const { return low_resolution / subvol_depth_low(); }

void SRConfig::validate() const {
  require(sr_factor == 2, "sr_factor must be 2");
  require(is_pow2(hr_resolution) && hr_resolution >= 16, "hr_resolution must be a power of two >= 16");
  require(noise_sigma >= 0, "noise_sigma must be nonnegative");
  require(lambda >= 0, "lambda must be nonnegative");
  const auto& m = subvol_multiplier;
  require(m.num > 0 && m.den > 0 && m.num <= m.den, "subvol_multiplier must lie in (0, 1]");
  require((lr_resolution() * m.num) % m.den == 0 && subvol_len() >= 1,
          "subvol_multiplier * LR extent must be a positive integer");
  require(lr_resolution() % subvol_len() == 0, "SR window must divide the LR depth");
}

std::int64_t SRConfig::subvol_len() const {
  return lr_resolution() * subvol_multiplier.num / subvol_multiplier.den;
}

std::int64_t SRConfig::channels(std::int64_t table) const { return scale_channels(table, base_channels); }

NetworkGraph build_g_a(const NetConfig& cfg) {
  cfg.validate();
  const auto interps = log2i(cfg.low_resolution / 4);
  std::vector<std::int64_t> table{512, 512, 256, 128, 64};
  while (static_cast<std::int64_t>(table.size()) < interps + 1) table.insert(table.begin(), 512);
  std::vector<std::int64_t> ch;
  for (auto t : table) ch.push_back(cfg.channels(t));
  ch.back() = cfg.feature_channels;

  Builder b(Role::kGA, "g_a", {cfg.latent_dim + cfg.num_classes});
  b.dense("dense", ch[0] * 64);
  b.reshape("reshape", {ch[0], 4, 4, 4});
  for (std::size_t i = 0; i < ch.size(); ++i) {
    const auto id = std::to_string(i + 1);
    b.conv3("conv" + id, ch[i]);
    b.gn_relu("gn" + id, ch[i]);
    if (static_cast<std::int64_t>(i) < interps) b.interp("up" + id, {2, 1});
  }
  return b.finish({b.last()});
}

NetworkGraph build_g_l(const NetConfig& cfg) {
  cfg.validate();
  const auto lo = cfg.low_resolution;
  Builder b(Role::kGL, "g_l", {cfg.feature_channels, lo, lo, lo});
  b.conv3("conv1", cfg.channels(32));
  b.gn_relu("gn1", cfg.channels(32));
  b.conv3("conv2", cfg.channels(16));
  b.gn_relu("gn2", cfg.channels(16));
  b.conv3("conv3", 1);
  b.simple(LayerKind::kTanh, "tanh");
  return b.finish({b.last()});
}

NetworkGraph build_g_h(const NetConfig& cfg) {
  cfg.validate();
  const auto lo = cfg.low_resolution;
  Builder b(Role::kGH, "g_h", {cfg.feature_channels, cfg.subvol_depth_low(), lo, lo});
  b.interp("up1", {2, 1});
  b.conv3("conv1", cfg.channels(32));
  // Per-slice statistics keep the block local along depth, so a window of A
  // produces exactly the matching crop of the full-volume output.
  b.gn_relu("gn1", cfg.channels(32), /*per_slice=*/true);
  b.interp("up2", {2, 1});
  b.conv3("conv2", 1);
  b.simple(LayerKind::kTanh, "tanh");
  return b.finish({b.last()});
}

NetworkGraph build_e_h(const NetConfig& cfg) {
  cfg.validate();
  const auto hi = cfg.full_resolution;
  Builder b(Role::kEH, "e_h", {1, cfg.subvol_depth(), hi, hi});
  b.conv4s2("conv1", cfg.channels(32));
  b.gn_relu("gn1", cfg.channels(32));
  b.conv3("conv2", cfg.channels(32));
  b.gn_relu("gn2", cfg.channels(32));
  b.conv4s2("conv3", cfg.feature_channels);
  b.gn_relu("gn3", cfg.feature_channels);
  return b.finish({b.last()});
}

NetworkGraph build_e_g(const NetConfig& cfg) {
  cfg.validate();
  const auto lo = cfg.low_resolution;
  const auto stages = tail({32, 64, 128, 256}, log2i(lo / 4));
  Builder b(Role::kEG, "e_g", {cfg.feature_channels, lo, lo, lo});
  for (std::size_t i = 0; i < stages.size(); ++i) {
    const auto id = std::to_string(i + 1);
    b.conv4s2("conv" + id, cfg.channels(stages[i]));
    b.gn_relu("gn" + id, cfg.channels(stages[i]));
  }
  b.conv("conv" + std::to_string(stages.size() + 1), cfg.latent_dim, {4, 4, 4}, {1, 1, 1}, {0, 0, 0});
  b.reshape("reshape", {cfg.latent_dim});
  return b.finish({b.last()});
}

NetworkGraph build_d_l(const NetConfig& cfg) {
  cfg.validate();
  const auto lo = cfg.low_resolution;
  const auto stages = tail({32, 64, 128, 256}, log2i(lo / 4));
  Builder b(Role::kDL, "d_l", {1, lo, lo, lo});
  for (std::size_t i = 0; i < stages.size(); ++i) {
    const auto id = std::to_string(i + 1);
    b.conv4s2("conv" + id, cfg.channels(stages[i]), /*spectral=*/true);
    b.simple(LayerKind::kLeakyRelu, "lrelu" + id);
  }
  const int features = b.last();
  b.conv("conv" + std::to_string(stages.size() + 1), 1, {4, 4, 4}, {1, 1, 1}, {0, 0, 0}, true);
  const int logit = b.reshape("reshape", {1});
  std::vector<int> outputs{logit};
  if (cfg.conditional()) {
    b.at(b.conv("cls_conv", cfg.num_classes, {4, 4, 4}, {1, 1, 1}, {0, 0, 0}, true)).inputs = {features};
    outputs.push_back(b.reshape("cls_reshape", {cfg.num_classes}));
  }
  return b.finish(outputs);
}

namespace {

// Strided stack shared by D^H and the SR discriminator. `depth` is the nominal
// input depth, which fixes the depth kernels; deeper inputs leave a depth > 1
// that the global average pool absorbs.
NetworkGraph build_sub_discriminator(Role role, const std::string& prefix, Shape input,
                                     std::int64_t depth, std::int64_t extent,
                                     std::int64_t num_classes,
                                     const std::function<std::int64_t(std::int64_t)>& ch) {
  const auto stages = tail({16, 32, 64, 128, 256, 512}, log2i(extent / 4));
  Builder b(role, prefix, std::move(input));
  std::int64_t d = depth;
  for (std::size_t i = 0; i < stages.size(); ++i) {
    const auto id = std::to_string(i + 1);
    const std::int64_t kd = d >= 8 ? 4 : (d >= 2 ? 2 : 1);
    const std::int64_t pd = kd == 4 ? 1 : 0;
    b.conv("conv" + id, ch(stages[i]), {kd, 4, 4}, {2, 2, 2}, {pd, 1, 1}, true);
    b.simple(LayerKind::kLeakyRelu, "lrelu" + id);
    d = (d + 2 * pd - kd) / 2 + 1;
  }
  const auto id = std::to_string(stages.size() + 1);
  b.conv("conv" + id, ch(128), {1, 4, 4}, {1, 1, 1}, {0, 0, 0}, true);
  b.simple(LayerKind::kLeakyRelu, "lrelu" + id);
  const int pooled = b.simple(LayerKind::kGlobalAvgPool, "pool");
  b.dense("dense1", ch(64), true);
  b.simple(LayerKind::kLeakyRelu, "lrelu_d1");
  b.dense("dense2", ch(32), true);
  b.simple(LayerKind::kLeakyRelu, "lrelu_d2");
  std::vector<int> outputs{b.dense("dense3", 1, true)};
  if (num_classes > 0) {
    LayerSpec head;
    head.kind = LayerKind::kDense;
    head.name = "cls_dense";
    head.out = num_classes;
    head.spectral = true;
    head.inputs = {pooled};
    outputs.push_back(b.add(head));
  }
  return b.finish(outputs);
}

}  // namespace

NetworkGraph build_d_h(const NetConfig& cfg) {
  cfg.validate();
  const auto hi = cfg.full_resolution;
  // Depth kernels are fixed for a 1/8 window whatever the multiplier, so the
  // parameter count does not depend on it.
  const auto nominal = std::max<std::int64_t>(1, hi / 8);
  return build_sub_discriminator(Role::kDH, "d_h", {1, cfg.subvol_depth(), hi, hi}, nominal, hi,
                                 cfg.num_classes, [&cfg](std::int64_t t) { return cfg.channels(t); });
}

HaganGraphs build_hagan(const NetConfig& cfg) {
  return HaganGraphs{build_g_a(cfg), build_g_l(cfg), build_g_h(cfg), build_d_l(cfg),
                     build_d_h(cfg), build_e_h(cfg), build_e_g(cfg)};
}

NetworkGraph build_classifier(std::int64_t resolution, std::int64_t num_classes) {
  require(resolution >= 32 && resolution % 32 == 0, "classifier input extent must be a multiple of 32");
  require(num_classes >= 2, "classifier needs at least two classes");
  const std::int64_t widths[] = {8, 8, 16, 16, 16, 32, 32, 32, 64, 64, 64, 128, 128};
  const std::int64_t strides[] = {1, 2, 1, 1, 2, 1, 1, 2, 1, 1, 2, 1, 2};
  Builder b(Role::kCLS, "cls", {1, resolution, resolution, resolution});
  for (std::size_t i = 0; i < std::size(widths); ++i) {
    const auto id = std::to_string(i + 1);
    const auto s = strides[i];
    b.conv("conv" + id, widths[i], {3, 3, 3}, {s, s, s}, {1, 1, 1});
    b.simple(LayerKind::kBatchNorm, "bn" + id);
    b.simple(LayerKind::kElu, "elu" + id);
  }
  b.simple(LayerKind::kGlobalAvgPool, "pool");
  b.dense("dense", num_classes);
  return b.finish({b.last()});
}

NetworkGraph build_sr_generator(const SRConfig& cfg) {
  cfg.validate();
  const auto lo = cfg.lr_resolution();
  const auto c1 = cfg.channels(64);
  const auto c2 = cfg.channels(128);
  Builder b(Role::kSRG, "sr_g", {1, cfg.subvol_len(), lo, lo});
  b.conv3("enc1", c1);
  const int e1 = b.gn_relu("enc1_gn", c1, true);
  b.conv("enc2", c2, {1, 1, 1}, {1, 1, 1}, {0, 0, 0});
  const int e2 = b.gn_relu("enc2_gn", c2, true);
  b.simple(LayerKind::kConcat, "skip1", {e2, e1});
  b.conv("dec1", c1, {1, 1, 1}, {1, 1, 1}, {0, 0, 0});
  b.gn_relu("dec1_gn", c1, true);
  const int u = b.interp("dec_up", {2, 1});
  const int up_x = b.interp("input_up", {2, 1}, {0});
  b.simple(LayerKind::kConcat, "skip2", {u, up_x});
  b.conv3("dec2", c1);
  b.gn_relu("dec2_gn", c1, true);
  const int res = b.conv("residual", 1, {1, 1, 1}, {1, 1, 1}, {0, 0, 0});
  b.at(res).zero_init = true;
  b.simple(LayerKind::kAdd, "output", {up_x, res});
  return b.finish({b.last()});
}

NetworkGraph build_sr_discriminator(const SRConfig& cfg) {
  cfg.validate();
  const auto hi = cfg.hr_resolution;
  const auto depth = 2 * cfg.subvol_len();
  return build_sub_discriminator(Role::kSRD, "sr_d", {2, depth, hi, hi}, depth, hi, 0,
                                 [&cfg](std::int64_t t) { return cfg.channels(t); });
}

std::vector<Shape> infer_shapes(const NetworkGraph& g, const Shape& input) {
  std::vector<Shape> shapes(g.layers.size());
  if (input.size() != g.input_shape.size() || input.empty() || input[0] != g.input_shape[0]) {
    throw ShapeError(std::string(role_name(g.role)) + " expects input like " +
                     shape_str(g.input_shape) + ", got " + shape_str(input));
  }
  shapes[0] = input;
  for (std::size_t i = 1; i < g.layers.size(); ++i) {
    const auto& l = g.layers[i];
    const Shape& in = shapes[static_cast<std::size_t>(l.inputs.at(0))];
    auto fail = [&](const std::string& why) {
      throw ShapeError(g.prefix + "/" + l.name + ": " + why + " (input " + shape_str(in) + ")");
    };
    Shape out;
    switch (l.kind) {
      case LayerKind::kInput:
        fail("unexpected input node");
        break;
      case LayerKind::kDense:
        if (in.size() != 1) fail("dense needs a flat input");
        out = {l.out};
        break;
      case LayerKind::kReshape:
        if (shape_numel(l.shape) != shape_numel(in)) fail("reshape to " + shape_str(l.shape));
        out = l.shape;
        break;
      case LayerKind::kConv:
        if (in.size() != 4) fail("conv needs [C,D,H,W]");
        out = {l.out};
        for (int a = 0; a < 3; ++a) {
          const auto span = in[static_cast<std::size_t>(a + 1)] + 2 * l.pad[a] - l.kernel[a];
          if (span < 0) fail("non-positive convolution output extent");
          out.push_back(span / l.stride[a] + 1);
        }
        break;
      case LayerKind::kInterp:
        if (in.size() < 3) fail("interpolation needs spatial axes");
        out = in;
        for (std::size_t a = in.size() - 3; a < in.size(); ++a) {
          if ((in[a] * l.scale.num) % l.scale.den != 0) fail("non-integral interpolation extent");
          out[a] = in[a] * l.scale.num / l.scale.den;
        }
        break;
      case LayerKind::kGroupNorm:
        if (in.size() < 2 || in[0] % l.groups != 0) fail("channels not divisible into groups");
        out = in;
        break;
      case LayerKind::kBatchNorm:
      case LayerKind::kRelu:
      case LayerKind::kLeakyRelu:
      case LayerKind::kElu:
      case LayerKind::kTanh:
        out = in;
        break;
      case LayerKind::kGlobalAvgPool:
        if (in.size() < 2) fail("pooling needs spatial axes");
        out = {in[0]};
        break;
      case LayerKind::kConcat: {
        out = in;
        for (std::size_t k = 1; k < l.inputs.size(); ++k) {
          const auto& s = shapes[static_cast<std::size_t>(l.inputs[k])];
          if (s.size() != in.size() || !std::equal(s.begin() + 1, s.end(), in.begin() + 1)) {
            fail("concat extent mismatch with " + shape_str(s));
          }
          out[0] += s[0];
        }
        break;
      }
      case LayerKind::kAdd:
        for (std::size_t k = 1; k < l.inputs.size(); ++k) {
          if (shapes[static_cast<std::size_t>(l.inputs[k])] != in) fail("add shape mismatch");
        }
        out = in;
        break;
    }
    shapes[i] = std::move(out);
  }
  return shapes;
}

std::vector<ParamSpec> param_specs(const NetworkGraph& g) {
  const auto shapes = infer_shapes(g, g.input_shape);
  std::vector<ParamSpec> specs;
  for (std::size_t i = 1; i < g.layers.size(); ++i) {
    const auto& l = g.layers[i];
    const auto base = g.prefix + "/" + l.name + "/";
    const Shape& in = shapes[static_cast<std::size_t>(l.inputs.at(0))];
    switch (l.kind) {
      case LayerKind::kConv: {
        const Shape w{l.out, in[0], l.kernel[0], l.kernel[1], l.kernel[2]};
        specs.push_back({base + "weight", w, true});
        if (l.bias) specs.push_back({base + "bias", {l.out}, true});
        if (l.spectral) {
          specs.push_back({base + "sn_u", {l.out}, false});
          specs.push_back({base + "sn_v", {shape_numel(w) / l.out}, false});
        }
        break;
      }
      case LayerKind::kDense:
        specs.push_back({base + "weight", {l.out, in[0]}, true});
        if (l.bias) specs.push_back({base + "bias", {l.out}, true});
        if (l.spectral) {
          specs.push_back({base + "sn_u", {l.out}, false});
          specs.push_back({base + "sn_v", {in[0]}, false});
        }
        break;
      case LayerKind::kGroupNorm:
        specs.push_back({base + "gamma", {in[0]}, true});
        specs.push_back({base + "beta", {in[0]}, true});
        break;
      case LayerKind::kBatchNorm:
        specs.push_back({base + "gamma", {in[0]}, true});
        specs.push_back({base + "beta", {in[0]}, true});
        specs.push_back({base + "running_mean", {in[0]}, false});
        specs.push_back({base + "running_var", {in[0]}, false});
        break;
      default:
        break;
    }
  }
  return specs;
}

std::int64_t parameter_count(const NetworkGraph& g) {
  std::int64_t n = 0;
  for (const auto& p : param_specs(g)) {
    if (p.trainable) n += shape_numel(p.shape);
  }
  return n;
}

std::int64_t parameter_count(const std::vector<const NetworkGraph*>& graphs) {
  std::int64_t n = 0;
  for (const auto* g : graphs) n += parameter_count(*g);
  return n;
}

template <typename T>
Network<T>::Network(NetworkGraph graph, ParamStore<T>& store) : graph_(std::move(graph)), store_(store) {
  for (const auto& p : param_specs(graph_)) {
    if (store_.contains(p.name)) {
      if (store_.at(p.name).shape() != p.shape) {
        throw ShapeError("parameter " + p.name + " has shape " + shape_str(store_.at(p.name).shape()) +
                         ", graph expects " + shape_str(p.shape));
      }
      continue;
    }
    store_.create(p.name, p.shape, p.trainable);
  }
  last_use_.assign(graph_.layers.size(), -1);
  for (std::size_t i = 1; i < graph_.layers.size(); ++i) {
    for (int j : graph_.layers[i].inputs) last_use_[static_cast<std::size_t>(j)] = static_cast<int>(i);
  }
  for (int o : graph_.outputs) last_use_[static_cast<std::size_t>(o)] = std::numeric_limits<int>::max();
}

template <typename T>
void Network<T>::init_params(Rng& rng) {
  const auto shapes = infer_shapes(graph_, graph_.input_shape);
  for (std::size_t i = 1; i < graph_.layers.size(); ++i) {
    const auto& l = graph_.layers[i];
    const auto base = graph_.prefix + "/" + l.name + "/";
    if (l.kind == LayerKind::kConv || l.kind == LayerKind::kDense) {
      auto& w = store_.at(base + "weight");
      const double fan_in = static_cast<double>(w.numel() / w.dim(0));
      const double bound = l.zero_init ? 0.0 : 1.0 / std::sqrt(fan_in);
      for (auto& v : w.values()) v = static_cast<T>(bound * (2.0 * rng.uniform() - 1.0));
      if (l.bias) {
        for (auto& v : store_.at(base + "bias").values()) v = static_cast<T>(bound * (2.0 * rng.uniform() - 1.0));
      }
      if (l.spectral) {
        auto& u = store_.at(base + "sn_u");
        auto& sv = store_.at(base + "sn_v");
        for (auto& v : u.values()) v = static_cast<T>(rng.normal());
        spectral_norm<T>(w.detach(), u.values(), sv.values(), 1, true);
      }
    } else if (l.kind == LayerKind::kGroupNorm || l.kind == LayerKind::kBatchNorm) {
      for (auto& v : store_.at(base + "gamma").values()) v = T(1);
      for (auto& v : store_.at(base + "beta").values()) v = T(0);
      if (l.kind == LayerKind::kBatchNorm) {
        for (auto& v : store_.at(base + "running_mean").values()) v = T(0);
        for (auto& v : store_.at(base + "running_var").values()) v = T(1);
      }
    }
  }
}

template <typename T>
Tensor<T> Network<T>::param(const LayerSpec& layer, const char* field) {
  return store_.at(graph_.prefix + "/" + layer.name + "/" + field);
}

template <typename T>
Tensor<T> Network<T>::conv_weight(const LayerSpec& layer, const ForwardMode& mode) {
  auto w = param(layer, "weight");
  if (!layer.spectral) return w;
  const auto base = graph_.prefix + "/" + layer.name + "/";
  auto res = spectral_norm<T>(w, store_.at(base + "sn_u").values(), store_.at(base + "sn_v").values(), 1,
                              mode.train);
  return res.weight;
}

template <typename T>
std::vector<Tensor<T>> Network<T>::forward_all(const Tensor<T>& x, const ForwardMode& mode) {
  if (x.ndim() < 1) throw ShapeError("network input has no batch axis");
  const Shape sample(x.shape().begin() + 1, x.shape().end());
  infer_shapes(graph_, sample);  // rejects inputs that do not fit the role
  const auto n = x.dim(0);
  std::vector<Tensor<T>> vals(graph_.layers.size());
  vals[0] = x;
  for (std::size_t i = 1; i < graph_.layers.size(); ++i) {
    const auto& l = graph_.layers[i];
    const Tensor<T>& in = vals[static_cast<std::size_t>(l.inputs[0])];
    Tensor<T> out;
    switch (l.kind) {
      case LayerKind::kInput:
        break;
      case LayerKind::kDense:
        out = dense(in, conv_weight(l, mode), l.bias ? param(l, "bias") : Tensor<T>());
        break;
      case LayerKind::kReshape: {
        Shape s{n};
        s.insert(s.end(), l.shape.begin(), l.shape.end());
        out = reshape(in, s);
        break;
      }
      case LayerKind::kConv:
        out = conv3d(in, conv_weight(l, mode), l.bias ? param(l, "bias") : Tensor<T>(), l.stride, l.pad);
        break;
      case LayerKind::kInterp:
        out = trilinear_interp(in, l.scale, kNetworkAlignCorners);
        break;
      case LayerKind::kGroupNorm: {
        GroupNormOptions opt;
        opt.groups = l.groups;
        opt.per_slice = l.per_slice;
        opt.fuse_relu = l.fuse_relu;
        out = group_norm(in, param(l, "gamma"), param(l, "beta"), opt);
        break;
      }
      case LayerKind::kBatchNorm: {
        auto rm = param(l, "running_mean");
        auto rv = param(l, "running_var");
        out = batch_norm(in, param(l, "gamma"), param(l, "beta"), rm, rv, mode.train);
        break;
      }
      case LayerKind::kRelu:
        out = relu(in);
        break;
      case LayerKind::kLeakyRelu:
        out = leaky_relu(in, l.alpha);
        break;
      case LayerKind::kElu:
        out = elu(in);
        break;
      case LayerKind::kTanh:
        out = tanh(in);
        break;
      case LayerKind::kGlobalAvgPool:
        out = global_avg_pool(in);
        break;
      case LayerKind::kConcat: {
        std::vector<Tensor<T>> parts;
        for (int j : l.inputs) parts.push_back(vals[static_cast<std::size_t>(j)]);
        out = concat(parts, 1);
        break;
      }
      case LayerKind::kAdd:
        out = add(in, vals[static_cast<std::size_t>(l.inputs.at(1))]);
        break;
    }
    vals[i] = std::move(out);
    // Drop intermediate handles after their last consumer; without a tape
    // this is what releases activation memory during inference.
    for (int j : l.inputs) {
      if (j > 0 && last_use_[static_cast<std::size_t>(j)] == static_cast<int>(i)) {
        vals[static_cast<std::size_t>(j)] = Tensor<T>();
      }
    }
  }
  std::vector<Tensor<T>> outs;
  for (int o : graph_.outputs) outs.push_back(vals[static_cast<std::size_t>(o)]);
  ++forward_count_;
  return outs;
}

template class Network<float>;
template class Network<double>;

}  // namespace hagan
