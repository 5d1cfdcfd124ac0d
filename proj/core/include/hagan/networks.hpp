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

#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "hagan/ops.hpp"
#include "hagan/param_store.hpp"
#include "hagan/rng.hpp"

namespace hagan {

// Depth margin, in A-slices, outside of which windowed and full-volume G^H
// outputs agree exactly (two 3^3 convs across two x2 interpolations).
inline constexpr std::int64_t kConsistencyMargin = 2;

struct NetConfig {
  std::int64_t full_resolution = 64;
  std::int64_t low_resolution = 16;
  std::int64_t latent_dim = 64;
  std::int64_t base_channels = 8;
  Ratio subvol_multiplier{1, 8};
  std::int64_t num_classes = 0;  // 0: unconditional
  std::int64_t feature_channels = 8;

  static NetConfig reference();
  static NetConfig desk();

  // Throws ConfigError with the offending field.
  void validate() const;

  // Table channel count scaled by base_channels / 64, at least 1.
  std::int64_t channels(std::int64_t table) const;
  // High-resolution slices per training sub-volume.
  std::int64_t subvol_depth() const;
  // The same window in A (low-resolution) slices.
  std::int64_t subvol_depth_low() const;
  // Number of partition windows covering the full depth.
  std::int64_t partitions() const;
  bool conditional() const { return num_classes > 0; }
};

enum class Role { kGA, kGL, kGH, kDL, kDH, kEH, kEG, kSRG, kSRD, kCLS };
std::string_view role_name(Role role);

enum class LayerKind {
  kInput,
  kDense,
  kReshape,
  kConv,
  kInterp,
  kGroupNorm,
  kBatchNorm,
  kRelu,
  kLeakyRelu,
  kElu,
  kTanh,
  kGlobalAvgPool,
  kConcat,
  kAdd,
};
std::string_view layer_kind_name(LayerKind kind);

struct LayerSpec {
  LayerKind kind = LayerKind::kInput;
  std::string name;
  std::vector<int> inputs;  // node indices; empty means the previous node
  std::int64_t out = 0;     // conv output channels / dense output features
  Int3 kernel{1, 1, 1};
  Int3 stride{1, 1, 1};
  Int3 pad{0, 0, 0};
  bool bias = true;
  bool spectral = false;
  bool zero_init = false;
  Shape shape;  // reshape target, per sample
  Ratio scale{1, 1};
  std::int64_t groups = 1;
  bool per_slice = false;
  bool fuse_relu = false;
  double alpha = 0.2;
};

// Layer DAG of one network. Node 0 is the input; shapes exclude the batch axis.
struct NetworkGraph {
  Role role = Role::kGA;
  std::string prefix;
  Shape input_shape;  // nominal per-sample input
  std::vector<LayerSpec> layers;
  std::vector<int> outputs;
};

struct ParamSpec {
  std::string name;
  Shape shape;
  bool trainable = true;
};

// Per-node output shapes (per sample) for the given input; throws ShapeError
// when the input does not fit the graph.
std::vector<Shape> infer_shapes(const NetworkGraph& graph, const Shape& input);
std::vector<ParamSpec> param_specs(const NetworkGraph& graph);
// Trainable scalars.
std::int64_t parameter_count(const NetworkGraph& graph);
std::int64_t parameter_count(const std::vector<const NetworkGraph*>& graphs);

// Layer table with filter size, stride and output size per row.
std::string summary(const NetworkGraph& graph, const Shape& input);

NetworkGraph build_g_a(const NetConfig& cfg);
NetworkGraph build_g_l(const NetConfig& cfg);
NetworkGraph build_g_h(const NetConfig& cfg);
NetworkGraph build_d_l(const NetConfig& cfg);
NetworkGraph build_d_h(const NetConfig& cfg);
NetworkGraph build_e_h(const NetConfig& cfg);
NetworkGraph build_e_g(const NetConfig& cfg);
// 3D CNN classifier; table widths are kept as-is, input 1 x res^3.
NetworkGraph build_classifier(std::int64_t resolution, std::int64_t num_classes = 5);

struct HaganGraphs {
  NetworkGraph g_a, g_l, g_h, d_l, d_h, e_h, e_g;
  std::vector<const NetworkGraph*> all() const {
    return {&g_a, &g_l, &g_h, &d_l, &d_h, &e_h, &e_g};
  }
};
HaganGraphs build_hagan(const NetConfig& cfg);

struct SRConfig {
  std::int64_t hr_resolution = 64;
  std::int64_t sr_factor = 2;
  double noise_sigma = 0.05;
  Ratio subvol_multiplier{1, 8};
  double lambda = 1.0;
  double lr_g = 1e-4;
  double lr_d = 4e-4;
  std::int64_t base_channels = 8;

  void validate() const;
  std::int64_t lr_resolution() const { return hr_resolution / sr_factor; }
  // Training window length on the LR grid.
  std::int64_t subvol_len() const;
  std::int64_t channels(std::int64_t table) const;
};

// LR sub-volume -> HR sub-volume; output = up(x) + residual(x).
NetworkGraph build_sr_generator(const SRConfig& cfg);
// Scores an HR candidate channel-stacked with the upsampled LR input.
NetworkGraph build_sr_discriminator(const SRConfig& cfg);

struct ForwardMode {
  // Spectral-norm power iteration updates and batch-norm batch statistics.
  bool train = false;
};

// Executes a graph against parameters held in a ParamStore.
template <typename T>
class Network {
 public:
  // Creates any missing parameters of the graph in `store`.
  Network(NetworkGraph graph, ParamStore<T>& store);

  // Uniform(+-1/sqrt(fan_in)) weights and biases, unit norm gains, and
  // initialised spectral-norm vectors. Zero-init layers stay zero.
  void init_params(Rng& rng);

  // x is [N, ...input_shape]; returns one tensor per graph output.
  std::vector<Tensor<T>> forward_all(const Tensor<T>& x, const ForwardMode& mode = {});
  Tensor<T> forward(const Tensor<T>& x, const ForwardMode& mode = {}) {
    return forward_all(x, mode).front();
  }

  const NetworkGraph& graph() const { return graph_; }
  const std::string& prefix() const { return graph_.prefix; }
  // Completed forward passes since construction.
  std::int64_t forward_count() const { return forward_count_; }

 private:
  Tensor<T> conv_weight(const LayerSpec& layer, const ForwardMode& mode);
  Tensor<T> param(const LayerSpec& layer, const char* field);

  NetworkGraph graph_;
  ParamStore<T>& store_;
  std::vector<int> last_use_;
  std::int64_t forward_count_ = 0;
};

extern template class Network<float>;
extern template class Network<double>;

}  // namespace hagan
