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

#include <iomanip>
#include <sstream>

#include "hagan/networks.hpp"

namespace hagan {

std::string_view role_name(Role role) {
  switch (role) {
    case Role::kGA: return "G_A";
    case Role::kGL: return "G_L";
    case Role::kGH: return "G_H";
    case Role::kDL: return "D_L";
    case Role::kDH: return "D_H";
    case Role::kEH: return "E_H";
    case Role::kEG: return "E_G";
    case Role::kSRG: return "SR_G";
    case Role::kSRD: return "SR_D";
    case Role::kCLS: return "CLS";
  }
  return "?";
}

std::string_view layer_kind_name(LayerKind kind) {
  switch (kind) {
    case LayerKind::kInput: return "Input";
    case LayerKind::kDense: return "Dense";
    case LayerKind::kReshape: return "Reshape";
    case LayerKind::kConv: return "Conv3D";
    case LayerKind::kInterp: return "Interpolation";
    case LayerKind::kGroupNorm: return "GroupNorm";
    case LayerKind::kBatchNorm: return "BatchNorm";
    case LayerKind::kRelu: return "ReLU";
    case LayerKind::kLeakyRelu: return "LeakyReLU";
    case LayerKind::kElu: return "ELU";
    case LayerKind::kTanh: return "Tanh";
    case LayerKind::kGlobalAvgPool: return "AvgPool";
    case LayerKind::kConcat: return "Concat";
    case LayerKind::kAdd: return "Add";
  }
  return "?";
}

std::string summary(const NetworkGraph& graph, const Shape& input) {
  const auto shapes = infer_shapes(graph, input);
  std::ostringstream os;
  os << role_name(graph.role) << " (" << graph.prefix << "), " << parameter_count(graph)
     << " parameters\n";
  os << std::left << std::setw(24) << "Layer" << std::setw(20) << "Filter size, stride"
     << "Output size (C,D,H,W)\n";
  for (std::size_t i = 0; i < graph.layers.size(); ++i) {
    const auto& l = graph.layers[i];
    std::string kind(layer_kind_name(l.kind));
    if (l.kind == LayerKind::kGroupNorm && l.fuse_relu) kind += "+ReLU";
    if ((l.kind == LayerKind::kConv || l.kind == LayerKind::kDense) && l.spectral) kind += "+SN";
    std::string filt = "-";
    if (l.kind == LayerKind::kConv) {
      std::ostringstream f;
      f << l.kernel[0] << "x" << l.kernel[1] << "x" << l.kernel[2] << ", " << l.stride[0];
      filt = f.str();
    }
    os << std::setw(24) << kind << std::setw(20) << filt << shape_str(shapes[i]) << "\n";
  }
  return os.str();
}

}  // namespace hagan
