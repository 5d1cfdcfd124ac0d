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

#include "testkit.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "hagan/tape.hpp"

namespace hagan::testkit {

Tensor<double> randn(const Shape& shape, Rng& rng, double sigma) {
  auto t = Tensor<double>::zeros(shape);
  for (auto& v : t.values()) v = sigma * rng.normal();
  return t;
}

Tensor<double> rand_away_from_zero(const Shape& shape, Rng& rng, double lo, double hi, double gap) {
  auto t = Tensor<double>::zeros(shape);
  for (auto& v : t.values()) {
    do {
      v = lo + (hi - lo) * rng.uniform();
    } while (std::abs(v) < gap);
  }
  return t;
}

GradCheck grad_check(const std::function<Tensor<double>(const std::vector<Tensor<double>>&)>& loss,
                     std::vector<Tensor<double>> inputs, double h, std::int64_t max_elements, double floor) {
  for (auto& x : inputs) {
    x.set_requires_grad(true);
    x.clear_grad();
  }
  {
    GradientTape<double> tape;
    Tensor<double> l;
    {
      auto rec = tape.record();
      l = loss(inputs);
    }
    tape.backward(l);
  }
  GradCheck out;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    auto& x = inputs[i];
    if (!x.has_grad()) throw std::runtime_error("input " + std::to_string(i) + " received no gradient");
    const std::vector<double> analytic(x.grad().begin(), x.grad().end());
    const auto n = x.numel();
    const auto stride = std::max<std::int64_t>(1, n / max_elements);
    auto vals = x.values();
    for (std::int64_t j = 0; j < n; j += stride) {
      const double keep = vals[j];
      vals[j] = keep + h;
      const double up = loss(inputs).item();
      vals[j] = keep - h;
      const double down = loss(inputs).item();
      vals[j] = keep;
      const double numeric = (up - down) / (2 * h);
      const double a = analytic[static_cast<std::size_t>(j)];
      const double err = std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), floor});
      ++out.checked;
      if (err > out.max_rel_error) {
        out.max_rel_error = err;
        char buf[160];
        std::snprintf(buf, sizeof buf, "input %zu, element %lld: analytic %.10g vs numeric %.10g", i,
                      static_cast<long long>(j), a, numeric);
        out.worst = buf;
      }
    }
  }
  for (auto& x : inputs) {
    x.clear_grad();
    x.set_requires_grad(false);
  }
  return out;
}

Tensor<double> conv3d_oracle(const Tensor<double>& x, const Tensor<double>& w, const Tensor<double>& b, Int3 stride,
                             Int3 pad) {
  const auto n = x.dim(0), ci = x.dim(1), co = w.dim(0);
  const Int3 in{x.dim(2), x.dim(3), x.dim(4)};
  const Int3 k{w.dim(2), w.dim(3), w.dim(4)};
  Int3 out;
  for (int a = 0; a < 3; ++a) out[a] = (in[a] + 2 * pad[a] - k[a]) / stride[a] + 1;
  auto y = Tensor<double>::zeros({n, co, out[0], out[1], out[2]});
  auto X = [&](std::int64_t b_, std::int64_t c, std::int64_t z, std::int64_t yy, std::int64_t xx) {
    if (z < 0 || yy < 0 || xx < 0 || z >= in[0] || yy >= in[1] || xx >= in[2]) return 0.0;
    return x.values()[static_cast<std::size_t>((((b_ * ci + c) * in[0] + z) * in[1] + yy) * in[2] + xx)];
  };
  auto W = [&](std::int64_t o, std::int64_t c, std::int64_t a, std::int64_t bb, std::int64_t cc) {
    return w.values()[static_cast<std::size_t>((((o * ci + c) * k[0] + a) * k[1] + bb) * k[2] + cc)];
  };
  auto out_v = y.values();
  std::size_t idx = 0;
  for (std::int64_t b_ = 0; b_ < n; ++b_)
    for (std::int64_t o = 0; o < co; ++o)
      for (std::int64_t z = 0; z < out[0]; ++z)
        for (std::int64_t yy = 0; yy < out[1]; ++yy)
          for (std::int64_t xx = 0; xx < out[2]; ++xx) {
            double s = b.defined() ? b.values()[static_cast<std::size_t>(o)] : 0.0;
            for (std::int64_t c = 0; c < ci; ++c)
              for (std::int64_t a = 0; a < k[0]; ++a)
                for (std::int64_t bb = 0; bb < k[1]; ++bb)
                  for (std::int64_t cc = 0; cc < k[2]; ++cc)
                    s += W(o, c, a, bb, cc) *
                         X(b_, c, z * stride[0] - pad[0] + a, yy * stride[1] - pad[1] + bb, xx * stride[2] - pad[2] + cc);
            out_v[idx++] = s;
          }
  return y;
}

template <typename T>
static double max_diff(std::span<const T> a, std::span<const T> b) {
  if (a.size() != b.size()) throw std::runtime_error("size mismatch");
  double m = 0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(static_cast<double>(a[i]) - b[i]));
  return m;
}

double max_abs_diff(std::span<const double> a, std::span<const double> b) { return max_diff(a, b); }
double max_abs_diff(std::span<const float> a, std::span<const float> b) { return max_diff(a, b); }

}  // namespace hagan::testkit
