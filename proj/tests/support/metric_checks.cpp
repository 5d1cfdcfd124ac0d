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

#include <cmath>

#include <Eigen/Eigenvalues>

#include "hagan/metrics.hpp"
#include "testkit.hpp"

namespace hagan::testkit {

bool ValueCheck::ok() const {
  if (!std::isfinite(value)) return false;
  if (tolerance < 0) return value < expected;
  return std::abs(value - expected) <= tolerance;
}

namespace {

Eigen::MatrixXd gaussian(Rng& rng, int n, const Eigen::VectorXd& mu, const Eigen::MatrixXd& chol) {
  Eigen::MatrixXd x(n, mu.size());
  for (int i = 0; i < n; ++i) {
    Eigen::VectorXd e(mu.size());
    for (Eigen::Index j = 0; j < mu.size(); ++j) e(j) = rng.normal();
    x.row(i) = (mu + chol * e).transpose();
  }
  return x;
}

// |mu_a - mu_b|² + tr(S_a) + tr(S_b) - 2 sum sqrt(eig(S_a S_b)) from the
// sample moments, via the general (non-symmetric) eigen solver.
double frechet_oracle(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  auto moments = [](const Eigen::MatrixXd& x, Eigen::VectorXd& mu) {
    mu = x.colwise().mean().transpose();
    const Eigen::MatrixXd c = x.rowwise() - mu.transpose();
    return Eigen::MatrixXd((c.transpose() * c) / static_cast<double>(x.rows() - 1));
  };
  Eigen::VectorXd ma, mb;
  const auto sa = moments(a, ma), sb = moments(b, mb);
  const Eigen::EigenSolver<Eigen::MatrixXd> es(sa * sb);
  double tr_sqrt = 0;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) tr_sqrt += std::sqrt(std::max(0.0, es.eigenvalues()(i).real()));
  return (ma - mb).squaredNorm() + sa.trace() + sb.trace() - 2 * tr_sqrt;
}

Volume volume_of(std::vector<float> v) {
  Volume out;
  out.d = 1;
  out.h = 1;
  out.w = static_cast<std::int64_t>(v.size());
  out.data = std::move(v);
  return out;
}

}  // namespace

std::vector<ValueCheck> metric_oracle_checks(std::uint64_t seed) {
  Rng rng(seed);
  std::vector<ValueCheck> out;
  auto add = [&](std::string what, double value, double expected, double tol) {
    out.push_back({std::move(what), value, expected, tol});
  };

  // Fréchet distance against the oracle on correlated Gaussians.
  const int f = 5;
  Eigen::MatrixXd la = Eigen::MatrixXd::Zero(f, f), lb = Eigen::MatrixXd::Zero(f, f);
  for (int i = 0; i < f; ++i)
    for (int j = 0; j <= i; ++j) {
      la(i, j) = (i == j ? 1.0 : 0.3) * (1 + 0.5 * rng.uniform());
      lb(i, j) = (i == j ? 0.7 : -0.2) * (1 + 0.5 * rng.uniform());
    }
  const Eigen::VectorXd mu_a = Eigen::VectorXd::Zero(f);
  const Eigen::VectorXd mu_b = Eigen::VectorXd::LinSpaced(f, -1, 1);
  const auto a = gaussian(rng, 400, mu_a, la), b = gaussian(rng, 300, mu_b, lb);
  const double oracle = frechet_oracle(a, b);
  add("frechet vs eigen-solver oracle (correlated Gaussians)", frechet_distance(a, b), oracle, 1e-6 * std::max(1.0, oracle));
  add("frechet symmetric", frechet_distance(b, a), frechet_distance(a, b), 1e-9);
  add("frechet identical sets", frechet_distance(a, a), 0.0, 1e-8);

  // Closed forms from exact moments: 1-D N(0,1) vs N(1,1) and diag 4I vs I.
  Eigen::MatrixXd u(2000, 1), v(2000, 1);
  for (int i = 0; i < 2000; ++i) {
    u(i, 0) = rng.normal();
    v(i, 0) = 1 + rng.normal();
  }
  add("frechet N(0,1) vs N(1,1) -> 1", frechet_distance(u, v), 1.0, 0.15);
  Eigen::MatrixXd p(2000, 3), q(2000, 3);
  for (int i = 0; i < 2000; ++i)
    for (int j = 0; j < 3; ++j) {
      p(i, j) = 2 * rng.normal();
      q(i, j) = rng.normal();
    }
  add("frechet 4I vs I, F=3 -> 3", frechet_distance(p, q), 3.0, 0.3);
  add("frechet 4I vs I matches oracle", frechet_distance(p, q), frechet_oracle(p, q), 1e-6 * 3);

  // MMD.
  MmdOptions biased;
  biased.unbiased = false;
  biased.bandwidth = 1.0;
  add("mmd biased, identical samples", mmd_rbf(a, a, biased), 0.0, 1e-12);
  Eigen::MatrixXd near = Eigen::MatrixXd::Zero(50, 2), far = Eigen::MatrixXd::Constant(50, 2, 100.0);
  MmdOptions unit;
  unit.bandwidth = 1.0;
  add("mmd separated point masses -> 2", mmd_rbf(near, far, unit), 2.0, 1e-9);
  const int n = 500;
  Eigen::MatrixXd s1(n, 4), s2(n, 4);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < 4; ++j) {
      s1(i, j) = rng.normal();
      s2(i, j) = rng.normal();
    }
  add("|mmd unbiased| same distribution N=500 < 3/sqrt(N)", std::abs(mmd_rbf(s1, s2)), 3 / std::sqrt(double(n)), -1);

  // SSIM / PSNR / NMSE.
  std::vector<float> ramp(64);
  for (int i = 0; i < 64; ++i) ramp[static_cast<std::size_t>(i)] = std::sin(0.3f * i) * 0.8f;
  const auto va = volume_of(ramp);
  auto shifted = ramp;
  for (auto& x : shifted) x += 0.2f;
  add("ssim(a, a) = 1", ssim(va, va), 1.0, 0.0);
  add("nmse(a, a) = 0", nmse(va, va), 0.0, 0.0);
  add("psnr(a, a) = cap", psnr(va, va), kPsnrCap, 0.0);
  add("psnr(a, a + 0.2) = 20 dB", psnr(va, volume_of(shifted)), 20.0, 1e-5);
  // Two voxels under an effectively flat window: both local means are zero,
  // the luminance term is c1/c1 = 1 and the structure term is
  // (c2 - 2 s²)/(c2 + 2 s²) with s² = 0.25. A sigma-1.5 window would weight
  // the voxels unequally, give nonzero local means of opposite sign, and flip
  // the luminance term negative as well.
  const double c2 = 0.06 * 0.06;
  const double flat = ssim(volume_of({0.5f, -0.5f}), volume_of({-0.5f, 0.5f}), 2.0, 1e6);
  add("ssim(a, -a) on two zero-mean voxels, closed form", flat, (c2 - 0.5) / (c2 + 0.5), 1e-9);
  add("ssim(a, -a) < 0", flat, 0.0, -1);
  const auto ones = volume_of(std::vector<float>(8, 1.0f)), halves = volume_of(std::vector<float>(8, 0.5f));
  add("nmse(1, 0.5) = 0.25", nmse(ones, halves), 0.25, 1e-12);

  // Dice.
  const std::vector<std::uint8_t> m1{1, 1, 1, 1, 0, 0, 0, 0}, m2{0, 0, 1, 1, 1, 1, 0, 0}, m3{0, 0, 0, 0, 1, 1, 1, 1};
  add("dice identical", dice(m1, m1), 1.0, 0.0);
  add("dice disjoint", dice(m1, m3), 0.0, 0.0);
  add("dice half overlap", dice(m1, m2), 0.5, 0.0);

  // KS.
  std::vector<double> k1(3000), k2(3000);
  for (auto& x : k1) x = rng.uniform();
  for (auto& x : k2) x = 0.5 + rng.uniform();
  const auto same = ks_test(k1, k1);
  add("ks identical statistic", same.statistic, 0.0, 0.0);
  add("ks identical p", same.p_value, 1.0, 1e-9);
  add("ks U(0,1) vs U(0.5,1.5) -> 0.5", ks_test(k1, k2).statistic, 0.5, 0.04);

  // HU window.
  add("HU -1024 -> -1", hu_to_unit(-1024), -1.0, 0.0);
  add("HU 600 -> 1", hu_to_unit(600), 1.0, 0.0);
  add("HU -212 -> 0", hu_to_unit(-212), 0.0, 1e-15);
  add("HU round trip", unit_to_hu(hu_to_unit(-300.5)), -300.5, 1e-12);
  return out;
}

}  // namespace hagan::testkit
