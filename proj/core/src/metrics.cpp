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

#include "hagan/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "hagan/errors.hpp"

namespace hagan {
namespace {

constexpr double kEigClamp = -1e-10;

Eigen::MatrixXd covariance(const Eigen::MatrixXd& x, Eigen::VectorXd& mean) {
  mean = x.colwise().mean().transpose();
  const Eigen::MatrixXd c = x.rowwise() - mean.transpose();
  return (c.transpose() * c) / static_cast<double>(x.rows() - 1);
}

// Symmetric PSD square root; tiny negative eigenvalues from rounding are
// clamped, larger ones mean the input was not PSD.
Eigen::MatrixXd sqrt_psd(const Eigen::MatrixXd& m, const char* what) {
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (m + m.transpose()));
  if (es.info() != Eigen::Success) throw NumericError(std::string(what) + ": eigendecomposition failed");
  Eigen::VectorXd ev = es.eigenvalues();
  const double scale = std::max(1.0, ev.cwiseAbs().maxCoeff());
  for (auto& e : ev) {
    if (e < kEigClamp * scale) throw NumericError(std::string(what) + ": matrix is not positive semidefinite");
    e = std::sqrt(std::max(0.0, e));
  }
  return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
}

void check_pair(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, const char* what) {
  if (a.rows() < 2 || b.rows() < 2) throw ConfigError(std::string(what) + " needs at least two samples per set");
  if (a.cols() != b.cols()) throw ShapeError(std::string(what) + ": feature widths differ");
  if (!a.allFinite() || !b.allFinite()) throw NumericError(std::string(what) + ": non-finite features");
}

void check_fingerprints(const FeatureSet& a, const FeatureSet& b) {
  if (a.fingerprint != b.fingerprint) {
    throw ConfigError("feature sets come from different extractors: " + a.fingerprint + " vs " + b.fingerprint);
  }
}

Eigen::MatrixXd sq_dists(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y) {
  const Eigen::VectorXd nx = x.rowwise().squaredNorm();
  const Eigen::VectorXd ny = y.rowwise().squaredNorm();
  Eigen::MatrixXd d = (-2.0 * x * y.transpose()).colwise() + nx;
  d.rowwise() += ny.transpose();
  return d.cwiseMax(0.0);
}

double mmd_from_kernels(const Eigen::MatrixXd& kaa, const Eigen::MatrixXd& kbb, const Eigen::MatrixXd& kab,
                        bool unbiased) {
  const double m = static_cast<double>(kaa.rows());
  const double n = static_cast<double>(kbb.rows());
  if (unbiased) {
    const double saa = (kaa.sum() - kaa.trace()) / (m * (m - 1));
    const double sbb = (kbb.sum() - kbb.trace()) / (n * (n - 1));
    return saa + sbb - 2.0 * kab.mean();
  }
  return kaa.mean() + kbb.mean() - 2.0 * kab.mean();
}

void check_volumes(const Volume& a, const Volume& b, const char* what) {
  if (!a.same_extents(b)) throw ShapeError(std::string(what) + ": volume extents differ");
  if (a.size() == 0) throw ShapeError(std::string(what) + ": empty volume");
}

// Normalised separable Gaussian blur with per-voxel renormalisation of the
// truncated window.
std::vector<double> blur(const std::vector<double>& x, std::int64_t d, std::int64_t h, std::int64_t w,
                         const std::vector<double>& k) {
  const auto r = static_cast<std::int64_t>(k.size() / 2);
  std::vector<double> cur = x, next(x.size());
  const std::int64_t ext[3] = {d, h, w};
  const std::int64_t stride[3] = {h * w, w, 1};
  for (int axis = 0; axis < 3; ++axis) {
    const auto n = ext[axis];
    const auto s = stride[axis];
    for (std::int64_t idx = 0; idx < d * h * w; ++idx) {
      const std::int64_t pos = (idx / s) % n;
      double acc = 0.0, wsum = 0.0;
      for (std::int64_t t = -r; t <= r; ++t) {
        const auto q = pos + t;
        if (q < 0 || q >= n) continue;
        const double kw = k[static_cast<std::size_t>(t + r)];
        acc += kw * cur[static_cast<std::size_t>(idx + t * s)];
        wsum += kw;
      }
      next[static_cast<std::size_t>(idx)] = acc / wsum;
    }
    std::swap(cur, next);
  }
  return cur;
}

}  // namespace

double frechet_distance(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  check_pair(a, b, "frechet_distance");
  Eigen::VectorXd ma, mb;
  const auto sa = covariance(a, ma);
  const auto sb = covariance(b, mb);
  const auto ra = sqrt_psd(sa, "frechet_distance");
  const auto cross = sqrt_psd(ra * sb * ra, "frechet_distance");
  const double d = (ma - mb).squaredNorm() + sa.trace() + sb.trace() - 2.0 * cross.trace();
  return std::max(0.0, d);
}

double frechet_distance(const FeatureSet& a, const FeatureSet& b) {
  check_fingerprints(a, b);
  return frechet_distance(a.features, b.features);
}

double median_distance(const Eigen::MatrixXd& x) {
  const auto d = sq_dists(x, x);
  std::vector<double> v;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    for (Eigen::Index j = i + 1; j < x.rows(); ++j) v.push_back(std::sqrt(d(i, j)));
  }
  if (v.empty()) throw ConfigError("median_distance needs at least two rows");
  const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
  std::nth_element(v.begin(), mid, v.end());
  if (v.size() % 2 == 1) return *mid;
  const double hi = *mid;
  const double lo = *std::max_element(v.begin(), mid);
  return 0.5 * (lo + hi);
}

double mmd_rbf(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, const MmdOptions& opt) {
  check_pair(a, b, "mmd_rbf");
  double h = opt.bandwidth;
  if (h <= 0) {
    Eigen::MatrixXd pooled(a.rows() + b.rows(), a.cols());
    pooled << a, b;
    h = median_distance(pooled);
    if (h <= 0) h = 1.0;  // all points coincide; any kernel gives zero
  }
  const double g = -1.0 / (2.0 * h * h);
  const Eigen::MatrixXd kaa = (sq_dists(a, a) * g).array().exp();
  const Eigen::MatrixXd kbb = (sq_dists(b, b) * g).array().exp();
  const Eigen::MatrixXd kab = (sq_dists(a, b) * g).array().exp();
  return mmd_from_kernels(kaa, kbb, kab, opt.unbiased);
}

double mmd_rbf(const FeatureSet& a, const FeatureSet& b, const MmdOptions& opt) {
  check_fingerprints(a, b);
  return mmd_rbf(a.features, b.features, opt);
}

double mmd_permutation_test(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, int permutations, Rng& rng,
                            const MmdOptions& opt) {
  check_pair(a, b, "mmd_permutation_test");
  if (permutations < 1) throw ConfigError("mmd_permutation_test needs at least one permutation");
  Eigen::MatrixXd pooled(a.rows() + b.rows(), a.cols());
  pooled << a, b;
  MmdOptions o = opt;
  if (o.bandwidth <= 0) {
    o.bandwidth = median_distance(pooled);
    if (o.bandwidth <= 0) o.bandwidth = 1.0;
  }
  const double g = -1.0 / (2.0 * o.bandwidth * o.bandwidth);
  const Eigen::MatrixXd k = (sq_dists(pooled, pooled) * g).array().exp();
  const auto m = a.rows();
  const auto n = pooled.rows();
  auto stat = [&](const std::vector<Eigen::Index>& idx) {
    double saa = 0, sbb = 0, sab = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < n; ++j) {
        const double v = k(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]);
        const bool ia = i < m, ja = j < m;
        if (ia && ja) {
          if (i != j || !o.unbiased) saa += v;
        } else if (!ia && !ja) {
          if (i != j || !o.unbiased) sbb += v;
        } else if (ia) {
          sab += v;
        }
      }
    }
    const double mm = static_cast<double>(m), nn = static_cast<double>(n - m);
    if (o.unbiased) return saa / (mm * (mm - 1)) + sbb / (nn * (nn - 1)) - 2.0 * sab / (mm * nn);
    return saa / (mm * mm) + sbb / (nn * nn) - 2.0 * sab / (mm * nn);
  };
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), 0);
  const double observed = stat(idx);
  int extreme = 0;
  for (int p = 0; p < permutations; ++p) {
    std::shuffle(idx.begin(), idx.end(), rng.engine());
    if (stat(idx) >= observed) ++extreme;
  }
  return (1.0 + extreme) / (1.0 + permutations);
}

double ssim(const Volume& a, const Volume& b, double dynamic_range, double sigma) {
  check_volumes(a, b, "ssim");
  const int radius = 5;
  std::vector<double> k(2 * radius + 1);
  for (int t = -radius; t <= radius; ++t) k[static_cast<std::size_t>(t + radius)] = std::exp(-t * t / (2 * sigma * sigma));
  const auto n = static_cast<std::size_t>(a.size());
  std::vector<double> xa(n), xb(n), aa(n), bb(n), ab(n);
  for (std::size_t i = 0; i < n; ++i) {
    xa[i] = a.data[i];
    xb[i] = b.data[i];
    aa[i] = xa[i] * xa[i];
    bb[i] = xb[i] * xb[i];
    ab[i] = xa[i] * xb[i];
  }
  const auto ma = blur(xa, a.d, a.h, a.w, k);
  const auto mb = blur(xb, a.d, a.h, a.w, k);
  const auto maa = blur(aa, a.d, a.h, a.w, k);
  const auto mbb = blur(bb, a.d, a.h, a.w, k);
  const auto mab = blur(ab, a.d, a.h, a.w, k);
  const double c1 = std::pow(0.01 * dynamic_range, 2);
  const double c2 = std::pow(0.03 * dynamic_range, 2);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double va = maa[i] - ma[i] * ma[i];
    const double vb = mbb[i] - mb[i] * mb[i];
    const double cov = mab[i] - ma[i] * mb[i];
    total += ((2 * ma[i] * mb[i] + c1) * (2 * cov + c2)) / ((ma[i] * ma[i] + mb[i] * mb[i] + c1) * (va + vb + c2));
  }
  return total / static_cast<double>(n);
}

double psnr(const Volume& a, const Volume& b, double max_value) {
  check_volumes(a, b, "psnr");
  double se = 0.0;
  for (std::size_t i = 0; i < a.data.size(); ++i) {
    const double d = static_cast<double>(a.data[i]) - b.data[i];
    se += d * d;
  }
  const double mse = se / static_cast<double>(a.size());
  if (mse == 0.0) return kPsnrCap;
  return std::min(kPsnrCap, 10.0 * std::log10(max_value * max_value / mse));
}

double nmse(const Volume& reference, const Volume& x) {
  check_volumes(reference, x, "nmse");
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < reference.data.size(); ++i) {
    const double r = reference.data[i];
    const double d = r - x.data[i];
    num += d * d;
    den += r * r;
  }
  if (den == 0.0) throw NumericError("nmse: reference has zero energy");
  return num / den;
}

double dice(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b) {
  if (a.size() != b.size()) throw ShapeError("dice: mask sizes differ");
  std::int64_t na = 0, nb = 0, both = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const bool x = a[i] != 0, y = b[i] != 0;
    na += x;
    nb += y;
    both += x && y;
  }
  if (na + nb == 0) return 1.0;
  return 2.0 * static_cast<double>(both) / static_cast<double>(na + nb);
}

double kolmogorov_q(double lambda) {
  if (lambda < 1e-3) return 1.0;
  double sum = 0.0;
  for (int j = 1; j <= 200; ++j) {
    const double term = std::exp(-2.0 * j * j * lambda * lambda);
    sum += (j % 2 == 1 ? 2.0 : -2.0) * term;
    if (term < 1e-16) break;
  }
  return std::clamp(sum, 0.0, 1.0);
}

KsResult ks_test(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw ConfigError("ks_test needs two non-empty samples");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  const double ne = na * nb / (na + nb);
  const double sq = std::sqrt(ne);
  return {d, kolmogorov_q((sq + 0.12 + 0.11 / sq) * d)};
}

double hu_to_unit(double hu, double lo, double hi) {
  if (!(hi > lo)) throw ConfigError("HU window must have hi > lo");
  const double c = std::clamp(hu, lo, hi);
  return 2.0 * (c - lo) / (hi - lo) - 1.0;
}

double unit_to_hu(double u, double lo, double hi) {
  if (!(hi > lo)) throw ConfigError("HU window must have hi > lo");
  return lo + (std::clamp(u, -1.0, 1.0) + 1.0) * 0.5 * (hi - lo);
}

Volume hu_window_map(std::int64_t d, std::int64_t h, std::int64_t w, std::span<const float> hu, double lo,
                     double hi) {
  auto v = Volume::filled(d, h, w);
  if (static_cast<std::int64_t>(hu.size()) != v.size()) throw ShapeError("hu_window_map: payload does not match extents");
  for (std::size_t i = 0; i < hu.size(); ++i) v.data[i] = static_cast<float>(hu_to_unit(hu[i], lo, hi));
  return v;
}

Eigen::MatrixXd pca2(const Eigen::MatrixXd& x) {
  if (x.rows() < 2 || x.cols() < 2) throw ShapeError("pca2 needs at least two rows and two columns");
  const Eigen::MatrixXd c = x.rowwise() - x.colwise().mean();
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(c.transpose() * c);
  const auto k = es.eigenvectors().cols();
  Eigen::MatrixXd axes(x.cols(), 2);
  axes << es.eigenvectors().col(k - 1), es.eigenvectors().col(k - 2);
  return c * axes;
}

}  // namespace hagan
