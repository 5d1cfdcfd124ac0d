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

#include "hagan/latent.hpp"

#include <cmath>

#include "hagan/errors.hpp"

namespace hagan {

Eigen::VectorXd RidgeModel::predict(const Eigen::MatrixXd& x) const {
  if (x.cols() != coef.size()) throw ShapeError("ridge_predict: feature width mismatch");
  return (x * coef).array() + intercept;
}

RidgeModel ridge_fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double lambda, bool intercept) {
  if (x.rows() == 0 || x.rows() != y.size()) throw ShapeError("ridge_fit: need one target per row");
  if (lambda < 0) throw ConfigError("ridge_fit: lambda must be nonnegative");
  RidgeModel m;
  m.lambda = lambda;
  Eigen::RowVectorXd x_mean = Eigen::RowVectorXd::Zero(x.cols());
  double y_mean = 0.0;
  if (intercept) {
    x_mean = x.colwise().mean();
    y_mean = y.mean();
  }
  const Eigen::MatrixXd xc = x.rowwise() - x_mean;
  const Eigen::VectorXd yc = y.array() - y_mean;
  Eigen::MatrixXd gram = xc.transpose() * xc;
  gram.diagonal().array() += lambda;
  const Eigen::LDLT<Eigen::MatrixXd> ldlt(gram);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) throw NumericError("ridge_fit: normal equations not positive definite");
  m.coef = ldlt.solve(xc.transpose() * yc);
  if (!m.coef.allFinite()) throw NumericError("ridge_fit: singular system");
  m.intercept = y_mean - x_mean.dot(m.coef);
  return m;
}

double r_squared(const Eigen::VectorXd& y, const Eigen::VectorXd& predicted) {
  if (y.size() == 0 || y.size() != predicted.size()) throw ShapeError("r_squared: size mismatch");
  const double ss_tot = (y.array() - y.mean()).square().sum();
  if (ss_tot == 0.0) throw NumericError("r_squared: constant target");
  return 1.0 - (y - predicted).squaredNorm() / ss_tot;
}

double LatentDirection::step_to(const Eigen::VectorXd& z, double target) const {
  // predict(z + t w) = predict(z) + t |coef|.
  return (target - predict(z)) / coef.norm();
}

LatentDirection fit_direction(const Eigen::MatrixXd& latents, const Eigen::VectorXd& targets,
                              const std::string& target_name, double lambda) {
  if (latents.rows() != targets.size() || latents.rows() == 0) throw ShapeError("fit_direction: need one target per latent");
  LatentDirection d;
  d.target_name = target_name;
  if (lambda > 0) {
    const auto m = ridge_fit(latents, targets, lambda, true);
    d.coef = m.coef;
    d.bias = m.intercept;
  } else {
    Eigen::MatrixXd design(latents.rows(), latents.cols() + 1);
    design << latents, Eigen::VectorXd::Ones(latents.rows());
    const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
    if (qr.rank() < design.cols()) {
      throw NumericError("fit_direction: rank-deficient design (" + std::to_string(latents.rows()) + " samples for " +
                         std::to_string(latents.cols()) + " latent dimensions); use ridge regularisation");
    }
    const Eigen::VectorXd sol = qr.solve(targets);
    d.coef = sol.head(latents.cols());
    d.bias = sol(latents.cols());
  }
  const double norm = d.coef.norm();
  if (!(norm > 0) || !std::isfinite(norm)) throw NumericError("fit_direction: zero coefficient vector");
  d.w = d.coef / norm;
  d.r2 = r_squared(targets, (latents * d.coef).array() + d.bias);
  return d;
}

}  // namespace hagan
