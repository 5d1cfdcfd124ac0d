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

#include <string>

#include <Eigen/Dense>

namespace hagan {

struct RidgeModel {
  Eigen::VectorXd coef;
  double intercept = 0.0;
  double lambda = 0.0;

  Eigen::VectorXd predict(const Eigen::MatrixXd& x) const;
};

// argmin ||y - Xb - c||² + lambda ||b||², solved from the normal equations by
// Cholesky (no explicit inverse). With an intercept the data are centred first
// and the intercept is not penalised.
RidgeModel ridge_fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double lambda = 1e-4,
                     bool intercept = true);

// 1 - SS_res / SS_tot; ShapeError for empty or mismatched inputs, NumericError
// for a constant target.
double r_squared(const Eigen::VectorXd& y, const Eigen::VectorXd& predicted);

// Linear predictor of a scalar target over latent codes and the unit
// direction along which it increases.
struct LatentDirection {
  Eigen::VectorXd coef;  // regression coefficients
  Eigen::VectorXd w;     // coef / |coef|
  double bias = 0.0;
  double r2 = 0.0;       // on the fitting data
  std::string target_name;

  double predict(const Eigen::VectorXd& z) const { return coef.dot(z) + bias; }
  // Step t with predict(z + t w) = target.
  double step_to(const Eigen::VectorXd& z, double target) const;
  // z + t w.
  Eigen::VectorXd move(const Eigen::VectorXd& z, double t) const { return z + t * w; }
};

// Least squares (lambda = 0, rank-deficient designs rejected with
// NumericError) or ridge fit of targets on latent rows.
LatentDirection fit_direction(const Eigen::MatrixXd& latents, const Eigen::VectorXd& targets,
                              const std::string& target_name, double lambda = 0.0);

}  // namespace hagan
