/*
 * Copyright 2026 The rgpis Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <iosfwd>
#include <span>
#include <string>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "rgpis/dataset.hpp"
#include "rgpis/geometry.hpp"
#include "rgpis/simd/kernels.hpp"

namespace rgpis {

/// Isotropic squared-exponential kernel hyperparameters.
struct KernelParams {
  double length_scale_sq = 0.25 * 0.25;  // m^2
  double signal_variance = 1.0;

  void validate() const;
  simd::SeKernel se() const noexcept {
    return {0.5 / length_scale_sq, signal_variance};
  }
};

/// Diagonal jitter added before any factorisation, relative to the signal
/// variance.
inline constexpr double kRelativeJitter = 1e-10;

/// Test points per prediction block.
inline constexpr std::size_t kPredictionChunk = 4096;

double kernel(std::span<const double> x, std::span<const double> z, const KernelParams& params);

/// Gram matrix K (no jitter).
Eigen::MatrixXd gram(const PointSet& points, const KernelParams& params);

/// K(test, train), test points along rows.
Eigen::MatrixXd cross_covariance(const PointSet& test, const PointSet& train, const KernelParams& params);

struct PredictionField {
  PointSet points;
  Eigen::VectorXd mean;
  Eigen::VectorXd variance;  // empty for mean-only predictions

  bool has_variance() const noexcept { return variance.size() == mean.size() && mean.size() > 0; }
  std::size_t size() const noexcept { return points.size(); }
};

/// Posterior of a GP with fixed (possibly per-datum) Gaussian noise.
class GpisFit {
 public:
  GpisFit(PointSet points, Eigen::VectorXd targets, Eigen::VectorXd noise, KernelParams params);

  const PointSet& training_points() const noexcept { return points_; }
  const Eigen::VectorXd& targets() const noexcept { return targets_; }
  /// Diagonal of the noise covariance.
  const Eigen::VectorXd& noise() const noexcept { return noise_; }
  const KernelParams& kernel_params() const noexcept { return params_; }
  /// Lower Cholesky factor of K + diag(noise) + jitter.
  const Eigen::MatrixXd& factor() const noexcept { return factor_; }
  /// (K + diag(noise))^-1 y
  const Eigen::VectorXd& weights() const noexcept { return weights_; }
  std::size_t size() const noexcept { return points_.size(); }
  int dim() const noexcept { return points_.dim(); }

  const simd::SoaPoints& soa() const noexcept { return soa_; }

 private:
  PointSet points_;
  Eigen::VectorXd targets_;
  Eigen::VectorXd noise_;
  KernelParams params_;
  Eigen::MatrixXd factor_;
  Eigen::VectorXd weights_;
  simd::SoaPoints soa_;
};

/// Homoscedastic GPIS posterior.
GpisFit gpis_fit(const Dataset& data, double noise_variance, const KernelParams& params);

/// Heteroscedastic variant: noise[i] is the variance of datum i.
GpisFit gp_fit_diagonal(const PointSet& points, const Eigen::VectorXd& targets,
                        const Eigen::VectorXd& noise, const KernelParams& params);

PredictionField gpis_predict(const GpisFit& fit, const EvalGrid& grid);
PredictionField gpis_predict(const GpisFit& fit, const PointSet& points);
/// Predictive mean only; avoids the O(n^2) per-point variance solve.
PredictionField gpis_predict_mean(const GpisFit& fit, const PointSet& points);

/// ln N(y | 0, K + noise_variance I), jitter included.
double gpis_log_marginal(const PointSet& points, const Eigen::VectorXd& targets, double noise_variance,
                         const KernelParams& params);

struct GpisHyperparameters {
  double noise_variance = 0.01;
  KernelParams kernel;
};

struct MarginalFitOptions {
  int max_iters = 100;
  double fd_step = 1e-5;
  double rel_tol = 1e-10;
  double min_noise_variance = 1e-6;
};

/// Type-II maximum likelihood for (noise variance, psi), started from `init`.
/// Gradient ascent in log space with finite-difference gradients.
GpisHyperparameters fit_gpis_hyperparameters(const PointSet& points, const Eigen::VectorXd& targets,
                                             const GpisHyperparameters& init, const MarginalFitOptions& opts = {});

/// CSV: x1,x2[,x3],mu,var (var column left empty for mean-only fields).
void write_field_csv(std::ostream& out, const PredictionField& field);
void save_field_csv(const std::string& path, const PredictionField& field);

}  // namespace rgpis
