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

// Shape error, false-positive detection clarity and two-sample t-tests.

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "rgpis/dataset.hpp"
#include "rgpis/geometry.hpp"
#include "rgpis/surface.hpp"

namespace rgpis {

struct ShapeErrorResult {
  double e = 0.0;
  std::size_t n_s = 0;
  std::vector<double> per_point_d;
};

/// Mean unsigned distance from the estimate's points to the true surface.
ShapeErrorResult shape_error(const SurfaceEstimate& estimate, const ShapeModel& truth);

/// How a datum takes part in the clarity metric.
enum class DatumRole { Normal, Outlier, Excluded };

/// Simulation ground truth: both members of every injected pair are
/// outliers, everything else is normal.
std::vector<DatumRole> roles_from_flags(const Dataset& data);
/// Flight-data rule: contacts at distance >= threshold from the true shape
/// are outliers.
std::vector<DatumRole> roles_from_distance(const Dataset& data, const ShapeModel& truth, double threshold = 0.5);

inline constexpr double kDefaultNeighborhood = 0.5;

struct FpDetectionResult {
  double d_o = kDefaultNeighborhood;
  std::vector<std::size_t> outlier_indices;  // outliers with a Q_o value
  std::vector<double> q;                     // aligned with outlier_indices
  std::vector<std::size_t> isolated_outliers;  // no normal datum within d_o

  double mean_q() const;
};

FpDetectionResult fp_detection(const Eigen::VectorXd& u, const PointSet& positions, std::span<const DatumRole> roles,
                               double d_o = kDefaultNeighborhood);

struct TTestResult {
  double t_statistic = 0.0;
  double degrees_of_freedom = 0.0;
  double p_value = 1.0;
  double mean_a = 0.0, mean_b = 0.0;
  double var_a = 0.0, var_b = 0.0;  // unbiased sample variances
  std::size_t n_a = 0, n_b = 0;
  bool welch = false;
};

/// Two-sided two-sample t-test; pooled variance unless `welch`.
TTestResult two_sample_t_test(std::span<const double> a, std::span<const double> b, bool welch = false);

}  // namespace rgpis
