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

#include "rgpis/metrics.hpp"

#include <cmath>
#include <numeric>

#include "rgpis/distributions.hpp"
#include "rgpis/error.hpp"

namespace rgpis {

ShapeErrorResult shape_error(const SurfaceEstimate& estimate, const ShapeModel& truth) {
  if (estimate.size() == 0) fail(ErrorCode::EmptyEstimate, "shape error of an empty surface estimate");
  require(estimate.points.dim() == truth.dim(), "shape error: dimension mismatch");
  ShapeErrorResult r;
  r.n_s = estimate.size();
  r.per_point_d.reserve(r.n_s);
  for (std::size_t i = 0; i < r.n_s; ++i) r.per_point_d.push_back(std::abs(truth.signed_distance(estimate.points[i])));
  r.e = std::accumulate(r.per_point_d.begin(), r.per_point_d.end(), 0.0) / static_cast<double>(r.n_s);
  return r;
}

std::vector<DatumRole> roles_from_flags(const Dataset& data) {
  std::vector<DatumRole> roles;
  roles.reserve(data.size());
  for (const auto& p : data.points) roles.push_back(p.injected_outlier ? DatumRole::Outlier : DatumRole::Normal);
  return roles;
}

std::vector<DatumRole> roles_from_distance(const Dataset& data, const ShapeModel& truth, double threshold) {
  require(threshold > 0.0, "outlier distance threshold must be positive");
  std::vector<DatumRole> roles;
  roles.reserve(data.size());
  for (const auto& p : data.points) {
    const bool far = p.y == Label::Surface && std::abs(truth.signed_distance(p.x)) >= threshold;
    roles.push_back(far ? DatumRole::Outlier : DatumRole::Normal);
  }
  return roles;
}

double FpDetectionResult::mean_q() const {
  if (q.empty()) return std::numeric_limits<double>::quiet_NaN();
  return std::accumulate(q.begin(), q.end(), 0.0) / static_cast<double>(q.size());
}

FpDetectionResult fp_detection(const Eigen::VectorXd& u, const PointSet& positions, std::span<const DatumRole> roles,
                               double d_o) {
  const std::size_t n = positions.size();
  require(static_cast<std::size_t>(u.size()) == n && roles.size() == n, "fp_detection: inputs are not aligned");
  require(d_o > 0.0, "fp_detection: d_o must be positive");
  const int dim = positions.dim();
  const double r2 = d_o * d_o;
  FpDetectionResult res;
  res.d_o = d_o;
  bool any = false;
  for (std::size_t o = 0; o < n; ++o) {
    if (roles[o] != DatumRole::Outlier) continue;
    any = true;
    require(u(static_cast<Eigen::Index>(o)) > 0.0, "fp_detection: outlier uncertainty must be positive");
    const auto po = positions[o];
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t j = 0; j < n; ++j) {
      if (roles[j] != DatumRole::Normal) continue;
      const auto pj = positions[j];
      double d2 = 0.0;
      for (int k = 0; k < dim; ++k) d2 += (pj[k] - po[k]) * (pj[k] - po[k]);
      if (d2 <= r2) {
        sum += u(static_cast<Eigen::Index>(j));
        ++count;
      }
    }
    if (count == 0) {
      res.isolated_outliers.push_back(o);
      continue;
    }
    res.outlier_indices.push_back(o);
    res.q.push_back(sum / static_cast<double>(count) / u(static_cast<Eigen::Index>(o)));
  }
  if (!any) fail(ErrorCode::NoOutliers, "fp_detection: no outliers are flagged");
  return res;
}

namespace {

void mean_var(std::span<const double> x, double& mean, double& var) {
  const double n = static_cast<double>(x.size());
  mean = std::accumulate(x.begin(), x.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : x) ss += (v - mean) * (v - mean);
  var = ss / (n - 1.0);
}

}  // namespace

TTestResult two_sample_t_test(std::span<const double> a, std::span<const double> b, bool welch) {
  require(a.size() >= 2 && b.size() >= 2, "t-test needs at least two samples per group");
  TTestResult r;
  r.n_a = a.size();
  r.n_b = b.size();
  r.welch = welch;
  mean_var(a, r.mean_a, r.var_a);
  mean_var(b, r.mean_b, r.var_b);
  const double na = static_cast<double>(r.n_a), nb = static_cast<double>(r.n_b);
  double se2 = 0.0;
  if (welch) {
    const double qa = r.var_a / na, qb = r.var_b / nb;
    se2 = qa + qb;
    r.degrees_of_freedom = se2 > 0.0 ? se2 * se2 / (qa * qa / (na - 1.0) + qb * qb / (nb - 1.0)) : na + nb - 2.0;
  } else {
    r.degrees_of_freedom = na + nb - 2.0;
    const double pooled = ((na - 1.0) * r.var_a + (nb - 1.0) * r.var_b) / r.degrees_of_freedom;
    se2 = pooled * (1.0 / na + 1.0 / nb);
  }
  const double diff = r.mean_a - r.mean_b;
  if (se2 == 0.0) {
    if (diff == 0.0) {
      r.t_statistic = 0.0;
      r.p_value = 1.0;
    } else {
      r.t_statistic = std::copysign(std::numeric_limits<double>::infinity(), diff);
      r.p_value = 0.0;
    }
    return r;
  }
  r.t_statistic = diff / std::sqrt(se2);
  r.p_value = student_t_two_sided_tail(r.t_statistic, r.degrees_of_freedom);
  return r;
}

}  // namespace rgpis
