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

// Near-zero level set of a predicted shape potential.

#include <iosfwd>
#include <string>
#include <vector>

#include "rgpis/geometry.hpp"
#include "rgpis/gp_core.hpp"

namespace rgpis {

inline constexpr double kDefaultBand = 0.01;

struct SurfaceEstimate {
  PointSet points;
  std::vector<double> mu_values;
  double band = kDefaultBand;
  /// Set when no grid point fell inside the band.
  bool empty_selection = false;

  std::size_t size() const noexcept { return mu_values.size(); }
};

/// Grid points with |mu| < band, in grid order.
SurfaceEstimate extract_level_set(const PredictionField& field, double band = kDefaultBand);

/// CSV: x1,x2[,x3],mu
void write_surface_csv(std::ostream& out, const SurfaceEstimate& estimate);
void export_surface(const SurfaceEstimate& estimate, const std::string& path);
/// Reads a file written by export_surface. The band is not stored.
SurfaceEstimate read_surface_csv(std::istream& in, double band = kDefaultBand);

}  // namespace rgpis
