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

// Seeded simulation scenarios: surface contacts, random free-space points
// and paired false-positive outliers.

#include <cstdint>
#include <optional>

#include "rgpis/dataset.hpp"
#include "rgpis/geometry.hpp"

namespace rgpis {

struct ScenarioConfig {
  ShapeModel shape = ShapeModel::circle(1.0);
  Region region{{-3.0, -3.0}, {3.0, 3.0}};
  SurfaceSpacing surface_spacing = SurfaceSpacing::degrees(3.0);
  /// Free-space points, drawn uniformly from the region and kept until each
  /// side of the surface has its quota.
  std::size_t n_external = 420;
  std::size_t n_internal = 50;
  double outlier_rate = 0.02;
  double outlier_pair_distance = 0.1;
  /// If set, every contact gets an internal point this far along the inward
  /// normal (the flight-data construction).
  std::optional<double> contact_internal_offset;
  std::uint64_t seed = 0;

  void validate() const;
  std::size_t n_free() const noexcept { return n_external + n_internal; }
};

/// Defaults for the 2D shapes (square, circle, cross) and the 3D box.
ScenarioConfig default_scenario(ShapeKind kind);

/// Free points closer than this to the surface are redrawn.
inline constexpr double kFreePointSurfaceGap = 1e-6;

Dataset generate_scenario(const ScenarioConfig& cfg);

struct LabelCounts {
  std::size_t contact = 0;
  std::size_t external = 0;
  std::size_t internal = 0;
  std::size_t injected_outliers = 0;  // flagged points (two per pair)

  std::size_t total() const noexcept { return contact + external + internal; }
};

LabelCounts count_labels(const Dataset& data);

}  // namespace rgpis
