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

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "rgpis/geometry.hpp"

namespace rgpis {

/// Ternary shape-potential observation.
enum class Label : int { Inside = -1, Surface = 0, Outside = 1 };

inline double potential(Label y) noexcept { return static_cast<double>(static_cast<int>(y)); }
Label label_from_int(int v);

struct LabeledPoint {
  std::vector<double> x;
  Label y = Label::Outside;
  std::optional<std::vector<double>> normal;  // only for Label::Surface
  bool injected_outlier = false;              // simulation ground truth
};

enum class Provenance { Simulated, FlightLog };

struct Dataset {
  std::vector<LabeledPoint> points;
  Region region;
  Provenance provenance = Provenance::Simulated;

  int dim() const noexcept { return region.dim(); }
  std::size_t size() const noexcept { return points.size(); }

  PointSet positions() const;
  Eigen::VectorXd targets() const;

  /// Throws InvalidArgument on label/normal/region inconsistencies.
  void validate(double region_tol = 1e-9) const;
};

/// FNV-1a 64 over the exact bit patterns of positions and labels.
std::uint64_t dataset_hash(const Dataset& data);

// CSV: x1,x2[,x3],y,nx,ny[,nz],outlier_flag. Normal fields are empty for
// y != 0. Numbers use 17 significant digits so reading back is bit exact.
void write_dataset_csv(std::ostream& out, const Dataset& data);
void save_dataset_csv(const std::string& path, const Dataset& data);
/// The region is not part of the CSV; pass the one from the experiment config.
Dataset read_dataset_csv(std::istream& in, const Region& region,
                         Provenance provenance = Provenance::Simulated);
Dataset load_dataset_csv(const std::string& path, const Region& region,
                         Provenance provenance = Provenance::Simulated);

}  // namespace rgpis
