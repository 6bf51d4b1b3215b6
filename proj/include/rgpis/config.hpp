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

// Experiment configuration: an INI file with fixed sections and keys.
// Unknown sections or keys are rejected; every omitted key takes the
// documented default, and the resolved values are echoed into run manifests.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "rgpis/contact_pipeline.hpp"
#include "rgpis/gp_core.hpp"
#include "rgpis/robust_gp.hpp"
#include "rgpis/simgen.hpp"
#include "rgpis/surface.hpp"

namespace rgpis {

enum class Estimator { Gpis, Robust, Both };
const char* to_string(Estimator e) noexcept;
Estimator estimator_from_string(const std::string& name);

enum class DataSource { Simulation, FlightLogs };

struct GpSettings {
  double noise_variance = 0.05;
  KernelParams kernel;  // initial psi for the robust fit, fixed psi for GPIS
  /// Fit (noise variance, psi) of the GPIS by type-II maximum likelihood.
  bool optimize_gpis = false;
  TLikelihoodParams likelihood;  // initial theta
  RobustOptions robust;
};

struct EvaluationSettings {
  std::optional<double> grid_spacing;  // default 0.02 (2D), 0.05 (3D)
  double band = kDefaultBand;
  double d_o = 0.5;
  /// Flight data: contacts at least this far from the truth are outliers.
  double outlier_distance = 0.5;
  /// Predictive variance on the grid: "auto" enables it in 2D only.
  std::optional<bool> field_variance;
  bool welch = false;

  double spacing_for(int dim) const { return grid_spacing.value_or(dim == 3 ? 0.05 : 0.02); }
  bool variance_for(int dim) const { return field_variance.value_or(dim == 2); }
};

struct ExperimentConfig {
  DataSource source = DataSource::Simulation;
  ScenarioConfig scenario = default_scenario(ShapeKind::Circle);
  std::vector<std::string> flight_logs;
  Region flight_region{{-4.0, -2.0, 0.0}, {4.0, 2.0, 2.0}};
  /// Ground-truth shape for flight data metrics (OFF mesh), optional.
  std::optional<std::string> truth_mesh;
  DetectionConfig detection;
  VehicleGeometry vehicle;

  Estimator estimator = Estimator::Both;
  GpSettings gp;
  EvaluationSettings evaluation;

  int trials = 50;
  std::uint64_t base_seed = 0;
  std::string output_dir = "rgpis-out";
  unsigned jobs = 1;

  /// Region of the data this config produces.
  const Region& region() const { return source == DataSource::Simulation ? scenario.region : flight_region; }
  /// The true shape, if one is known.
  std::optional<ShapeModel> truth() const;
  void validate() const;
};

/// Parses INI text. Relative paths are resolved against base_dir.
ExperimentConfig parse_config(std::istream& in, const std::string& base_dir = ".");
ExperimentConfig load_config(const std::string& path);

/// All resolved settings, for manifests.
nlohmann::json to_json(const ExperimentConfig& cfg);

}  // namespace rgpis
