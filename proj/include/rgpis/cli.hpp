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

// Experiment driver: simulate, fit, study, ingest and report commands, plus
// the per-trial evaluation they share.

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "rgpis/config.hpp"
#include "rgpis/error.hpp"
#include "rgpis/metrics.hpp"

namespace rgpis {

/// Process exit codes.
enum ExitCode : int { kExitOk = 0, kExitConfig = 2, kExitNumerical = 3, kExitIo = 4 };
int exit_code_for(ErrorCode code) noexcept;

struct EstimatorOutcome {
  double shape_error = 0.0;
  std::size_t n_s = 0;
  std::vector<double> q;               // per outlier with a neighbourhood
  std::size_t isolated_outliers = 0;   // outliers without normal neighbours
  KernelParams kernel;
  double noise_variance = 0.0;         // GPIS only
  TLikelihoodParams likelihood;        // robust only
  int iterations = 0;                  // robust only
  bool converged = true;
  double elbo = 0.0;                   // robust only
};

struct TrialResult {
  std::string shape;
  std::uint64_t seed = 0;
  std::size_t n = 0;
  LabelCounts counts;
  std::optional<EstimatorOutcome> gpis;
  std::optional<EstimatorOutcome> robust;
};

/// The homoscedastic fit selected by the config (fixed or type-II ML).
GpisFit fit_gpis_estimator(const ExperimentConfig& cfg, const Dataset& data);

/// Fits the configured estimators to `data` and scores them against `truth`.
TrialResult evaluate_dataset(const ExperimentConfig& cfg, const Dataset& data, const ShapeModel& truth,
                             std::span<const DatumRole> roles, std::uint64_t seed);
/// generate_scenario with the given seed, then evaluate_dataset.
TrialResult run_trial(const ExperimentConfig& cfg, std::uint64_t seed);

nlohmann::json to_json(const TrialResult& t);
TrialResult trial_from_json(const nlohmann::json& j);

/// Per-shape aggregates and t-tests (GPIS as the first sample, robust as
/// the second): shape error over per-trial values, clarity over all
/// per-outlier values pooled across trials.
nlohmann::json build_report(const std::vector<TrialResult>& trials, bool welch = false);

/// Runs f(0..count-1) on `jobs` threads. Results are stored by index; the
/// lowest failing index is rethrown.
void parallel_for(std::size_t count, unsigned jobs, const std::function<void(std::size_t)>& f);

struct CommandOptions {
  std::string config_path;
  std::optional<std::string> out_dir;
  std::optional<int> trials;
  std::optional<std::uint64_t> seed;
  std::optional<Estimator> estimator;
  std::optional<unsigned> jobs;
  std::optional<std::string> data_path;   // fit
  std::vector<std::string> inputs;        // ingest: logs, report: trial dirs or files
  std::optional<std::string> report_path; // report
};

/// Loads the config and applies command-line overrides.
ExperimentConfig resolve_config(const CommandOptions& opts);

void cmd_simulate(const CommandOptions& opts);
void cmd_fit(const CommandOptions& opts);
void cmd_study(const CommandOptions& opts);
void cmd_ingest(const CommandOptions& opts);
void cmd_report(const CommandOptions& opts);

/// FNV-1a 64 of a file's bytes, as 16 hex digits.
std::string file_hash(const std::string& path);

}  // namespace rgpis
