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

#include <iostream>
#include <map>
#include <string>

#include <CLI11.hpp>

#include "rgpis/cli.hpp"
#include "rgpis/error.hpp"

namespace {

void add_common(CLI::App* cmd, rgpis::CommandOptions& o, std::string& estimator) {
  cmd->add_option("--config", o.config_path, "Experiment config (INI)")->check(CLI::ExistingFile);
  cmd->add_option("--out", o.out_dir, "Output directory");
  cmd->add_option("--trials", o.trials, "Number of trials")->check(CLI::PositiveNumber);
  cmd->add_option("--seed", o.seed, "Base seed");
  cmd->add_option("--estimator", estimator, "gpis, robust or both")
      ->check(CLI::IsMember({"gpis", "robust", "both"}));
  cmd->add_option("--jobs", o.jobs, "Worker threads")->check(CLI::PositiveNumber);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Robust Gaussian process implicit surfaces"};
  app.require_subcommand(1);
  rgpis::CommandOptions o;
  std::string estimator;

  auto* simulate = app.add_subcommand("simulate", "Generate seeded scenario datasets");
  auto* fit = app.add_subcommand("fit", "Fit estimators to one dataset and export fields");
  auto* study = app.add_subcommand("study", "Run a multi-trial study and write a report");
  auto* ingest = app.add_subcommand("ingest", "Build a dataset from flight logs");
  auto* report = app.add_subcommand("report", "Rebuild a study report from trial records");
  for (auto* c : {simulate, fit, study, ingest}) add_common(c, o, estimator);
  fit->add_option("--data", o.data_path, "Dataset CSV")->required()->check(CLI::ExistingFile);
  ingest->add_option("logs", o.inputs, "Flight log CSVs (default: flight.logs from the config)");
  report->add_option("inputs", o.inputs, "Study directories or trial files")->required();
  report->add_option("--config", o.config_path, "Config supplying evaluation settings")->check(CLI::ExistingFile);
  report->add_option("--out", o.report_path, "Report path")->default_str("report.json");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? rgpis::kExitOk : rgpis::kExitConfig;
  }

  try {
    if (!estimator.empty()) o.estimator = rgpis::estimator_from_string(estimator);
    if (*simulate) rgpis::cmd_simulate(o);
    else if (*fit) rgpis::cmd_fit(o);
    else if (*study) rgpis::cmd_study(o);
    else if (*ingest) rgpis::cmd_ingest(o);
    else rgpis::cmd_report(o);
  } catch (const rgpis::Error& e) {
    std::cerr << "rgpis: " << e.what() << '\n';
    return rgpis::exit_code_for(e.code());
  } catch (const std::bad_alloc&) {
    std::cerr << "rgpis: out of memory\n";
    return rgpis::kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "rgpis: " << e.what() << '\n';
    return rgpis::kExitIo;
  }
  return rgpis::kExitOk;
}
