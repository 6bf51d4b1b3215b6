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

#include "rgpis/cli.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <mutex>
#include <numeric>
#include <sstream>
#include <thread>

#include "rgpis/error.hpp"

namespace rgpis {

namespace fs = std::filesystem;
using nlohmann::json;

int exit_code_for(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::NumericalFailure:
    case ErrorCode::EmptyEstimate:
      return kExitNumerical;
    case ErrorCode::Io:
      return kExitIo;
    default:
      return kExitConfig;
  }
}

std::string file_hash(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::Io, "cannot read " + path);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  char buf[1 << 16];
  while (in.read(buf, sizeof buf) || in.gcount() > 0) {
    for (std::streamsize i = 0; i < in.gcount(); ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 0x100000001b3ULL;
    }
  }
  std::ostringstream s;
  s << std::hex << std::setw(16) << std::setfill('0') << h;
  return s.str();
}

void parallel_for(std::size_t count, unsigned jobs, const std::function<void(std::size_t)>& f) {
  std::vector<std::exception_ptr> errors(count);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        f(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const unsigned n_threads = static_cast<unsigned>(std::min<std::size_t>(std::max(1u, jobs), count));
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

// ---------------------------------------------------------------------------
// Trials

GpisFit fit_gpis_estimator(const ExperimentConfig& cfg, const Dataset& data) {
  GpisHyperparameters hp{cfg.gp.noise_variance, cfg.gp.kernel};
  if (cfg.gp.optimize_gpis) hp = fit_gpis_hyperparameters(data.positions(), data.targets(), hp);
  return gpis_fit(data, hp.noise_variance, hp.kernel);
}

namespace {

void score(EstimatorOutcome& out, const PredictionField& field, const Eigen::VectorXd& u, const Dataset& data,
           const ShapeModel& truth, std::span<const DatumRole> roles, const ExperimentConfig& cfg) {
  const auto est = extract_level_set(field, cfg.evaluation.band);
  const auto se = shape_error(est, truth);
  out.shape_error = se.e;
  out.n_s = se.n_s;
  if (std::find(roles.begin(), roles.end(), DatumRole::Outlier) != roles.end()) {
    const auto fp = fp_detection(u, data.positions(), roles, cfg.evaluation.d_o);
    out.q = fp.q;
    out.isolated_outliers = fp.isolated_outliers.size();
  }
}

}  // namespace

TrialResult evaluate_dataset(const ExperimentConfig& cfg, const Dataset& data, const ShapeModel& truth,
                             std::span<const DatumRole> roles, std::uint64_t seed) {
  TrialResult t;
  t.shape = to_string(truth.kind());
  t.seed = seed;
  t.n = data.size();
  t.counts = count_labels(data);
  const EvalGrid grid = make_grid(data.region, cfg.evaluation.spacing_for(data.dim()));
  if (cfg.estimator != Estimator::Robust) {
    const GpisFit fit = fit_gpis_estimator(cfg, data);
    EstimatorOutcome o;
    o.kernel = fit.kernel_params();
    o.noise_variance = fit.noise()(0);
    score(o, gpis_predict_mean(fit, grid.points), gpis_uncertainty(fit).u, data, truth, roles, cfg);
    t.gpis = std::move(o);
  }
  if (cfg.estimator != Estimator::Gpis) {
    const RobustState st = fit_robust(data, cfg.gp.likelihood, cfg.gp.kernel, cfg.gp.robust);
    EstimatorOutcome o;
    o.kernel = st.kernel;
    o.likelihood = st.likelihood;
    o.iterations = st.iterations;
    o.converged = st.converged;
    o.elbo = st.elbo;
    score(o, robust_predict_mean(st, grid.points), st.uncertainty(), data, truth, roles, cfg);
    t.robust = std::move(o);
  }
  return t;
}

TrialResult run_trial(const ExperimentConfig& cfg, std::uint64_t seed) {
  ScenarioConfig sc = cfg.scenario;
  sc.seed = seed;
  const Dataset data = generate_scenario(sc);
  const auto roles = roles_from_flags(data);
  return evaluate_dataset(cfg, data, sc.shape, roles, seed);
}

namespace {

json outcome_json(const EstimatorOutcome& o) {
  double mean_q = o.q.empty() ? 0.0 : std::accumulate(o.q.begin(), o.q.end(), 0.0) / static_cast<double>(o.q.size());
  return {{"shape_error", o.shape_error},
          {"n_s", o.n_s},
          {"q", o.q},
          {"mean_q", o.q.empty() ? json(nullptr) : json(mean_q)},
          {"isolated_outliers", o.isolated_outliers},
          {"length_scale_sq", o.kernel.length_scale_sq},
          {"signal_variance", o.kernel.signal_variance},
          {"noise_variance", o.noise_variance},
          {"alpha", o.likelihood.alpha},
          {"beta", o.likelihood.beta},
          {"iterations", o.iterations},
          {"converged", o.converged},
          {"elbo", o.elbo}};
}

EstimatorOutcome outcome_from_json(const json& j) {
  EstimatorOutcome o;
  o.shape_error = j.at("shape_error").get<double>();
  o.n_s = j.at("n_s").get<std::size_t>();
  o.q = j.at("q").get<std::vector<double>>();
  o.isolated_outliers = j.at("isolated_outliers").get<std::size_t>();
  o.kernel = {j.at("length_scale_sq").get<double>(), j.at("signal_variance").get<double>()};
  o.noise_variance = j.at("noise_variance").get<double>();
  o.likelihood = {j.at("alpha").get<double>(), j.at("beta").get<double>()};
  o.iterations = j.at("iterations").get<int>();
  o.converged = j.at("converged").get<bool>();
  o.elbo = j.at("elbo").get<double>();
  return o;
}

json ttest_json(const TTestResult& r) {
  auto num = [](double v) { return std::isfinite(v) ? json(v) : json(nullptr); };
  return {{"t_statistic", num(r.t_statistic)},
          {"degrees_of_freedom", r.degrees_of_freedom},
          {"p_value", r.p_value},
          {"mean_gpis", r.mean_a},
          {"mean_robust", r.mean_b},
          {"var_gpis", r.var_a},
          {"var_robust", r.var_b},
          {"n_gpis", r.n_a},
          {"n_robust", r.n_b},
          {"welch", r.welch}};
}

double mean_of(const std::vector<double>& v) {
  return v.empty() ? std::numeric_limits<double>::quiet_NaN()
                   : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

json nullable(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

}  // namespace

json to_json(const TrialResult& t) {
  json j = {{"shape", t.shape},
            {"seed", t.seed},
            {"n", t.n},
            {"n_contact", t.counts.contact},
            {"n_external", t.counts.external},
            {"n_internal", t.counts.internal},
            {"n_injected", t.counts.injected_outliers}};
  j["gpis"] = t.gpis ? outcome_json(*t.gpis) : json(nullptr);
  j["robust"] = t.robust ? outcome_json(*t.robust) : json(nullptr);
  return j;
}

TrialResult trial_from_json(const json& j) {
  try {
    TrialResult t;
    t.shape = j.at("shape").get<std::string>();
    t.seed = j.at("seed").get<std::uint64_t>();
    t.n = j.at("n").get<std::size_t>();
    t.counts.contact = j.at("n_contact").get<std::size_t>();
    t.counts.external = j.at("n_external").get<std::size_t>();
    t.counts.internal = j.at("n_internal").get<std::size_t>();
    t.counts.injected_outliers = j.at("n_injected").get<std::size_t>();
    if (!j.at("gpis").is_null()) t.gpis = outcome_from_json(j.at("gpis"));
    if (!j.at("robust").is_null()) t.robust = outcome_from_json(j.at("robust"));
    return t;
  } catch (const json::exception& e) {
    fail(ErrorCode::Parse, std::string("malformed trial record: ") + e.what());
  }
}

json build_report(const std::vector<TrialResult>& trials, bool welch) {
  std::map<std::string, std::vector<const TrialResult*>> by_shape;
  for (const auto& t : trials) by_shape[t.shape].push_back(&t);
  json shapes = json::object();
  for (auto& [shape, list] : by_shape) {
    std::sort(list.begin(), list.end(), [](auto* a, auto* b) { return a->seed < b->seed; });
    std::vector<double> e_g, e_r, q_g, q_r;
    std::vector<std::uint64_t> seeds;
    for (const auto* t : list) {
      seeds.push_back(t->seed);
      if (t->gpis) {
        e_g.push_back(t->gpis->shape_error);
        q_g.insert(q_g.end(), t->gpis->q.begin(), t->gpis->q.end());
      }
      if (t->robust) {
        e_r.push_back(t->robust->shape_error);
        q_r.insert(q_r.end(), t->robust->q.begin(), t->robust->q.end());
      }
    }
    auto test = [&](const std::vector<double>& a, const std::vector<double>& b) {
      return a.size() >= 2 && b.size() >= 2 ? ttest_json(two_sample_t_test(a, b, welch)) : json(nullptr);
    };
    shapes[shape] = {
        {"trials", list.size()},
        {"seeds", seeds},
        {"shape_error",
         {{"per_trial_gpis", e_g},
          {"per_trial_robust", e_r},
          {"mean_gpis", nullable(mean_of(e_g))},
          {"mean_robust", nullable(mean_of(e_r))},
          {"t_test", test(e_g, e_r)}}},
        {"fp_detection",
         {{"n_outliers_gpis", q_g.size()},
          {"n_outliers_robust", q_r.size()},
          {"mean_q_gpis", nullable(mean_of(q_g))},
          {"mean_q_robust", nullable(mean_of(q_r))},
          {"t_test", test(q_g, q_r)}}},
    };
  }
  return {{"format", "rgpis-study-report"}, {"version", 1}, {"t_test", welch ? "welch" : "pooled"}, {"shapes", shapes}};
}

// ---------------------------------------------------------------------------
// Commands

namespace {

void write_json(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::Io, "cannot write " + path);
  out << j.dump(2) << '\n';
  out.flush();
  if (!out) fail(ErrorCode::Io, "write failed: " + path);
}

json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::Io, "cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    fail(ErrorCode::Parse, path + ": " + e.what());
  }
}

void make_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) fail(ErrorCode::Io, "cannot create output directory " + dir);
}

/// Records written files; removes them unless commit() was called.
class OutputSet {
 public:
  explicit OutputSet(std::string dir) : dir_(std::move(dir)) {}
  ~OutputSet() {
    if (committed_) return;
    for (const auto& f : files_) {
      std::error_code ec;
      fs::remove(fs::path(dir_) / f, ec);
    }
  }
  std::string path(const std::string& name) {
    files_.push_back(name);
    return (fs::path(dir_) / name).string();
  }
  json listing() const {
    json out = json::array();
    for (const auto& f : files_) out.push_back({{"file", f}, {"fnv1a64", file_hash((fs::path(dir_) / f).string())}});
    return out;
  }
  void commit() { committed_ = true; }

 private:
  std::string dir_;
  std::vector<std::string> files_;
  bool committed_ = false;
};

std::string trial_name(std::uint64_t seed) {
  std::ostringstream s;
  s << std::setw(6) << std::setfill('0') << seed;
  return s.str();
}

json manifest_base(const char* command, const ExperimentConfig& cfg) {
  return {{"format", "rgpis-manifest"}, {"version", 1}, {"command", command}, {"config", to_json(cfg)}};
}

}  // namespace

ExperimentConfig resolve_config(const CommandOptions& o) {
  ExperimentConfig cfg = o.config_path.empty() ? ExperimentConfig{} : load_config(o.config_path);
  if (o.out_dir) cfg.output_dir = *o.out_dir;
  if (o.trials) cfg.trials = *o.trials;
  if (o.seed) cfg.base_seed = *o.seed;
  if (o.estimator) cfg.estimator = *o.estimator;
  if (o.jobs) cfg.jobs = *o.jobs;
  cfg.validate();
  return cfg;
}

void cmd_simulate(const CommandOptions& opts) {
  const ExperimentConfig cfg = resolve_config(opts);
  require(cfg.source == DataSource::Simulation, "simulate needs scenario.source = simulation");
  make_dir(cfg.output_dir);
  OutputSet outputs(cfg.output_dir);
  json datasets = json::array();
  std::vector<std::string> paths(static_cast<std::size_t>(cfg.trials));
  for (int i = 0; i < cfg.trials; ++i) paths[static_cast<std::size_t>(i)] = outputs.path("dataset_" + trial_name(cfg.base_seed + static_cast<std::uint64_t>(i)) + ".csv");
  std::vector<LabelCounts> counts(paths.size());
  parallel_for(paths.size(), cfg.jobs, [&](std::size_t i) {
    ScenarioConfig sc = cfg.scenario;
    sc.seed = cfg.base_seed + i;
    const Dataset d = generate_scenario(sc);
    counts[i] = count_labels(d);
    save_dataset_csv(paths[i], d);
  });
  for (std::size_t i = 0; i < paths.size(); ++i) {
    datasets.push_back({{"file", fs::path(paths[i]).filename().string()},
                        {"seed", cfg.base_seed + i},
                        {"n", counts[i].total()},
                        {"n_contact", counts[i].contact},
                        {"n_external", counts[i].external},
                        {"n_internal", counts[i].internal},
                        {"n_injected", counts[i].injected_outliers}});
  }
  json m = manifest_base("simulate", cfg);
  m["datasets"] = datasets;
  m["outputs"] = outputs.listing();
  write_json((fs::path(cfg.output_dir) / "manifest.json").string(), m);
  outputs.commit();
}

void cmd_fit(const CommandOptions& opts) {
  const ExperimentConfig cfg = resolve_config(opts);
  require(opts.data_path.has_value(), "fit needs a dataset (--data)");
  const Provenance prov = cfg.source == DataSource::Simulation ? Provenance::Simulated : Provenance::FlightLog;
  const Dataset data = load_dataset_csv(*opts.data_path, cfg.region(), prov);
  data.validate();
  require(count_labels(data).contact > 0, "fit: the dataset has no contact points");
  make_dir(cfg.output_dir);
  OutputSet outputs(cfg.output_dir);
  const int dim = data.dim();
  const EvalGrid grid = make_grid(data.region, cfg.evaluation.spacing_for(dim));
  const bool with_var = cfg.evaluation.variance_for(dim);
  const auto truth = cfg.truth();
  std::vector<DatumRole> roles;
  if (truth) {
    const bool flagged = std::any_of(data.points.begin(), data.points.end(), [](auto& p) { return p.injected_outlier; });
    roles = flagged || cfg.source == DataSource::Simulation
                ? roles_from_flags(data)
                : roles_from_distance(data, *truth, cfg.evaluation.outlier_distance);
  }
  const std::uint64_t hash = dataset_hash(data);
  json summary = json::object();

  auto emit = [&](const std::string& tag, const PredictionField& field, const UncertaintyReport& unc) {
    save_field_csv(outputs.path("field_" + tag + ".csv"), field);
    const auto est = extract_level_set(field, cfg.evaluation.band);
    export_surface(est, outputs.path("surface_" + tag + ".csv"));
    save_uncertainty_csv(outputs.path("uncertainty_" + tag + ".csv"), unc);
    json s = {{"surface_points", est.size()}, {"empty_surface", est.empty_selection}};
    if (truth) {
      if (!est.empty_selection) s["shape_error"] = shape_error(est, *truth).e;
      if (std::find(roles.begin(), roles.end(), DatumRole::Outlier) != roles.end()) {
        const auto fp = fp_detection(unc.u, data.positions(), roles, cfg.evaluation.d_o);
        s["q"] = fp.q;
        s["mean_q"] = nullable(fp.mean_q());
        s["isolated_outliers"] = fp.isolated_outliers.size();
      }
    }
    return s;
  };

  if (cfg.estimator != Estimator::Robust) {
    const GpisFit fit = fit_gpis_estimator(cfg, data);
    const PredictionField field = with_var ? gpis_predict(fit, grid) : gpis_predict_mean(fit, grid.points);
    json s = emit("gpis", field, gpis_uncertainty(fit));
    const json state = {{"format", "rgpis-gpis-state"},
                        {"dataset_hash", [&] {
                           std::ostringstream h;
                           h << std::hex << std::setw(16) << std::setfill('0') << hash;
                           return h.str();
                         }()},
                        {"noise_variance", fit.noise()(0)},
                        {"length_scale_sq", fit.kernel_params().length_scale_sq},
                        {"signal_variance", fit.kernel_params().signal_variance}};
    write_json(outputs.path("state_gpis.json"), state);
    s["noise_variance"] = fit.noise()(0);
    s["length_scale_sq"] = fit.kernel_params().length_scale_sq;
    s["signal_variance"] = fit.kernel_params().signal_variance;
    summary["gpis"] = s;
  }
  if (cfg.estimator != Estimator::Gpis) {
    const RobustState st = fit_robust(data, cfg.gp.likelihood, cfg.gp.kernel, cfg.gp.robust);
    const PredictionField field = with_var ? robust_predict(st, grid) : robust_predict_mean(st, grid.points);
    json s = emit("robust", field, data_uncertainty(st));
    save_checkpoint(outputs.path("checkpoint_robust.json"), st, hash);
    s["iterations"] = st.iterations;
    s["converged"] = st.converged;
    s["elbo"] = st.elbo;
    s["alpha"] = st.likelihood.alpha;
    s["beta"] = st.likelihood.beta;
    s["length_scale_sq"] = st.kernel.length_scale_sq;
    s["signal_variance"] = st.kernel.signal_variance;
    summary["robust"] = s;
  }
  json m = manifest_base("fit", cfg);
  m["dataset"] = {{"file", *opts.data_path}, {"n", data.size()}, {"fnv1a64", file_hash(*opts.data_path)}};
  m["grid_points"] = grid.points.size();
  m["results"] = summary;
  m["outputs"] = outputs.listing();
  write_json((fs::path(cfg.output_dir) / "manifest.json").string(), m);
  outputs.commit();
}

void cmd_study(const CommandOptions& opts) {
  const ExperimentConfig cfg = resolve_config(opts);
  require(cfg.source == DataSource::Simulation, "study needs scenario.source = simulation");
  make_dir(cfg.output_dir);
  const std::string trial_dir = (fs::path(cfg.output_dir) / "trials").string();
  make_dir(trial_dir);
  OutputSet outputs(cfg.output_dir);
  const std::size_t n = static_cast<std::size_t>(cfg.trials);
  std::vector<TrialResult> results(n);
  std::vector<std::string> paths(n);
  for (std::size_t i = 0; i < n; ++i) paths[i] = outputs.path("trials/trial_" + trial_name(cfg.base_seed + i) + ".json");
  std::mutex log_mutex;
  parallel_for(n, cfg.jobs, [&](std::size_t i) {
    const std::uint64_t seed = cfg.base_seed + i;
    try {
      results[i] = run_trial(cfg, seed);
    } catch (const Error& e) {
      fail(e.code(), "trial with seed " + std::to_string(seed) + ": " + e.what());
    }
    write_json(paths[i], to_json(results[i]));
    const std::lock_guard lock(log_mutex);
    std::cerr << "trial seed " << seed << " done\n";
  });
  write_json(outputs.path("report.json"), build_report(results, cfg.evaluation.welch));
  json m = manifest_base("study", cfg);
  m["outputs"] = outputs.listing();
  write_json((fs::path(cfg.output_dir) / "manifest.json").string(), m);
  outputs.commit();
}

void cmd_ingest(const CommandOptions& opts) {
  ExperimentConfig cfg = resolve_config(opts);
  std::vector<std::string> logs = opts.inputs.empty() ? cfg.flight_logs : opts.inputs;
  require(!logs.empty(), "ingest: no flight logs given");
  std::vector<std::vector<ImuSample>> parsed;
  parsed.reserve(logs.size());
  for (const auto& p : logs) parsed.push_back(load_flight_log(p));
  const IngestResult res = build_dataset(parsed, cfg.detection, cfg.vehicle, cfg.flight_region, cfg.jobs);
  make_dir(cfg.output_dir);
  OutputSet outputs(cfg.output_dir);
  save_dataset_csv(outputs.path("dataset.csv"), res.data);
  const auto& s = res.summary;
  const json summary = {{"logs", logs},
                        {"samples", s.samples},
                        {"contact_events", s.contact_events},
                        {"free_events", s.free_events},
                        {"n_contact", s.n_contact},
                        {"n_external", s.n_external},
                        {"n_internal", s.n_internal},
                        {"rejected_outside_region", s.rejected_outside_region}};
  write_json(outputs.path("ingest_summary.json"), summary);
  json m = manifest_base("ingest", cfg);
  m["summary"] = summary;
  m["outputs"] = outputs.listing();
  write_json((fs::path(cfg.output_dir) / "manifest.json").string(), m);
  outputs.commit();
}

void cmd_report(const CommandOptions& opts) {
  require(!opts.inputs.empty(), "report: give study directories or trial files");
  std::vector<std::string> files;
  for (const auto& in : opts.inputs) {
    if (fs::is_directory(in)) {
      const fs::path dir = fs::is_directory(fs::path(in) / "trials") ? fs::path(in) / "trials" : fs::path(in);
      std::vector<std::string> found;
      for (const auto& e : fs::directory_iterator(dir)) {
        const auto name = e.path().filename().string();
        if (name.rfind("trial_", 0) == 0 && e.path().extension() == ".json") found.push_back(e.path().string());
      }
      std::sort(found.begin(), found.end());
      files.insert(files.end(), found.begin(), found.end());
    } else if (fs::exists(in)) {
      files.push_back(in);
    } else {
      fail(ErrorCode::Io, "report: no such file or directory: " + in);
    }
  }
  require(!files.empty(), "report: no trial records found");
  std::vector<TrialResult> trials;
  for (const auto& f : files) trials.push_back(trial_from_json(read_json(f)));
  bool welch = false;
  if (!opts.config_path.empty()) welch = load_config(opts.config_path).evaluation.welch;
  const std::string out = opts.report_path.value_or("report.json");
  write_json(out, build_report(trials, welch));
}

}  // namespace rgpis
