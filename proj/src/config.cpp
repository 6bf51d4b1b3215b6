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

#include "rgpis/config.hpp"

#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "rgpis/csv.hpp"
#include "rgpis/error.hpp"

namespace rgpis {

namespace pt = boost::property_tree;

const char* to_string(Estimator e) noexcept {
  switch (e) {
    case Estimator::Gpis: return "gpis";
    case Estimator::Robust: return "robust";
    case Estimator::Both: return "both";
  }
  return "?";
}

Estimator estimator_from_string(const std::string& name) {
  if (name == "gpis") return Estimator::Gpis;
  if (name == "robust") return Estimator::Robust;
  if (name == "both") return Estimator::Both;
  fail(ErrorCode::Parse, "unknown estimator '" + name + "' (expected gpis, robust or both)");
}

namespace {

const std::map<std::string, std::set<std::string>>& schema() {
  static const std::map<std::string, std::set<std::string>> s = {
      {"scenario",
       {"source", "shape", "radius", "half_width", "half_length", "arm_half_width", "half_extents", "center", "mesh",
        "region_lower", "region_upper", "surface_spacing", "surface_spacing_unit", "n_external", "n_internal",
        "outlier_rate", "outlier_pair_distance", "contact_internal_offset"}},
      {"flight", {"logs", "region_lower", "region_upper", "truth_mesh"}},
      {"detection", {"a0", "contact_rate", "free_rate", "compensate_gravity"}},
      {"vehicle", {"r", "h", "d_in"}},
      {"gp", {"noise_variance", "length_scale_sq", "signal_variance", "optimize_gpis"}},
      {"robust",
       {"alpha", "beta", "tol", "max_iters", "max_sweeps", "max_likelihood_iters", "max_kernel_iters", "fd_step",
        "min_alpha", "min_beta", "optimize_likelihood", "optimize_kernel", "accelerate", "init_seed"}},
      {"evaluation", {"grid_spacing", "band", "d_o", "outlier_distance", "field_variance", "welch"}},
      {"study", {"trials", "seed", "estimator", "jobs", "output_dir"}},
  };
  return s;
}

class Reader {
 public:
  explicit Reader(const pt::ptree& tree) : tree_(tree) {}

  std::optional<std::string> raw(const std::string& section, const std::string& key) const {
    const auto sec = tree_.get_child_optional(section);
    if (!sec) return std::nullopt;
    const auto v = sec->get_optional<std::string>(key);
    if (!v) return std::nullopt;
    return *v;
  }

  template <typename T>
  void get(const std::string& section, const std::string& key, T& out) const {
    if (const auto v = raw(section, key)) out = convert<T>(*v, section + "." + key);
  }

  template <typename T>
  void get(const std::string& section, const std::string& key, std::optional<T>& out) const {
    if (const auto v = raw(section, key)) out = convert<T>(*v, section + "." + key);
  }

  std::vector<double> list(const std::string& section, const std::string& key) const {
    std::vector<double> out;
    if (const auto v = raw(section, key)) {
      for (const auto& f : csv::split(*v)) out.push_back(csv::parse_double(f, "config " + section + "." + key));
    }
    return out;
  }

  template <typename T>
  static T convert(const std::string& v, const std::string& where) {
    if constexpr (std::is_same_v<T, bool>) {
      if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
      if (v == "false" || v == "0" || v == "no" || v == "off") return false;
      fail(ErrorCode::Parse, "config " + where + ": expected a boolean, got '" + v + "'");
    } else if constexpr (std::is_same_v<T, std::string>) {
      return v;
    } else if constexpr (std::is_floating_point_v<T>) {
      return csv::parse_double(v, "config " + where);
    } else {
      std::size_t pos = 0;
      long long x = 0;
      try {
        x = std::stoll(v, &pos);
      } catch (const std::exception&) {
        pos = 0;
      }
      if (pos != v.size() || x < 0) fail(ErrorCode::Parse, "config " + where + ": expected a non-negative integer");
      return static_cast<T>(x);
    }
  }

 private:
  const pt::ptree& tree_;
};

std::string resolve(const std::string& path, const std::string& base) {
  const std::filesystem::path p(path);
  return p.is_absolute() ? path : (std::filesystem::path(base) / p).lexically_normal().string();
}

std::vector<double> or_default(std::vector<double> v, std::vector<double> d) { return v.empty() ? d : v; }

ShapeModel build_shape(const Reader& r, ShapeKind kind, const std::string& base) {
  std::vector<double> center = r.list("scenario", "center");
  const ScenarioConfig def = default_scenario(kind);
  const auto& dp = def.shape.parameters();
  auto param = [&](const char* key, double fallback) {
    double v = fallback;
    r.get("scenario", key, v);
    return v;
  };
  switch (kind) {
    case ShapeKind::Square:
      return ShapeModel::square(param("half_width", dp.at(0)), or_default(center, def.shape.translation()));
    case ShapeKind::Circle:
      return ShapeModel::circle(param("radius", dp.at(0)), or_default(center, def.shape.translation()));
    case ShapeKind::Cross:
      return ShapeModel::cross(param("half_length", dp.at(0)), param("arm_half_width", dp.at(1)),
                               or_default(center, def.shape.translation()));
    case ShapeKind::Box3D: {
      auto he = or_default(r.list("scenario", "half_extents"), {dp.at(0), dp.at(1), dp.at(2)});
      require(he.size() == 3, "config scenario.half_extents needs three values");
      return ShapeModel::box3d({he[0], he[1], he[2]}, or_default(center, def.shape.translation()));
    }
    case ShapeKind::PolyMesh: {
      std::optional<std::string> mesh;
      r.get("scenario", "mesh", mesh);
      const TriangleMesh m = mesh ? load_off(resolve(*mesh, base)) : default_construction_mesh();
      return ShapeModel::poly_mesh(m, or_default(center, {0.0, 0.0, 0.0}));
    }
  }
  fail(ErrorCode::Parse, "unsupported shape");
}

}  // namespace

std::optional<ShapeModel> ExperimentConfig::truth() const {
  if (source == DataSource::Simulation) return scenario.shape;
  if (truth_mesh) return ShapeModel::poly_mesh(load_off(*truth_mesh));
  return std::nullopt;
}

void ExperimentConfig::validate() const {
  require(trials >= 1, "config: trials must be at least 1");
  require(jobs >= 1, "config: jobs must be at least 1");
  require(gp.noise_variance > 0.0, "config: gp.noise_variance must be positive");
  gp.kernel.validate();
  gp.likelihood.validate();
  require(gp.robust.tol > 0.0 && gp.robust.max_iters >= 1 && gp.robust.max_sweeps >= 1,
          "config: robust tol, max_iters and max_sweeps must be positive");
  require(evaluation.band > 0.0 && evaluation.d_o > 0.0 && evaluation.outlier_distance > 0.0,
          "config: band, d_o and outlier_distance must be positive");
  if (evaluation.grid_spacing) require(*evaluation.grid_spacing > 0.0, "config: grid_spacing must be positive");
  detection.validate();
  vehicle.validate();
  if (source == DataSource::Simulation) {
    scenario.validate();
  } else {
    require(flight_region.dim() == 3, "config: the flight region must be 3D");
    for (const auto& log : flight_logs) {
      if (!std::filesystem::exists(log)) fail(ErrorCode::Io, "config: flight log not found: " + log);
    }
    if (truth_mesh && !std::filesystem::exists(*truth_mesh)) {
      fail(ErrorCode::Io, "config: truth mesh not found: " + *truth_mesh);
    }
  }
}

ExperimentConfig parse_config(std::istream& in, const std::string& base_dir) {
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    fail(ErrorCode::Parse, std::string("config: ") + e.what());
  }
  for (const auto& [section, body] : tree) {
    const auto it = schema().find(section);
    if (it == schema().end()) fail(ErrorCode::Parse, "config: unknown section [" + section + "]");
    if (!body.data().empty()) fail(ErrorCode::Parse, "config: key outside of any section: " + section);
    for (const auto& [key, value] : body) {
      if (!it->second.count(key)) fail(ErrorCode::Parse, "config: unknown key '" + key + "' in [" + section + "]");
    }
  }
  const Reader r(tree);
  ExperimentConfig cfg;

  std::string source = "simulation";
  r.get("scenario", "source", source);
  if (source == "simulation") {
    cfg.source = DataSource::Simulation;
  } else if (source == "flight") {
    cfg.source = DataSource::FlightLogs;
  } else {
    fail(ErrorCode::Parse, "config scenario.source: expected simulation or flight");
  }

  std::string shape = "circle";
  r.get("scenario", "shape", shape);
  const ShapeKind kind = shape_kind_from_string(shape);
  ScenarioConfig sc = default_scenario(kind);
  sc.shape = build_shape(r, kind, base_dir);
  {
    auto lo = r.list("scenario", "region_lower"), hi = r.list("scenario", "region_upper");
    if (!lo.empty() || !hi.empty()) sc.region = Region(or_default(lo, sc.region.lower()), or_default(hi, sc.region.upper()));
  }
  if (const auto v = r.raw("scenario", "surface_spacing")) sc.surface_spacing.value = Reader::convert<double>(*v, "scenario.surface_spacing");
  if (const auto v = r.raw("scenario", "surface_spacing_unit")) {
    if (*v == "m") {
      sc.surface_spacing.unit = SurfaceSpacing::Unit::Length;
    } else if (*v == "deg") {
      sc.surface_spacing.unit = SurfaceSpacing::Unit::Degrees;
    } else {
      fail(ErrorCode::Parse, "config scenario.surface_spacing_unit: expected m or deg");
    }
  }
  r.get("scenario", "n_external", sc.n_external);
  r.get("scenario", "n_internal", sc.n_internal);
  r.get("scenario", "outlier_rate", sc.outlier_rate);
  r.get("scenario", "outlier_pair_distance", sc.outlier_pair_distance);
  if (const auto v = r.raw("scenario", "contact_internal_offset")) {
    if (*v == "none") {
      sc.contact_internal_offset.reset();
    } else {
      sc.contact_internal_offset = Reader::convert<double>(*v, "scenario.contact_internal_offset");
    }
  }
  cfg.scenario = sc;

  if (const auto v = r.raw("flight", "logs")) {
    for (const auto& f : csv::split(*v)) {
      if (!f.empty()) cfg.flight_logs.push_back(resolve(f, base_dir));
    }
  }
  {
    auto lo = r.list("flight", "region_lower"), hi = r.list("flight", "region_upper");
    if (!lo.empty() || !hi.empty()) {
      cfg.flight_region = Region(or_default(lo, cfg.flight_region.lower()), or_default(hi, cfg.flight_region.upper()));
    }
  }
  if (const auto v = r.raw("flight", "truth_mesh")) cfg.truth_mesh = resolve(*v, base_dir);

  r.get("detection", "a0", cfg.detection.a0);
  r.get("detection", "contact_rate", cfg.detection.contact_rate);
  r.get("detection", "free_rate", cfg.detection.free_rate);
  r.get("detection", "compensate_gravity", cfg.detection.compensate_gravity);
  r.get("vehicle", "r", cfg.vehicle.r);
  r.get("vehicle", "h", cfg.vehicle.h);
  r.get("vehicle", "d_in", cfg.vehicle.d_in);

  r.get("gp", "noise_variance", cfg.gp.noise_variance);
  r.get("gp", "length_scale_sq", cfg.gp.kernel.length_scale_sq);
  r.get("gp", "signal_variance", cfg.gp.kernel.signal_variance);
  r.get("gp", "optimize_gpis", cfg.gp.optimize_gpis);

  auto& ro = cfg.gp.robust;
  r.get("robust", "alpha", cfg.gp.likelihood.alpha);
  r.get("robust", "beta", cfg.gp.likelihood.beta);
  r.get("robust", "tol", ro.tol);
  r.get("robust", "max_iters", ro.max_iters);
  r.get("robust", "max_sweeps", ro.max_sweeps);
  r.get("robust", "max_likelihood_iters", ro.max_likelihood_iters);
  r.get("robust", "max_kernel_iters", ro.max_kernel_iters);
  r.get("robust", "fd_step", ro.fd_step);
  r.get("robust", "min_alpha", ro.min_alpha);
  r.get("robust", "min_beta", ro.min_beta);
  r.get("robust", "optimize_likelihood", ro.optimize_likelihood);
  r.get("robust", "optimize_kernel", ro.optimize_kernel);
  r.get("robust", "accelerate", ro.accelerate);
  r.get("robust", "init_seed", ro.random_init_seed);

  auto& ev = cfg.evaluation;
  r.get("evaluation", "grid_spacing", ev.grid_spacing);
  r.get("evaluation", "band", ev.band);
  r.get("evaluation", "d_o", ev.d_o);
  r.get("evaluation", "outlier_distance", ev.outlier_distance);
  if (const auto v = r.raw("evaluation", "field_variance")) {
    if (*v == "auto") {
      ev.field_variance.reset();
    } else {
      ev.field_variance = Reader::convert<bool>(*v, "evaluation.field_variance");
    }
  }
  r.get("evaluation", "welch", ev.welch);

  r.get("study", "trials", cfg.trials);
  r.get("study", "seed", cfg.base_seed);
  if (const auto v = r.raw("study", "estimator")) cfg.estimator = estimator_from_string(*v);
  r.get("study", "jobs", cfg.jobs);
  if (const auto v = r.raw("study", "output_dir")) cfg.output_dir = resolve(*v, base_dir);

  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::Io, "cannot open config: " + path);
  const auto base = std::filesystem::path(path).parent_path().string();
  try {
    return parse_config(in, base.empty() ? "." : base);
  } catch (const Error& e) {
    fail(e.code(), path + ": " + e.what());
  }
}

nlohmann::json to_json(const ExperimentConfig& c) {
  using nlohmann::json;
  const auto& sc = c.scenario;
  json j;
  j["source"] = c.source == DataSource::Simulation ? "simulation" : "flight";
  j["scenario"] = {
      {"shape", to_string(sc.shape.kind())},
      {"shape_parameters", sc.shape.parameters()},
      {"center", sc.shape.translation()},
      {"region_lower", sc.region.lower()},
      {"region_upper", sc.region.upper()},
      {"surface_spacing", sc.surface_spacing.value},
      {"surface_spacing_unit", sc.surface_spacing.unit == SurfaceSpacing::Unit::Degrees ? "deg" : "m"},
      {"n_external", sc.n_external},
      {"n_internal", sc.n_internal},
      {"outlier_rate", sc.outlier_rate},
      {"outlier_pair_distance", sc.outlier_pair_distance},
      {"contact_internal_offset", sc.contact_internal_offset ? json(*sc.contact_internal_offset) : json(nullptr)},
  };
  j["flight"] = {{"logs", c.flight_logs},
                 {"region_lower", c.flight_region.lower()},
                 {"region_upper", c.flight_region.upper()},
                 {"truth_mesh", c.truth_mesh ? json(*c.truth_mesh) : json(nullptr)}};
  j["detection"] = {{"a0", c.detection.a0},
                    {"contact_rate", c.detection.contact_rate},
                    {"free_rate", c.detection.free_rate},
                    {"compensate_gravity", c.detection.compensate_gravity}};
  j["vehicle"] = {{"r", c.vehicle.r}, {"h", c.vehicle.h}, {"d_in", c.vehicle.d_in}};
  j["gp"] = {{"noise_variance", c.gp.noise_variance},
             {"length_scale_sq", c.gp.kernel.length_scale_sq},
             {"signal_variance", c.gp.kernel.signal_variance},
             {"optimize_gpis", c.gp.optimize_gpis}};
  const auto& ro = c.gp.robust;
  j["robust"] = {{"alpha", c.gp.likelihood.alpha},
                 {"beta", c.gp.likelihood.beta},
                 {"tol", ro.tol},
                 {"max_iters", ro.max_iters},
                 {"max_sweeps", ro.max_sweeps},
                 {"max_likelihood_iters", ro.max_likelihood_iters},
                 {"max_kernel_iters", ro.max_kernel_iters},
                 {"fd_step", ro.fd_step},
                 {"min_alpha", ro.min_alpha},
                 {"min_beta", ro.min_beta},
                 {"optimize_likelihood", ro.optimize_likelihood},
                 {"optimize_kernel", ro.optimize_kernel},
                 {"accelerate", ro.accelerate},
                 {"init_seed", ro.random_init_seed ? json(*ro.random_init_seed) : json(nullptr)}};
  const int dim = c.region().dim();
  j["evaluation"] = {{"grid_spacing", c.evaluation.spacing_for(dim)},
                     {"band", c.evaluation.band},
                     {"d_o", c.evaluation.d_o},
                     {"outlier_distance", c.evaluation.outlier_distance},
                     {"field_variance", c.evaluation.variance_for(dim)},
                     {"welch", c.evaluation.welch}};
  j["study"] = {{"trials", c.trials},
                {"seed", c.base_seed},
                {"estimator", to_string(c.estimator)},
                {"jobs", c.jobs},
                {"output_dir", c.output_dir}};
  return j;
}

}  // namespace rgpis
