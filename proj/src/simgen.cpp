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

#include "rgpis/simgen.hpp"

#include <cmath>

#include "rgpis/error.hpp"
#include "rgpis/rng.hpp"

namespace rgpis {

namespace {

std::vector<double> uniform_in(Rng& rng, const Region& region) {
  std::vector<double> p(static_cast<std::size_t>(region.dim()));
  for (int k = 0; k < region.dim(); ++k) p[static_cast<std::size_t>(k)] = rng.uniform(region.lower()[k], region.upper()[k]);
  return p;
}

/// Uniform in the ball of radius r around c, restricted to the region.
std::vector<double> uniform_near(Rng& rng, const std::vector<double>& c, double r, const Region& region) {
  std::vector<double> p(c.size());
  for (int attempt = 0; attempt < 100000; ++attempt) {
    double d2 = 0.0;
    for (std::size_t k = 0; k < c.size(); ++k) {
      const double u = rng.uniform(-1.0, 1.0);
      p[k] = c[k] + r * u;
      d2 += u * u;
    }
    if (d2 <= 1.0 && region.contains(p, 0.0)) return p;
  }
  fail(ErrorCode::InvalidArgument, "cannot place an outlier internal point inside the region");
}

}  // namespace

void ScenarioConfig::validate() const {
  require(region.dim() == shape.dim(), "scenario: shape and region dimensions differ");
  require(outlier_rate >= 0.0 && outlier_rate <= 1.0, "scenario: outlier_rate must lie in [0, 1]");
  require(outlier_pair_distance > 0.0, "scenario: outlier_pair_distance must be positive");
  require(surface_spacing.value > 0.0, "scenario: surface spacing must be positive");
  if (contact_internal_offset) require(*contact_internal_offset > 0.0, "scenario: internal offset must be positive");
  for (int k = 0; k < region.dim(); ++k) require(region.extent(k) > 0.0, "scenario: empty region");
  const auto [lo, hi] = shape.bounds();
  for (int k = 0; k < region.dim(); ++k) {
    require(lo[static_cast<std::size_t>(k)] >= region.lower()[k] && hi[static_cast<std::size_t>(k)] <= region.upper()[k],
            "scenario: shape is not contained in the region");
  }
}

ScenarioConfig default_scenario(ShapeKind kind) {
  ScenarioConfig c;
  switch (kind) {
    case ShapeKind::Square:
      c.shape = ShapeModel::square(0.3);
      c.surface_spacing = SurfaceSpacing::length(0.01);
      c.n_external = 315;
      c.n_internal = 35;
      break;
    case ShapeKind::Circle:
      c.shape = ShapeModel::circle(1.0);
      c.surface_spacing = SurfaceSpacing::degrees(3.0);
      c.n_external = 420;
      c.n_internal = 50;
      break;
    case ShapeKind::Cross:
      c.shape = ShapeModel::cross(0.35, 0.12);
      c.surface_spacing = SurfaceSpacing::length(0.01);
      c.n_external = 280;
      c.n_internal = 30;
      break;
    case ShapeKind::Box3D:
      c.shape = ShapeModel::box3d({1.0, 0.6, 0.5}, {0.0, 0.0, 0.8});
      c.region = Region({-4.0, -2.0, 0.0}, {4.0, 2.0, 2.0});
      c.surface_spacing = SurfaceSpacing::length(0.1);
      c.n_external = 1540;
      c.n_internal = 30;
      break;
    case ShapeKind::PolyMesh:
      c.shape = ShapeModel::poly_mesh(default_construction_mesh());
      c.region = Region({-4.0, -2.0, 0.0}, {4.0, 2.0, 2.0});
      c.surface_spacing = SurfaceSpacing::length(0.2);
      c.n_external = 1200;
      c.n_internal = 60;
      break;
  }
  return c;
}

Dataset generate_scenario(const ScenarioConfig& cfg) {
  cfg.validate();
  Dataset data;
  data.region = cfg.region;
  data.provenance = Provenance::Simulated;

  for (auto& s : surface_samples(cfg.shape, cfg.surface_spacing)) {
    std::optional<std::vector<double>> internal;
    if (cfg.contact_internal_offset) {
      std::vector<double> x_in = s.point;
      for (std::size_t k = 0; k < x_in.size(); ++k) x_in[k] -= *cfg.contact_internal_offset * s.normal[k];
      if (!cfg.region.contains(x_in)) continue;
      internal = std::move(x_in);
    }
    if (!cfg.region.contains(s.point)) continue;
    data.points.push_back({std::move(s.point), Label::Surface, std::move(s.normal), false});
    if (internal) data.points.push_back({std::move(*internal), Label::Inside, std::nullopt, false});
  }

  Rng free_rng(cfg.seed, StreamTag::FreePoints);
  Rng select_rng(cfg.seed, StreamTag::OutlierSelection);
  Rng place_rng(cfg.seed, StreamTag::OutlierPlacement);

  std::size_t n_ext = 0, n_int = 0;
  const std::size_t max_draws = 10000 * (cfg.n_free() + 1);
  for (std::size_t draw = 0; n_ext < cfg.n_external || n_int < cfg.n_internal; ++draw) {
    if (draw >= max_draws) fail(ErrorCode::InvalidArgument, "scenario: cannot reach the free-point quotas");
    auto p = uniform_in(free_rng, cfg.region);
    const double sd = cfg.shape.signed_distance(p);
    if (std::abs(sd) < kFreePointSurfaceGap) continue;
    if (sd < 0.0) {
      if (n_int == cfg.n_internal) continue;
      ++n_int;
      data.points.push_back({std::move(p), Label::Inside, std::nullopt, false});
      continue;
    }
    if (n_ext == cfg.n_external) continue;
    ++n_ext;
    if (select_rng.uniform() < cfg.outlier_rate) {
      auto partner = uniform_near(place_rng, p, cfg.outlier_pair_distance, cfg.region);
      data.points.push_back({std::move(p), Label::Surface, std::nullopt, true});
      data.points.push_back({std::move(partner), Label::Inside, std::nullopt, true});
    } else {
      data.points.push_back({std::move(p), Label::Outside, std::nullopt, false});
    }
  }
  return data;
}

LabelCounts count_labels(const Dataset& data) {
  LabelCounts c;
  for (const auto& p : data.points) {
    switch (p.y) {
      case Label::Surface: ++c.contact; break;
      case Label::Outside: ++c.external; break;
      case Label::Inside: ++c.internal; break;
    }
    if (p.injected_outlier) ++c.injected_outliers;
  }
  return c;
}

}  // namespace rgpis
