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

#include "rgpis/surface.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>

#include "rgpis/csv.hpp"
#include "rgpis/error.hpp"

namespace rgpis {

SurfaceEstimate extract_level_set(const PredictionField& field, double band) {
  require(std::isfinite(band) && band > 0.0, "band must be positive");
  require(static_cast<Eigen::Index>(field.points.size()) == field.mean.size(), "field: size mismatch");
  SurfaceEstimate est;
  est.band = band;
  est.points = PointSet(field.points.dim());
  for (std::size_t i = 0; i < field.points.size(); ++i) {
    const double mu = field.mean(static_cast<Eigen::Index>(i));
    if (std::abs(mu) < band) {
      est.points.push_back(field.points[i]);
      est.mu_values.push_back(mu);
    }
  }
  est.empty_selection = est.mu_values.empty();
  return est;
}

void write_surface_csv(std::ostream& out, const SurfaceEstimate& est) {
  const int dim = est.points.dim();
  out << csv::coordinate_header(dim, {"mu"}) << '\n';
  for (std::size_t i = 0; i < est.size(); ++i) {
    const auto p = est.points[i];
    for (int k = 0; k < dim; ++k) out << csv::number(p[k]) << ',';
    out << csv::number(est.mu_values[i]) << '\n';
  }
}

void export_surface(const SurfaceEstimate& est, const std::string& path) {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::Io, "cannot write surface: " + path);
  write_surface_csv(out, est);
  out.flush();
  if (!out) fail(ErrorCode::Io, "write failed: " + path);
}

SurfaceEstimate read_surface_csv(std::istream& in, double band) {
  std::string line;
  if (!std::getline(in, line)) fail(ErrorCode::Parse, "surface CSV: missing header");
  const auto header = csv::split(line);
  const int dim = static_cast<int>(header.size()) - 1;
  if (dim != 2 && dim != 3) fail(ErrorCode::Parse, "surface CSV: unexpected header '" + line + "'");
  SurfaceEstimate est;
  est.band = band;
  est.points = PointSet(dim);
  std::vector<double> p(static_cast<std::size_t>(dim));
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (csv::is_blank(line)) continue;
    const auto f = csv::split(line);
    const std::string where = "surface CSV line " + std::to_string(line_no);
    if (static_cast<int>(f.size()) != dim + 1) fail(ErrorCode::Parse, where + ": wrong field count");
    for (int k = 0; k < dim; ++k) p[static_cast<std::size_t>(k)] = csv::parse_double(f[static_cast<std::size_t>(k)], where);
    est.points.push_back(p);
    est.mu_values.push_back(csv::parse_double(f[static_cast<std::size_t>(dim)], where));
  }
  est.empty_selection = est.mu_values.empty();
  return est;
}

}  // namespace rgpis
