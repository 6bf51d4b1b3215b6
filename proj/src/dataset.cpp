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

#include "rgpis/dataset.hpp"

#include <bit>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "rgpis/csv.hpp"
#include "rgpis/error.hpp"

namespace rgpis {

Label label_from_int(int v) {
  if (v < -1 || v > 1) fail(ErrorCode::InvalidArgument, "label must be -1, 0 or 1");
  return static_cast<Label>(v);
}

PointSet Dataset::positions() const {
  PointSet ps(dim());
  ps.reserve(points.size());
  for (const auto& p : points) ps.push_back(p.x);
  return ps;
}

Eigen::VectorXd Dataset::targets() const {
  Eigen::VectorXd y(static_cast<Eigen::Index>(points.size()));
  for (std::size_t i = 0; i < points.size(); ++i) y(static_cast<Eigen::Index>(i)) = potential(points[i].y);
  return y;
}

void Dataset::validate(double region_tol) const {
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto& p = points[i];
    const std::string where = "datum " + std::to_string(i) + ": ";
    require(static_cast<int>(p.x.size()) == dim(), where + "dimension mismatch");
    for (double v : p.x) require(std::isfinite(v), where + "non-finite coordinate");
    require(region.contains(p.x, region_tol), where + "outside the exploration region");
    if (p.normal) {
      require(p.y == Label::Surface, where + "normal given for a non-contact point");
      require(static_cast<int>(p.normal->size()) == dim(), where + "normal dimension mismatch");
    }
  }
}

std::uint64_t dataset_hash(const Dataset& data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](std::uint64_t v) {
    for (int b = 0; b < 8; ++b) {
      h ^= (v >> (8 * b)) & 0xFFu;
      h *= 0x100000001b3ULL;
    }
  };
  mix(static_cast<std::uint64_t>(data.dim()));
  for (const auto& p : data.points) {
    for (double v : p.x) mix(std::bit_cast<std::uint64_t>(v));
    mix(static_cast<std::uint64_t>(static_cast<std::int64_t>(static_cast<int>(p.y))));
  }
  return h;
}

void write_dataset_csv(std::ostream& out, const Dataset& data) {
  const int dim = data.dim();
  static const char* kAxis[] = {"x1", "x2", "x3"};
  static const char* kNormal[] = {"nx", "ny", "nz"};
  for (int k = 0; k < dim; ++k) out << kAxis[k] << ',';
  out << 'y';
  for (int k = 0; k < dim; ++k) out << ',' << kNormal[k];
  out << ",outlier_flag\n";
  for (const auto& p : data.points) {
    for (int k = 0; k < dim; ++k) out << csv::number(p.x[k]) << ',';
    out << static_cast<int>(p.y);
    for (int k = 0; k < dim; ++k) {
      out << ',';
      if (p.normal) out << csv::number((*p.normal)[k]);
    }
    out << ',' << (p.injected_outlier ? 1 : 0) << '\n';
  }
}

void save_dataset_csv(const std::string& path, const Dataset& data) {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::Io, "cannot write dataset: " + path);
  write_dataset_csv(out, data);
  if (!out) fail(ErrorCode::Io, "write failed: " + path);
}

Dataset read_dataset_csv(std::istream& in, const Region& region, Provenance provenance) {
  Dataset data;
  data.region = region;
  data.provenance = provenance;
  const int dim = region.dim();
  const std::size_t expected = static_cast<std::size_t>(2 * dim + 2);

  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) fail(ErrorCode::Parse, "dataset CSV: missing header");
  ++line_no;
  const auto header = csv::split(line);
  if (header.size() != expected || header[0] != "x1" || header[dim] != "y") {
    fail(ErrorCode::Parse, "dataset CSV: header does not match a " + std::to_string(dim) + "D dataset");
  }
  while (std::getline(in, line)) {
    ++line_no;
    if (csv::is_blank(line)) continue;
    const auto f = csv::split(line);
    const std::string where = "dataset CSV line " + std::to_string(line_no) + ": ";
    if (f.size() != expected) fail(ErrorCode::Parse, where + "expected " + std::to_string(expected) + " fields");
    LabeledPoint p;
    p.x.resize(dim);
    for (int k = 0; k < dim; ++k) p.x[k] = csv::parse_double(f[k], where);
    const int y = csv::parse_int(f[dim], where);
    if (y < -1 || y > 1) fail(ErrorCode::Parse, where + "label must be -1, 0 or 1");
    p.y = static_cast<Label>(y);
    bool any_normal = false, all_normal = true;
    for (int k = 0; k < dim; ++k) {
      const bool present = !f[dim + 1 + k].empty();
      any_normal |= present;
      all_normal &= present;
    }
    if (any_normal) {
      if (!all_normal) fail(ErrorCode::Parse, where + "partial normal");
      std::vector<double> n(dim);
      for (int k = 0; k < dim; ++k) n[k] = csv::parse_double(f[dim + 1 + k], where);
      p.normal = std::move(n);
    }
    p.injected_outlier = csv::parse_int(f[2 * dim + 1], where) != 0;
    data.points.push_back(std::move(p));
  }
  return data;
}

Dataset load_dataset_csv(const std::string& path, const Region& region, Provenance provenance) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::Io, "cannot open dataset: " + path);
  return read_dataset_csv(in, region, provenance);
}

}  // namespace rgpis
