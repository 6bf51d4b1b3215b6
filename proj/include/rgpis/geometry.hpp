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

#include <array>
#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace rgpis {

using Vec3 = std::array<double, 3>;

/// Flat, row-major collection of 2D or 3D points.
class PointSet {
 public:
  PointSet() = default;
  explicit PointSet(int dim) : dim_(dim) {}
  PointSet(int dim, std::vector<double> coords);

  int dim() const noexcept { return dim_; }
  std::size_t size() const noexcept {
    return dim_ == 0 ? 0 : coords_.size() / static_cast<std::size_t>(dim_);
  }
  bool empty() const noexcept { return coords_.empty(); }

  std::span<const double> operator[](std::size_t i) const {
    return {coords_.data() + i * dim_, static_cast<std::size_t>(dim_)};
  }
  std::span<double> operator[](std::size_t i) {
    return {coords_.data() + i * dim_, static_cast<std::size_t>(dim_)};
  }

  void push_back(std::span<const double> p);
  void reserve(std::size_t n) { coords_.reserve(n * dim_); }

  const std::vector<double>& coords() const noexcept { return coords_; }

 private:
  int dim_ = 0;
  std::vector<double> coords_;
};

/// Axis-aligned exploration region.
class Region {
 public:
  Region() = default;
  Region(std::vector<double> lower, std::vector<double> upper);

  int dim() const noexcept { return static_cast<int>(lower_.size()); }
  const std::vector<double>& lower() const noexcept { return lower_; }
  const std::vector<double>& upper() const noexcept { return upper_; }
  double extent(int k) const { return upper_[k] - lower_[k]; }

  bool contains(std::span<const double> p, double tol = 1e-9) const;

 private:
  std::vector<double> lower_;
  std::vector<double> upper_;
};

struct EvalGrid {
  Region region;
  double spacing = 0.0;
  std::vector<std::size_t> counts;  // samples per axis
  PointSet points;                  // last axis varies fastest
};

/// Number of samples along one axis: floor(extent / spacing) + 1.
std::size_t axis_sample_count(double extent, double spacing);
std::size_t grid_point_count(const Region& region, double spacing);
EvalGrid make_grid(const Region& region, double spacing);

// ---------------------------------------------------------------------------
// Shapes

struct TriangleMesh {
  std::vector<Vec3> vertices;
  std::vector<std::array<std::size_t, 3>> faces;
};

/// Parses the ASCII OFF format. Polygonal faces are fan-triangulated.
TriangleMesh parse_off(std::istream& in);
TriangleMesh load_off(const std::string& path);
void write_off(std::ostream& out, const TriangleMesh& mesh);

/// Closed prism obtained by sweeping a polygon in the (x1, x3) plane along
/// x2 over [y_min, y_max]. The polygon must be counter-clockwise and star
/// shaped with respect to its first vertex.
TriangleMesh extrude_profile(const std::vector<std::array<double, 2>>& profile,
                             double y_min, double y_max);

/// Stepped two-level building used as the default 3D construction.
TriangleMesh default_construction_mesh();

enum class ShapeKind { Square, Circle, Cross, Box3D, PolyMesh };

const char* to_string(ShapeKind kind) noexcept;
ShapeKind shape_kind_from_string(const std::string& name);

class ShapeModel {
 public:
  static ShapeModel square(double half_width, std::vector<double> translation = {0.0, 0.0});
  static ShapeModel circle(double radius, std::vector<double> translation = {0.0, 0.0});
  /// Union of [-L,L]x[-w,w] and [-w,w]x[-L,L].
  static ShapeModel cross(double half_length, double half_width,
                          std::vector<double> translation = {0.0, 0.0});
  static ShapeModel box3d(Vec3 half_extents, std::vector<double> translation = {0.0, 0.0, 0.0});
  /// Validates that the mesh is closed and consistently oriented; flips it
  /// if the orientation is inward.
  static ShapeModel poly_mesh(TriangleMesh mesh, std::vector<double> translation = {0.0, 0.0, 0.0});

  ShapeKind kind() const noexcept { return kind_; }
  int dim() const noexcept { return static_cast<int>(translation_.size()); }
  const std::vector<double>& translation() const noexcept { return translation_; }
  const std::vector<double>& parameters() const noexcept { return params_; }

  /// Counter-clockwise outline in world coordinates (Square and Cross).
  std::vector<std::array<double, 2>> outline() const;
  /// World-space triangle mesh (Box3D and PolyMesh).
  TriangleMesh mesh() const;

  double signed_distance(std::span<const double> x) const;
  bool contains(std::span<const double> x) const { return signed_distance(x) < 0.0; }

  /// Axis-aligned bounds in world coordinates.
  std::pair<std::vector<double>, std::vector<double>> bounds() const;

 private:
  ShapeModel() = default;

  ShapeKind kind_ = ShapeKind::Circle;
  std::vector<double> params_;
  std::vector<double> translation_;
  TriangleMesh local_mesh_;  // PolyMesh / Box3D, body frame
};

inline double signed_distance(const ShapeModel& shape, std::span<const double> x) {
  return shape.signed_distance(x);
}

struct SurfaceSpacing {
  enum class Unit { Length, Degrees };
  double value = 0.01;
  Unit unit = Unit::Length;

  static SurfaceSpacing length(double v) { return {v, Unit::Length}; }
  static SurfaceSpacing degrees(double v) { return {v, Unit::Degrees}; }
};

struct SurfaceSample {
  std::vector<double> point;
  std::vector<double> normal;  // unit, outward
};

/// Samples the boundary at the requested spacing. Polygon outlines are
/// walked as one closed polyline by arc length starting at the first vertex;
/// samples falling on a corner take the normal of the following edge.
/// Angular spacing is only meaningful for circles.
std::vector<SurfaceSample> surface_samples(const ShapeModel& shape, SurfaceSpacing spacing);

// Low-level helpers shared with tests.
double polygon_signed_distance(const std::vector<std::array<double, 2>>& poly, double x, double y);
double point_triangle_distance_sq(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c);
bool mesh_contains(const TriangleMesh& mesh, const Vec3& p);
double mesh_signed_distance(const TriangleMesh& mesh, const Vec3& p);
double mesh_signed_volume(const TriangleMesh& mesh);

}  // namespace rgpis
