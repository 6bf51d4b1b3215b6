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

#include "rgpis/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <numbers>
#include <ostream>
#include <set>
#include <sstream>

#include "rgpis/error.hpp"

namespace rgpis {

namespace {

constexpr double kPi = std::numbers::pi;

Vec3 sub(const Vec3& a, const Vec3& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }
Vec3 add(const Vec3& a, const Vec3& b) { return {a[0] + b[0], a[1] + b[1], a[2] + b[2]}; }
Vec3 scale(const Vec3& a, double s) { return {a[0] * s, a[1] * s, a[2] * s}; }
double dot(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }
Vec3 cross3(const Vec3& a, const Vec3& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}
double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }

Vec3 to_vec3(std::span<const double> p) {
  Vec3 v{0.0, 0.0, 0.0};
  for (std::size_t k = 0; k < p.size() && k < 3; ++k) v[k] = p[k];
  return v;
}

void check_translation(const std::vector<double>& t, std::size_t dim) {
  require(t.size() == dim, "shape translation has wrong dimension");
  for (double v : t) require(std::isfinite(v), "shape translation must be finite");
}

}  // namespace

// ---------------------------------------------------------------------------
// PointSet / Region / grid

PointSet::PointSet(int dim, std::vector<double> coords) : dim_(dim), coords_(std::move(coords)) {
  require(dim > 0, "point dimension must be positive");
  require(coords_.size() % static_cast<std::size_t>(dim) == 0,
          "coordinate count is not a multiple of the dimension");
}

void PointSet::push_back(std::span<const double> p) {
  require(static_cast<int>(p.size()) == dim_, "point dimension mismatch");
  coords_.insert(coords_.end(), p.begin(), p.end());
}

Region::Region(std::vector<double> lower, std::vector<double> upper)
    : lower_(std::move(lower)), upper_(std::move(upper)) {
  require(lower_.size() == upper_.size(), "region bounds differ in dimension");
  require(lower_.size() == 2 || lower_.size() == 3, "region must be 2D or 3D");
  for (std::size_t k = 0; k < lower_.size(); ++k) {
    require(std::isfinite(lower_[k]) && std::isfinite(upper_[k]), "region bounds must be finite");
    require(lower_[k] < upper_[k], "region lower bound must be below upper bound");
  }
}

bool Region::contains(std::span<const double> p, double tol) const {
  if (static_cast<int>(p.size()) != dim()) return false;
  for (int k = 0; k < dim(); ++k) {
    if (p[k] < lower_[k] - tol || p[k] > upper_[k] + tol) return false;
  }
  return true;
}

std::size_t axis_sample_count(double extent, double spacing) {
  // The relative slack absorbs representation error, e.g. 6 / 0.02.
  return static_cast<std::size_t>(std::floor(extent / spacing * (1.0 + 1e-12) + 1e-9)) + 1;
}

std::size_t grid_point_count(const Region& region, double spacing) {
  require(spacing > 0.0 && std::isfinite(spacing), "grid spacing must be positive");
  std::size_t total = 1;
  for (int k = 0; k < region.dim(); ++k) total *= axis_sample_count(region.extent(k), spacing);
  return total;
}

EvalGrid make_grid(const Region& region, double spacing) {
  require(spacing > 0.0 && std::isfinite(spacing), "grid spacing must be positive");
  const int dim = region.dim();
  for (int k = 0; k < dim; ++k) {
    require(spacing <= region.extent(k) * (1.0 + 1e-12), "grid spacing exceeds the region extent");
  }
  EvalGrid grid;
  grid.region = region;
  grid.spacing = spacing;
  for (int k = 0; k < dim; ++k) grid.counts.push_back(axis_sample_count(region.extent(k), spacing));

  std::size_t total = 1;
  for (auto c : grid.counts) total *= c;
  std::vector<double> coords;
  coords.reserve(total * dim);
  std::vector<std::size_t> idx(dim, 0);
  for (std::size_t n = 0; n < total; ++n) {
    for (int k = 0; k < dim; ++k) {
      coords.push_back(region.lower()[k] + static_cast<double>(idx[k]) * spacing);
    }
    for (int k = dim - 1; k >= 0; --k) {
      if (++idx[k] < grid.counts[k]) break;
      idx[k] = 0;
    }
  }
  grid.points = PointSet(dim, std::move(coords));
  return grid;
}

// ---------------------------------------------------------------------------
// Mesh helpers

double point_triangle_distance_sq(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c) {
  // Closest point by Voronoi region classification.
  const Vec3 ab = sub(b, a), ac = sub(c, a), ap = sub(p, a);
  const double d1 = dot(ab, ap), d2 = dot(ac, ap);
  auto dist_sq = [&](const Vec3& q) {
    const Vec3 d = sub(p, q);
    return dot(d, d);
  };
  if (d1 <= 0.0 && d2 <= 0.0) return dist_sq(a);

  const Vec3 bp = sub(p, b);
  const double d3 = dot(ab, bp), d4 = dot(ac, bp);
  if (d3 >= 0.0 && d4 <= d3) return dist_sq(b);

  const double vc = d1 * d4 - d3 * d2;
  if (vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0) {
    const double v = d1 / (d1 - d3);
    return dist_sq(add(a, scale(ab, v)));
  }

  const Vec3 cp = sub(p, c);
  const double d5 = dot(ab, cp), d6 = dot(ac, cp);
  if (d6 >= 0.0 && d5 <= d6) return dist_sq(c);

  const double vb = d5 * d2 - d1 * d6;
  if (vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0) {
    const double w = d2 / (d2 - d6);
    return dist_sq(add(a, scale(ac, w)));
  }

  const double va = d3 * d6 - d5 * d4;
  if (va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0) {
    const double w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
    return dist_sq(add(b, scale(sub(c, b), w)));
  }

  const double denom = 1.0 / (va + vb + vc);
  const double v = vb * denom, w = vc * denom;
  return dist_sq(add(a, add(scale(ab, v), scale(ac, w))));
}

namespace {

enum class RayHit { Miss, Hit, Ambiguous };

RayHit ray_triangle(const Vec3& orig, const Vec3& dir, const Vec3& a, const Vec3& b, const Vec3& c) {
  constexpr double kEdgeTol = 1e-10;
  const Vec3 e1 = sub(b, a), e2 = sub(c, a);
  const Vec3 pv = cross3(dir, e2);
  const double det = dot(e1, pv);
  const double scale_ref = norm(e1) * norm(e2);
  if (std::abs(det) < 1e-14 * scale_ref) {
    // Ray parallel to the triangle plane; only ambiguous if coplanar.
    const Vec3 n = cross3(e1, e2);
    return std::abs(dot(n, sub(orig, a))) < 1e-12 * scale_ref ? RayHit::Ambiguous : RayHit::Miss;
  }
  const double inv = 1.0 / det;
  const Vec3 tv = sub(orig, a);
  const double u = dot(tv, pv) * inv;
  if (u < -kEdgeTol || u > 1.0 + kEdgeTol) return RayHit::Miss;
  const Vec3 qv = cross3(tv, e1);
  const double v = dot(dir, qv) * inv;
  if (v < -kEdgeTol || u + v > 1.0 + kEdgeTol) return RayHit::Miss;
  const double t = dot(e2, qv) * inv;
  if (t < -kEdgeTol) return RayHit::Miss;
  if (u < kEdgeTol || v < kEdgeTol || u + v > 1.0 - kEdgeTol || t < kEdgeTol) return RayHit::Ambiguous;
  return RayHit::Hit;
}

}  // namespace

bool mesh_contains(const TriangleMesh& mesh, const Vec3& p) {
  static const std::array<Vec3, 5> kDirections = {{
      {0.4364357804719848, 0.5819143739626463, 0.6864064729836442},
      {-0.7071067811865476 * 0.93, 0.3, 0.6228},
      {0.1234, -0.9123, 0.3906},
      {-0.5377, -0.4112, -0.7360},
      {0.8911, 0.0771, -0.4472},
  }};
  for (const auto& raw : kDirections) {
    const Vec3 dir = scale(raw, 1.0 / norm(raw));
    int crossings = 0;
    bool ambiguous = false;
    for (const auto& f : mesh.faces) {
      const RayHit hit = ray_triangle(p, dir, mesh.vertices[f[0]], mesh.vertices[f[1]], mesh.vertices[f[2]]);
      if (hit == RayHit::Ambiguous) {
        ambiguous = true;
        break;
      }
      if (hit == RayHit::Hit) ++crossings;
    }
    if (!ambiguous) return crossings % 2 == 1;
  }
  // Every direction grazed an edge; the point is on (or extremely close to)
  // the surface, where the sign is immaterial.
  return false;
}

double mesh_signed_distance(const TriangleMesh& mesh, const Vec3& p) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& f : mesh.faces) {
    best = std::min(best, point_triangle_distance_sq(p, mesh.vertices[f[0]], mesh.vertices[f[1]],
                                                     mesh.vertices[f[2]]));
  }
  const double d = std::sqrt(best);
  if (d == 0.0) return 0.0;
  return mesh_contains(mesh, p) ? -d : d;
}

double mesh_signed_volume(const TriangleMesh& mesh) {
  double vol = 0.0;
  for (const auto& f : mesh.faces) {
    vol += dot(mesh.vertices[f[0]], cross3(mesh.vertices[f[1]], mesh.vertices[f[2]]));
  }
  return vol / 6.0;
}

namespace {

void validate_mesh(const TriangleMesh& mesh) {
  require(!mesh.faces.empty(), "mesh has no faces");
  std::map<std::pair<std::size_t, std::size_t>, int> directed;
  for (const auto& f : mesh.faces) {
    for (int k = 0; k < 3; ++k) {
      require(f[k] < mesh.vertices.size(), "mesh face references a missing vertex");
    }
    require(f[0] != f[1] && f[1] != f[2] && f[0] != f[2], "mesh has a degenerate face");
    for (int k = 0; k < 3; ++k) ++directed[{f[k], f[(k + 1) % 3]}];
  }
  for (const auto& [edge, count] : directed) {
    require(count == 1, "mesh edge is used twice in the same direction (not orientable)");
    auto it = directed.find({edge.second, edge.first});
    require(it != directed.end() && it->second == 1, "mesh is not closed");
  }
}

TriangleMesh box_mesh(const Vec3& h) {
  TriangleMesh m;
  for (int i = 0; i < 8; ++i) {
    m.vertices.push_back({(i & 1) ? h[0] : -h[0], (i & 2) ? h[1] : -h[1], (i & 4) ? h[2] : -h[2]});
  }
  // Outward winding.
  m.faces = {{0, 2, 1}, {1, 2, 3}, {4, 5, 6}, {5, 7, 6}, {0, 1, 4}, {1, 5, 4},
             {2, 6, 3}, {3, 6, 7}, {0, 4, 2}, {2, 4, 6}, {1, 3, 5}, {3, 7, 5}};
  return m;
}

}  // namespace

TriangleMesh parse_off(std::istream& in) {
  // Comments start with '#'; tokens may be spread over lines.
  std::ostringstream clean;
  std::string line;
  while (std::getline(in, line)) {
    if (auto pos = line.find('#'); pos != std::string::npos) line.erase(pos);
    clean << line << '\n';
  }
  std::istringstream ts(clean.str());
  std::string magic;
  if (!(ts >> magic) || magic != "OFF") fail(ErrorCode::Parse, "OFF: missing 'OFF' header");
  std::size_t nv = 0, nf = 0, ne = 0;
  if (!(ts >> nv >> nf >> ne)) fail(ErrorCode::Parse, "OFF: malformed counts line");
  TriangleMesh mesh;
  mesh.vertices.resize(nv);
  for (std::size_t i = 0; i < nv; ++i) {
    auto& v = mesh.vertices[i];
    if (!(ts >> v[0] >> v[1] >> v[2])) {
      fail(ErrorCode::Parse, "OFF: malformed vertex " + std::to_string(i));
    }
  }
  for (std::size_t i = 0; i < nf; ++i) {
    std::size_t k = 0;
    if (!(ts >> k) || k < 3) fail(ErrorCode::Parse, "OFF: malformed face " + std::to_string(i));
    std::vector<std::size_t> idx(k);
    for (auto& j : idx) {
      if (!(ts >> j)) fail(ErrorCode::Parse, "OFF: malformed face " + std::to_string(i));
    }
    for (std::size_t j = 1; j + 1 < k; ++j) mesh.faces.push_back({idx[0], idx[j], idx[j + 1]});
  }
  return mesh;
}

TriangleMesh load_off(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::Io, "cannot open mesh file: " + path);
  return parse_off(in);
}

void write_off(std::ostream& out, const TriangleMesh& mesh) {
  out << "OFF\n" << mesh.vertices.size() << ' ' << mesh.faces.size() << " 0\n";
  out.precision(17);
  for (const auto& v : mesh.vertices) out << v[0] << ' ' << v[1] << ' ' << v[2] << '\n';
  for (const auto& f : mesh.faces) out << "3 " << f[0] << ' ' << f[1] << ' ' << f[2] << '\n';
}

TriangleMesh extrude_profile(const std::vector<std::array<double, 2>>& profile, double y_min,
                             double y_max) {
  require(profile.size() >= 3, "profile needs at least three vertices");
  require(y_min < y_max, "extrusion range is empty");
  const std::size_t n = profile.size();
  TriangleMesh m;
  for (const auto& p : profile) m.vertices.push_back({p[0], y_min, p[1]});
  for (const auto& p : profile) m.vertices.push_back({p[0], y_max, p[1]});
  for (std::size_t i = 1; i + 1 < n; ++i) {
    m.faces.push_back({0, i, i + 1});
    m.faces.push_back({n, n + i + 1, n + i});
  }
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = (i + 1) % n;
    m.faces.push_back({i, n + i, j});
    m.faces.push_back({j, n + i, n + j});
  }
  if (mesh_signed_volume(m) < 0.0) {
    for (auto& f : m.faces) std::swap(f[1], f[2]);
  }
  return m;
}

TriangleMesh default_construction_mesh() {
  // Low block over x1 in [-2, 2] with a tower over [-2, -0.5]; star shaped
  // about the inner corner, which is listed first.
  const std::vector<std::array<double, 2>> profile = {
      {-0.5, 1.0}, {-0.5, 1.6}, {-2.0, 1.6}, {-2.0, 0.0}, {2.0, 0.0}, {2.0, 1.0}};
  return extrude_profile(profile, -0.75, 0.75);
}

// ---------------------------------------------------------------------------
// ShapeModel

const char* to_string(ShapeKind kind) noexcept {
  switch (kind) {
    case ShapeKind::Square: return "square";
    case ShapeKind::Circle: return "circle";
    case ShapeKind::Cross: return "cross";
    case ShapeKind::Box3D: return "box3d";
    case ShapeKind::PolyMesh: return "polymesh";
  }
  return "?";
}

ShapeKind shape_kind_from_string(const std::string& name) {
  if (name == "square") return ShapeKind::Square;
  if (name == "circle") return ShapeKind::Circle;
  if (name == "cross") return ShapeKind::Cross;
  if (name == "box3d" || name == "box") return ShapeKind::Box3D;
  if (name == "polymesh" || name == "mesh") return ShapeKind::PolyMesh;
  fail(ErrorCode::UnsupportedShape, "unknown shape kind: " + name);
}

ShapeModel ShapeModel::square(double half_width, std::vector<double> translation) {
  require(half_width > 0.0 && std::isfinite(half_width), "square half width must be positive");
  check_translation(translation, 2);
  ShapeModel s;
  s.kind_ = ShapeKind::Square;
  s.params_ = {half_width};
  s.translation_ = std::move(translation);
  return s;
}

ShapeModel ShapeModel::circle(double radius, std::vector<double> translation) {
  require(radius > 0.0 && std::isfinite(radius), "circle radius must be positive");
  check_translation(translation, 2);
  ShapeModel s;
  s.kind_ = ShapeKind::Circle;
  s.params_ = {radius};
  s.translation_ = std::move(translation);
  return s;
}

ShapeModel ShapeModel::cross(double half_length, double half_width, std::vector<double> translation) {
  require(half_length > 0.0 && half_width > 0.0, "cross dimensions must be positive");
  require(half_width < half_length, "cross arm width must be below its length");
  check_translation(translation, 2);
  ShapeModel s;
  s.kind_ = ShapeKind::Cross;
  s.params_ = {half_length, half_width};
  s.translation_ = std::move(translation);
  return s;
}

ShapeModel ShapeModel::box3d(Vec3 half_extents, std::vector<double> translation) {
  for (double h : half_extents) require(h > 0.0 && std::isfinite(h), "box half extents must be positive");
  check_translation(translation, 3);
  ShapeModel s;
  s.kind_ = ShapeKind::Box3D;
  s.params_ = {half_extents[0], half_extents[1], half_extents[2]};
  s.translation_ = std::move(translation);
  s.local_mesh_ = box_mesh(half_extents);
  return s;
}

ShapeModel ShapeModel::poly_mesh(TriangleMesh mesh, std::vector<double> translation) {
  check_translation(translation, 3);
  validate_mesh(mesh);
  const double vol = mesh_signed_volume(mesh);
  require(std::abs(vol) > 0.0, "mesh encloses no volume");
  if (vol < 0.0) {
    for (auto& f : mesh.faces) std::swap(f[1], f[2]);
  }
  ShapeModel s;
  s.kind_ = ShapeKind::PolyMesh;
  s.translation_ = std::move(translation);
  s.local_mesh_ = std::move(mesh);
  return s;
}

std::vector<std::array<double, 2>> ShapeModel::outline() const {
  std::vector<std::array<double, 2>> poly;
  if (kind_ == ShapeKind::Square) {
    const double h = params_[0];
    poly = {{-h, -h}, {h, -h}, {h, h}, {-h, h}};
  } else if (kind_ == ShapeKind::Cross) {
    const double L = params_[0], w = params_[1];
    poly = {{-w, -L}, {w, -L}, {w, -w}, {L, -w}, {L, w}, {w, w},
            {w, L},   {-w, L}, {-w, w}, {-L, w}, {-L, -w}, {-w, -w}};
  } else {
    fail(ErrorCode::UnsupportedShape, std::string("no polygon outline for ") + to_string(kind_));
  }
  for (auto& p : poly) {
    p[0] += translation_[0];
    p[1] += translation_[1];
  }
  return poly;
}

TriangleMesh ShapeModel::mesh() const {
  if (kind_ != ShapeKind::Box3D && kind_ != ShapeKind::PolyMesh) {
    fail(ErrorCode::UnsupportedShape, std::string("no mesh for ") + to_string(kind_));
  }
  TriangleMesh m = local_mesh_;
  const Vec3 t = to_vec3(translation_);
  for (auto& v : m.vertices) v = add(v, t);
  return m;
}

double polygon_signed_distance(const std::vector<std::array<double, 2>>& poly, double x, double y) {
  double best = std::numeric_limits<double>::infinity();
  bool inside = false;
  const std::size_t n = poly.size();
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const double ax = poly[j][0], ay = poly[j][1], bx = poly[i][0], by = poly[i][1];
    const double ex = bx - ax, ey = by - ay;
    const double wx = x - ax, wy = y - ay;
    const double t = std::clamp((wx * ex + wy * ey) / (ex * ex + ey * ey), 0.0, 1.0);
    const double dx = wx - t * ex, dy = wy - t * ey;
    best = std::min(best, dx * dx + dy * dy);
    if ((ay > y) != (by > y) && x < ax + (y - ay) * ex / ey) inside = !inside;
  }
  const double d = std::sqrt(best);
  return inside ? -d : d;
}

double ShapeModel::signed_distance(std::span<const double> x) const {
  require(static_cast<int>(x.size()) == dim(), "point dimension does not match shape");
  switch (kind_) {
    case ShapeKind::Circle: {
      return std::hypot(x[0] - translation_[0], x[1] - translation_[1]) - params_[0];
    }
    case ShapeKind::Square: {
      const double qx = std::abs(x[0] - translation_[0]) - params_[0];
      const double qy = std::abs(x[1] - translation_[1]) - params_[0];
      return std::hypot(std::max(qx, 0.0), std::max(qy, 0.0)) + std::min(std::max(qx, qy), 0.0);
    }
    case ShapeKind::Cross: {
      return polygon_signed_distance(outline(), x[0], x[1]);
    }
    case ShapeKind::Box3D: {
      double outside_sq = 0.0, inner = -std::numeric_limits<double>::infinity();
      for (int k = 0; k < 3; ++k) {
        const double q = std::abs(x[k] - translation_[k]) - params_[k];
        if (q > 0.0) outside_sq += q * q;
        inner = std::max(inner, q);
      }
      return std::sqrt(outside_sq) + std::min(inner, 0.0);
    }
    case ShapeKind::PolyMesh: {
      const Vec3 t = to_vec3(translation_);
      return mesh_signed_distance(local_mesh_, sub(to_vec3(x), t));
    }
  }
  return 0.0;
}

std::pair<std::vector<double>, std::vector<double>> ShapeModel::bounds() const {
  std::vector<double> lo(dim()), hi(dim());
  switch (kind_) {
    case ShapeKind::Circle:
    case ShapeKind::Square:
      for (int k = 0; k < 2; ++k) {
        lo[k] = translation_[k] - params_[0];
        hi[k] = translation_[k] + params_[0];
      }
      break;
    case ShapeKind::Cross:
      for (int k = 0; k < 2; ++k) {
        lo[k] = translation_[k] - params_[0];
        hi[k] = translation_[k] + params_[0];
      }
      break;
    case ShapeKind::Box3D:
    case ShapeKind::PolyMesh: {
      const TriangleMesh m = mesh();
      for (int k = 0; k < 3; ++k) {
        lo[k] = std::numeric_limits<double>::infinity();
        hi[k] = -std::numeric_limits<double>::infinity();
      }
      for (const auto& v : m.vertices) {
        for (int k = 0; k < 3; ++k) {
          lo[k] = std::min(lo[k], v[k]);
          hi[k] = std::max(hi[k], v[k]);
        }
      }
      break;
    }
  }
  return {lo, hi};
}

// ---------------------------------------------------------------------------
// Surface sampling

namespace {

std::vector<SurfaceSample> sample_polyline(const std::vector<std::array<double, 2>>& poly, double spacing) {
  const std::size_t n = poly.size();
  std::vector<double> start(n + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& a = poly[i];
    const auto& b = poly[(i + 1) % n];
    start[i + 1] = start[i] + std::hypot(b[0] - a[0], b[1] - a[1]);
  }
  const double perimeter = start[n];
  const auto count = static_cast<std::size_t>(std::ceil(perimeter / spacing - 1e-9));
  std::vector<SurfaceSample> out;
  out.reserve(count);
  std::size_t edge = 0;
  for (std::size_t k = 0; k < count; ++k) {
    const double s = static_cast<double>(k) * spacing;
    while (edge + 1 < n && s >= start[edge + 1] - 1e-12) ++edge;
    const auto& a = poly[edge];
    const auto& b = poly[(edge + 1) % n];
    const double len = start[edge + 1] - start[edge];
    const double t = std::clamp((s - start[edge]) / len, 0.0, 1.0);
    const double ex = (b[0] - a[0]) / len, ey = (b[1] - a[1]) / len;
    SurfaceSample smp;
    smp.point = {a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])};
    // Counter-clockwise outline: outward normal is the edge direction rotated by -90 degrees.
    smp.normal = {ey, -ex};
    out.push_back(std::move(smp));
  }
  return out;
}

std::vector<SurfaceSample> sample_mesh(const TriangleMesh& mesh, double spacing) {
  Vec3 lo{1e300, 1e300, 1e300};
  for (const auto& v : mesh.vertices) {
    for (int k = 0; k < 3; ++k) lo[k] = std::min(lo[k], v[k]);
  }
  std::vector<SurfaceSample> out;
  // Samples on edges and corners take the mean of the distinct incident face normals.
  std::map<std::array<long long, 3>, std::size_t> index;
  std::vector<std::vector<Vec3>> normals;
  auto key_of = [](const Vec3& p) {
    return std::array<long long, 3>{std::llround(p[0] * 1e8), std::llround(p[1] * 1e8),
                                    std::llround(p[2] * 1e8)};
  };

  for (const auto& f : mesh.faces) {
    const Vec3 &a = mesh.vertices[f[0]], &b = mesh.vertices[f[1]], &c = mesh.vertices[f[2]];
    Vec3 n = cross3(sub(b, a), sub(c, a));
    const double area2 = norm(n);
    if (area2 == 0.0) continue;
    n = scale(n, 1.0 / area2);

    // In-plane frame. Axis-aligned faces use a lattice anchored at the mesh
    // bounding box so that neighbouring triangles share lattice points.
    int axis = -1;
    for (int k = 0; k < 3; ++k) {
      if (std::abs(std::abs(n[k]) - 1.0) < 1e-12) axis = k;
    }
    Vec3 origin, u, v;
    if (axis >= 0) {
      const int k1 = (axis + 1) % 3, k2 = (axis + 2) % 3;
      origin = lo;
      origin[axis] = a[axis];
      u = {0, 0, 0};
      v = {0, 0, 0};
      u[k1] = 1.0;
      v[k2] = 1.0;
    } else {
      origin = a;
      u = scale(sub(b, a), 1.0 / norm(sub(b, a)));
      v = cross3(n, u);
    }
    // Range of lattice indices covering the triangle.
    double umin = 1e300, umax = -1e300, vmin = 1e300, vmax = -1e300;
    for (const Vec3* p : {&a, &b, &c}) {
      const double pu = dot(sub(*p, origin), u), pv = dot(sub(*p, origin), v);
      umin = std::min(umin, pu);
      umax = std::max(umax, pu);
      vmin = std::min(vmin, pv);
      vmax = std::max(vmax, pv);
    }
    const auto i0 = static_cast<long long>(std::ceil(umin / spacing - 1e-9));
    const auto i1 = static_cast<long long>(std::floor(umax / spacing + 1e-9));
    const auto j0 = static_cast<long long>(std::ceil(vmin / spacing - 1e-9));
    const auto j1 = static_cast<long long>(std::floor(vmax / spacing + 1e-9));
    const Vec3 e0 = sub(b, a), e1 = sub(c, a);
    const double d00 = dot(e0, e0), d01 = dot(e0, e1), d11 = dot(e1, e1);
    const double denom = d00 * d11 - d01 * d01;
    for (long long i = i0; i <= i1; ++i) {
      for (long long j = j0; j <= j1; ++j) {
        Vec3 p = add(origin, add(scale(u, i * spacing), scale(v, j * spacing)));
        if (axis >= 0) p[axis] = a[axis];
        const Vec3 w = sub(p, a);
        const double d20 = dot(w, e0), d21 = dot(w, e1);
        const double bv = (d11 * d20 - d01 * d21) / denom;
        const double bw = (d00 * d21 - d01 * d20) / denom;
        if (bv < -1e-9 || bw < -1e-9 || bv + bw > 1.0 + 1e-9) continue;
        const auto [it, inserted] = index.emplace(key_of(p), out.size());
        if (inserted) {
          out.push_back({{p[0], p[1], p[2]}, {n[0], n[1], n[2]}});
          normals.push_back({n});
          continue;
        }
        auto& list = normals[it->second];
        const bool known = std::any_of(list.begin(), list.end(), [&](const Vec3& m) { return dot(m, n) > 1.0 - 1e-9; });
        if (!known) list.push_back(n);
      }
    }
  }
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (normals[i].size() < 2) continue;
    Vec3 sum{0, 0, 0};
    for (const auto& m : normals[i]) sum = add(sum, m);
    const double len = norm(sum);
    if (len > 1e-12) out[i].normal = {sum[0] / len, sum[1] / len, sum[2] / len};
  }
  return out;
}

}  // namespace

std::vector<SurfaceSample> surface_samples(const ShapeModel& shape, SurfaceSpacing spacing) {
  require(spacing.value > 0.0 && std::isfinite(spacing.value), "surface spacing must be positive");
  switch (shape.kind()) {
    case ShapeKind::Circle: {
      const double r = shape.parameters()[0];
      const double step = spacing.unit == SurfaceSpacing::Unit::Degrees ? spacing.value * kPi / 180.0
                                                                      : spacing.value / r;
      const auto count = static_cast<std::size_t>(std::ceil(2.0 * kPi / step - 1e-9));
      std::vector<SurfaceSample> out;
      out.reserve(count);
      const auto& t = shape.translation();
      for (std::size_t k = 0; k < count; ++k) {
        const double th = static_cast<double>(k) * step;
        const double c = std::cos(th), s = std::sin(th);
        out.push_back({{t[0] + r * c, t[1] + r * s}, {c, s}});
      }
      return out;
    }
    case ShapeKind::Square:
    case ShapeKind::Cross:
      if (spacing.unit == SurfaceSpacing::Unit::Degrees) {
        fail(ErrorCode::UnsupportedShape, "angular spacing is only supported for circles");
      }
      return sample_polyline(shape.outline(), spacing.value);
    case ShapeKind::Box3D:
    case ShapeKind::PolyMesh:
      if (spacing.unit == SurfaceSpacing::Unit::Degrees) {
        fail(ErrorCode::UnsupportedShape, "angular spacing is only supported for circles");
      }
      return sample_mesh(shape.mesh(), spacing.value);
  }
  fail(ErrorCode::UnsupportedShape, "unsupported shape kind");
}

}  // namespace rgpis
