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

#include "rgpis/contact_pipeline.hpp"

#include <cmath>
#include <fstream>
#include <future>
#include <istream>
#include <ostream>

#include "rgpis/csv.hpp"
#include "rgpis/error.hpp"

namespace rgpis {

namespace {

double norm(const Vec3& v) { return std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]); }

using Mat3 = std::array<Vec3, 3>;

Mat3 rotation(double roll, double pitch, double yaw) {
  const double cr = std::cos(roll), sr = std::sin(roll);
  const double cp = std::cos(pitch), sp = std::sin(pitch);
  const double cy = std::cos(yaw), sy = std::sin(yaw);
  // Rx(roll) * Ry(pitch) * Rz(yaw)
  return {{{cp * cy, -cp * sy, sp},
           {sr * sp * cy + cr * sy, -sr * sp * sy + cr * cy, -sr * cp},
           {-cr * sp * cy + sr * sy, cr * sp * sy + sr * cy, cr * cp}}};
}

Vec3 rotate(const Mat3& r, const Vec3& v) {
  return {r[0][0] * v[0] + r[0][1] * v[1] + r[0][2] * v[2], r[1][0] * v[0] + r[1][1] * v[1] + r[1][2] * v[2],
          r[2][0] * v[0] + r[2][1] * v[1] + r[2][2] * v[2]};
}

Vec3 rotate_inverse(const Mat3& r, const Vec3& v) {
  return {r[0][0] * v[0] + r[1][0] * v[1] + r[2][0] * v[2], r[0][1] * v[0] + r[1][1] * v[1] + r[2][1] * v[2],
          r[0][2] * v[0] + r[1][2] * v[1] + r[2][2] * v[2]};
}

Vec3 effective_accel(const ImuSample& s, const DetectionConfig& cfg) {
  if (!cfg.compensate_gravity) return s.accel_body;
  // Specific force of a hovering vehicle is +1 G along ground z.
  const Vec3 g_body = rotate_inverse(rotation(s.roll, s.pitch, s.yaw), {0.0, 0.0, 1.0});
  return {s.accel_body[0] - g_body[0], s.accel_body[1] - g_body[1], s.accel_body[2] - g_body[2]};
}

std::string at_time(double t) { return "sample at t = " + csv::number(t) + " s: "; }

}  // namespace

void VehicleGeometry::validate() const {
  require(r > 0.0 && h > 0.0 && d_in > 0.0, "vehicle geometry: r, h and d_in must be positive");
}

void DetectionConfig::validate() const {
  require(a0 > 0.0, "detection: a0 must be positive");
  require(contact_rate > 0.0 && free_rate > 0.0, "detection: rates must be positive");
}

std::vector<DetectedEvent> detect_events(const std::vector<ImuSample>& log, const DetectionConfig& cfg) {
  cfg.validate();
  require(!log.empty(), "detect_events: empty log");
  const double contact_window = 1.0 / cfg.contact_rate;
  const double free_period = 1.0 / cfg.free_rate;
  std::vector<DetectedEvent> events;
  bool have_contact = false, have_free = false;
  double last_contact = 0.0, last_free = 0.0;
  for (std::size_t i = 0; i < log.size(); ++i) {
    const auto& s = log[i];
    require(std::isfinite(s.t) && std::isfinite(s.roll) && std::isfinite(s.pitch) && std::isfinite(s.yaw),
            at_time(s.t) + "non-finite time or attitude");
    if (i > 0) require(s.t >= log[i - 1].t, at_time(s.t) + "time stamps decrease");
    if (norm(effective_accel(s, cfg)) > cfg.a0) {
      if (!have_contact || s.t - last_contact >= contact_window) {
        events.push_back({i, Label::Surface});
        have_contact = true;
        last_contact = s.t;
      }
    } else if (!have_free || s.t - last_free >= free_period) {
      events.push_back({i, Label::Outside});
      have_free = true;
      last_free = s.t;
    }
  }
  return events;
}

Vec3 body_to_ground(const Vec3& a_body, double roll, double pitch, double yaw) {
  return rotate(rotation(roll, pitch, yaw), a_body);
}

Vec3 estimate_normal(const Vec3& a_ground, Label y) {
  if (y != Label::Surface) return {0.0, 0.0, 0.0};
  const double n = norm(a_ground);
  if (!(n > 0.0) || !std::isfinite(n)) fail(ErrorCode::DegenerateContact, "contact with zero acceleration");
  return {a_ground[0] / n, a_ground[1] / n, a_ground[2] / n};
}

Vec3 localize_contact(const Vec3& x, const Vec3& n, const VehicleGeometry& geom) {
  require(std::abs(norm(n) - 1.0) <= 1e-9, "localize_contact: normal is not a unit vector");
  const double d = std::max(std::abs(n[0]), std::abs(n[1])) >= std::abs(n[2]) ? geom.r : geom.h;
  return {x[0] - d * n[0], x[1] - d * n[1], x[2] - d * n[2]};
}

Vec3 synthesize_internal(const Vec3& x_c, const Vec3& n, double d_in) {
  require(std::abs(norm(n) - 1.0) <= 1e-9, "synthesize_internal: normal is not a unit vector");
  require(d_in > 0.0, "synthesize_internal: d_in must be positive");
  return {x_c[0] - d_in * n[0], x_c[1] - d_in * n[1], x_c[2] - d_in * n[2]};
}

IngestResult build_dataset(const std::vector<ImuSample>& log, const DetectionConfig& cfg, const VehicleGeometry& geom,
                           const Region& region) {
  geom.validate();
  require(region.dim() == 3, "flight data needs a 3D region");
  IngestResult res;
  res.data.region = region;
  res.data.provenance = Provenance::FlightLog;
  res.summary.samples = log.size();
  auto vec = [](const Vec3& v) { return std::vector<double>(v.begin(), v.end()); };
  for (const auto& ev : detect_events(log, cfg)) {
    const auto& s = log[ev.sample];
    try {
      if (ev.y == Label::Outside) {
        ++res.summary.free_events;
        if (!region.contains(s.position)) {
          ++res.summary.rejected_outside_region;
          continue;
        }
        res.data.points.push_back({vec(s.position), Label::Outside, std::nullopt, false});
        ++res.summary.n_external;
        continue;
      }
      ++res.summary.contact_events;
      const Vec3 a_ground = body_to_ground(effective_accel(s, cfg), s.roll, s.pitch, s.yaw);
      const Vec3 n = estimate_normal(a_ground, Label::Surface);
      const Vec3 x_c = localize_contact(s.position, n, geom);
      const Vec3 x_in = synthesize_internal(x_c, n, geom.d_in);
      if (!region.contains(x_c) || !region.contains(x_in)) {
        ++res.summary.rejected_outside_region;
        continue;
      }
      res.data.points.push_back({vec(x_c), Label::Surface, vec(n), false});
      res.data.points.push_back({vec(x_in), Label::Inside, std::nullopt, false});
      res.summary.n_contact += 1;
      res.summary.n_internal += 1;
    } catch (const Error& e) {
      fail(e.code(), at_time(s.t) + e.what());
    }
  }
  return res;
}

IngestResult build_dataset(const std::vector<std::vector<ImuSample>>& logs, const DetectionConfig& cfg,
                           const VehicleGeometry& geom, const Region& region, unsigned jobs) {
  require(!logs.empty(), "no flight logs given");
  std::vector<IngestResult> parts(logs.size());
  const std::size_t workers = std::max(1u, jobs);
  for (std::size_t start = 0; start < logs.size(); start += workers) {
    std::vector<std::future<IngestResult>> batch;
    const std::size_t end = std::min(logs.size(), start + workers);
    for (std::size_t i = start; i < end; ++i) {
      batch.push_back(std::async(workers > 1 ? std::launch::async : std::launch::deferred,
                                 [&, i] { return build_dataset(logs[i], cfg, geom, region); }));
    }
    for (std::size_t i = start; i < end; ++i) {
      try {
        parts[i] = batch[i - start].get();
      } catch (const Error& e) {
        fail(e.code(), "log " + std::to_string(i) + ": " + e.what());
      }
    }
  }
  IngestResult merged;
  merged.data.region = region;
  merged.data.provenance = Provenance::FlightLog;
  for (auto& p : parts) {
    for (auto& pt : p.data.points) merged.data.points.push_back(std::move(pt));
    merged.summary.samples += p.summary.samples;
    merged.summary.contact_events += p.summary.contact_events;
    merged.summary.free_events += p.summary.free_events;
    merged.summary.n_contact += p.summary.n_contact;
    merged.summary.n_external += p.summary.n_external;
    merged.summary.n_internal += p.summary.n_internal;
    merged.summary.rejected_outside_region += p.summary.rejected_outside_region;
  }
  return merged;
}

std::vector<ImuSample> read_flight_log(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) fail(ErrorCode::Parse, "flight log: missing header");
  const std::vector<std::string> expected = {"t", "ax", "ay", "az", "roll", "pitch", "yaw", "px", "py", "pz"};
  if (csv::split(line) != expected) {
    fail(ErrorCode::Parse, "flight log line 1: expected header t,ax,ay,az,roll,pitch,yaw,px,py,pz");
  }
  std::vector<ImuSample> log;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (csv::is_blank(line)) continue;
    const auto f = csv::split(line);
    const std::string where = "flight log line " + std::to_string(line_no);
    if (f.size() != expected.size()) fail(ErrorCode::Parse, where + ": expected 10 fields");
    double v[10];
    for (std::size_t k = 0; k < 10; ++k) v[k] = csv::parse_double(f[k], where);
    ImuSample s;
    s.t = v[0];
    s.accel_body = {v[1], v[2], v[3]};
    s.roll = v[4];
    s.pitch = v[5];
    s.yaw = v[6];
    s.position = {v[7], v[8], v[9]};
    if (!log.empty() && s.t < log.back().t) fail(ErrorCode::Parse, where + ": time stamps decrease");
    log.push_back(s);
  }
  return log;
}

std::vector<ImuSample> load_flight_log(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::Io, "cannot open flight log: " + path);
  try {
    return read_flight_log(in);
  } catch (const Error& e) {
    fail(e.code(), path + ": " + e.what());
  }
}

void write_flight_log(std::ostream& out, const std::vector<ImuSample>& log) {
  out << "t,ax,ay,az,roll,pitch,yaw,px,py,pz\n";
  for (const auto& s : log) {
    out << csv::number(s.t);
    for (double v : s.accel_body) out << ',' << csv::number(v);
    out << ',' << csv::number(s.roll) << ',' << csv::number(s.pitch) << ',' << csv::number(s.yaw);
    for (double v : s.position) out << ',' << csv::number(v);
    out << '\n';
  }
}

}  // namespace rgpis
