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

// Flight logs to labelled datasets: threshold contact detection, rotation
// into the ground frame, outward-normal estimate, contact localisation on
// the vehicle's circumscribed cylinder and internal-point synthesis.

#include <iosfwd>
#include <string>
#include <vector>

#include "rgpis/dataset.hpp"
#include "rgpis/geometry.hpp"

namespace rgpis {

struct ImuSample {
  double t = 0.0;
  Vec3 accel_body{};  // G, body frame
  double roll = 0.0, pitch = 0.0, yaw = 0.0;
  Vec3 position{};  // centre of gravity, ground frame (m)
};

struct VehicleGeometry {
  double r = 0.25;    // cylinder radius
  double h = 0.05;    // half-height offset
  double d_in = 0.1;  // internal thickness

  void validate() const;
};

struct DetectionConfig {
  double a0 = 0.6;             // G
  double contact_rate = 25.0;  // Hz
  double free_rate = 0.5;      // Hz
  /// Subtract gravity (rotated into the body frame) before thresholding.
  bool compensate_gravity = false;

  void validate() const;
};

struct DetectedEvent {
  std::size_t sample;  // index into the log
  Label y;
};

/// Contacts: the first super-threshold sample opens a window of
/// 1 / contact_rate seconds; later super-threshold samples inside the window
/// are merged into it. Free samples are emitted when at least 1 / free_rate
/// seconds have passed since the previous emitted free sample.
std::vector<DetectedEvent> detect_events(const std::vector<ImuSample>& log, const DetectionConfig& cfg);

/// R(roll) R(pitch) R(yaw) a, with R the right-handed rotations about x, y
/// and z. yaw = pi/2 maps (1, 0, 0) to (0, 1, 0).
Vec3 body_to_ground(const Vec3& a_body, double roll, double pitch, double yaw);

/// Unit vector along a_ground for contacts, zero otherwise.
Vec3 estimate_normal(const Vec3& a_ground, Label y);

/// x - r n on the lateral surface (max(|n1|, |n2|) >= |n3|), x - h n on the caps.
Vec3 localize_contact(const Vec3& x, const Vec3& n_hat, const VehicleGeometry& geom);

/// x_c - d_in n.
Vec3 synthesize_internal(const Vec3& x_c, const Vec3& n_hat, double d_in);

struct IngestSummary {
  std::size_t samples = 0;
  std::size_t contact_events = 0;
  std::size_t free_events = 0;
  std::size_t n_contact = 0;  // emitted y = 0
  std::size_t n_external = 0;  // emitted y = +1
  std::size_t n_internal = 0;  // emitted y = -1
  std::size_t rejected_outside_region = 0;  // events dropped by the region clip
};

struct IngestResult {
  Dataset data;
  IngestSummary summary;
};

/// Contact events contribute a contact point and its internal point; the
/// pair is dropped if either point leaves the region. Free events contribute
/// the logged position.
IngestResult build_dataset(const std::vector<ImuSample>& log, const DetectionConfig& cfg, const VehicleGeometry& geom,
                           const Region& region);

/// Processes the logs in parallel and concatenates them in log order.
IngestResult build_dataset(const std::vector<std::vector<ImuSample>>& logs, const DetectionConfig& cfg,
                           const VehicleGeometry& geom, const Region& region, unsigned jobs = 1);

// Flight-log CSV: t,ax,ay,az,roll,pitch,yaw,px,py,pz (one row per sample).
std::vector<ImuSample> read_flight_log(std::istream& in);
std::vector<ImuSample> load_flight_log(const std::string& path);
void write_flight_log(std::ostream& out, const std::vector<ImuSample>& log);

}  // namespace rgpis
