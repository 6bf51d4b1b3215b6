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

// Squared-exponential kernel blocks. Every routine has a portable scalar
// reference in namespace `scalar` and an AVX2/FMA variant in namespace
// `avx2`; the unqualified entry points dispatch on the ISA selected at
// runtime (see active_isa()).

#include <cstddef>
#include <span>
#include <vector>

#include "rgpis/geometry.hpp"

namespace rgpis::simd {

enum class Isa { Scalar, Avx2 };

const char* to_string(Isa isa) noexcept;

/// True if the CPU (and the build) can run the given variant.
bool isa_supported(Isa isa) noexcept;

/// Fastest supported variant.
Isa best_isa() noexcept;

/// Variant used by the dispatching entry points. Initialised from the
/// RGPIS_SIMD environment variable ("scalar" or "avx2") if set, otherwise
/// best_isa().
Isa active_isa() noexcept;

/// Throws Error(InvalidArgument) if the variant is not supported.
void set_active_isa(Isa isa);

/// Structure-of-arrays point storage: coordinate k of point i lives at
/// data[k * size + i].
class SoaPoints {
 public:
  SoaPoints() = default;
  explicit SoaPoints(const PointSet& points);

  int dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return size_; }
  const double* axis(int k) const noexcept { return data_.data() + k * size_; }

 private:
  int dim_ = 0;
  std::size_t size_ = 0;
  std::vector<double> data_;
};

/// Non-owning window [offset, offset + count) into a SoaPoints.
struct SoaView {
  const double* axis[3] = {nullptr, nullptr, nullptr};
  std::size_t size = 0;
  int dim = 0;

  static SoaView of(const SoaPoints& pts, std::size_t offset = 0, std::size_t count = static_cast<std::size_t>(-1));
};

/// k(x, z) = signal_variance * exp(-|x - z|^2 * inv_two_length_scale_sq)
struct SeKernel {
  double inv_two_length_scale_sq = 1.0;
  double signal_variance = 1.0;
};

/// out[j * train.size + i] = k(test_j, train_i). `out` must hold
/// test.size * train.size values.
void se_cross_covariance(const SoaView& test, const SoaView& train, SeKernel kernel,
                         std::span<double> out);

/// out[j] = sum_i k(test_j, train_i) * weights[i].
void se_weighted_sum(const SoaView& test, const SoaView& train, SeKernel kernel,
                     std::span<const double> weights, std::span<double> out);

namespace scalar {
void se_cross_covariance(const SoaView& test, const SoaView& train, SeKernel kernel,
                         std::span<double> out);
void se_weighted_sum(const SoaView& test, const SoaView& train, SeKernel kernel,
                     std::span<const double> weights, std::span<double> out);
void exp_nonpositive(std::span<const double> x, std::span<double> out);
}  // namespace scalar

namespace avx2 {
void se_cross_covariance(const SoaView& test, const SoaView& train, SeKernel kernel,
                         std::span<double> out);
void se_weighted_sum(const SoaView& test, const SoaView& train, SeKernel kernel,
                     std::span<const double> weights, std::span<double> out);
/// Vectorised exp for arguments <= 0 (values below -708 flush to zero).
void exp_nonpositive(std::span<const double> x, std::span<double> out);
}  // namespace avx2

}  // namespace rgpis::simd
