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

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <string>

#include "rgpis/error.hpp"
#include "rgpis/simd/kernels.hpp"

namespace rgpis::simd {

namespace {

Isa initial_isa() noexcept {
  if (const char* env = std::getenv("RGPIS_SIMD")) {
    const std::string v(env);
    if (v == "scalar") return Isa::Scalar;
    if (v == "avx2" && isa_supported(Isa::Avx2)) return Isa::Avx2;
  }
  return best_isa();
}

std::atomic<Isa>& selected() {
  static std::atomic<Isa> isa{initial_isa()};
  return isa;
}

}  // namespace

const char* to_string(Isa isa) noexcept {
  switch (isa) {
    case Isa::Scalar: return "scalar";
    case Isa::Avx2: return "avx2";
  }
  return "?";
}

bool isa_supported(Isa isa) noexcept {
  switch (isa) {
    case Isa::Scalar: return true;
    case Isa::Avx2:
#if defined(__x86_64__) && (defined(__GNUC__) || defined(__clang__))
      return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
      return false;
#endif
  }
  return false;
}

Isa best_isa() noexcept { return isa_supported(Isa::Avx2) ? Isa::Avx2 : Isa::Scalar; }

Isa active_isa() noexcept { return selected().load(std::memory_order_relaxed); }

void set_active_isa(Isa isa) {
  require(isa_supported(isa), std::string("SIMD variant not supported here: ") + to_string(isa));
  selected().store(isa, std::memory_order_relaxed);
}

SoaPoints::SoaPoints(const PointSet& points) : dim_(points.dim()), size_(points.size()) {
  data_.resize(static_cast<std::size_t>(dim_) * size_);
  const auto& c = points.coords();
  for (std::size_t i = 0; i < size_; ++i) {
    for (int k = 0; k < dim_; ++k) data_[k * size_ + i] = c[i * dim_ + k];
  }
}

SoaView SoaView::of(const SoaPoints& pts, std::size_t offset, std::size_t count) {
  SoaView v;
  v.dim = pts.dim();
  v.size = std::min(count, pts.size() - std::min(offset, pts.size()));
  for (int k = 0; k < pts.dim(); ++k) v.axis[k] = pts.axis(k) + offset;
  return v;
}

void se_cross_covariance(const SoaView& test, const SoaView& train, SeKernel kernel,
                         std::span<double> out) {
  require(test.dim == train.dim, "kernel block: dimension mismatch");
  require(out.size() >= test.size * train.size, "kernel block: output too small");
  if (active_isa() == Isa::Avx2) {
    avx2::se_cross_covariance(test, train, kernel, out);
  } else {
    scalar::se_cross_covariance(test, train, kernel, out);
  }
}

void se_weighted_sum(const SoaView& test, const SoaView& train, SeKernel kernel,
                     std::span<const double> weights, std::span<double> out) {
  require(test.dim == train.dim, "kernel sum: dimension mismatch");
  require(weights.size() == train.size && out.size() >= test.size, "kernel sum: size mismatch");
  if (active_isa() == Isa::Avx2) {
    avx2::se_weighted_sum(test, train, kernel, weights, out);
  } else {
    scalar::se_weighted_sum(test, train, kernel, weights, out);
  }
}

}  // namespace rgpis::simd
