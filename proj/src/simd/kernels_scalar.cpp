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

#include <cmath>

#include "rgpis/simd/kernels.hpp"

namespace rgpis::simd::scalar {

namespace {

inline double sq_dist(const SoaView& a, std::size_t j, const SoaView& b, std::size_t i) {
  double d2 = 0.0;
  for (int k = 0; k < a.dim; ++k) {
    const double d = a.axis[k][j] - b.axis[k][i];
    d2 += d * d;
  }
  return d2;
}

}  // namespace

void se_cross_covariance(const SoaView& test, const SoaView& train, SeKernel kernel,
                         std::span<double> out) {
  const std::size_t n = train.size;
  for (std::size_t j = 0; j < test.size; ++j) {
    double* row = out.data() + j * n;
    for (std::size_t i = 0; i < n; ++i) {
      row[i] = kernel.signal_variance *
               std::exp(-sq_dist(test, j, train, i) * kernel.inv_two_length_scale_sq);
    }
  }
}

void se_weighted_sum(const SoaView& test, const SoaView& train, SeKernel kernel,
                     std::span<const double> weights, std::span<double> out) {
  for (std::size_t j = 0; j < test.size; ++j) {
    double acc = 0.0;
    for (std::size_t i = 0; i < train.size; ++i) {
      acc += weights[i] * std::exp(-sq_dist(test, j, train, i) * kernel.inv_two_length_scale_sq);
    }
    out[j] = kernel.signal_variance * acc;
  }
}

void exp_nonpositive(std::span<const double> x, std::span<double> out) {
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] < -708.0 ? 0.0 : std::exp(x[i]);
}

}  // namespace rgpis::simd::scalar
