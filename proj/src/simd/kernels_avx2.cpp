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

#if defined(__x86_64__) || defined(_M_X64)
#define RGPIS_HAVE_AVX2_TU 1
#include <immintrin.h>
#endif

namespace rgpis::simd::avx2 {

#if RGPIS_HAVE_AVX2_TU

namespace {

// exp(x) for x <= 0: x = n ln2 + r, |r| <= ln2 / 2, exp(r) by a degree-13
// Taylor polynomial (truncation error below 1e-17 relative), 2^n assembled
// in the exponent field.
inline __m256d exp_pd(__m256d x) {
  const __m256d lo_limit = _mm256_set1_pd(-708.0);
  const __m256d underflow = _mm256_cmp_pd(x, lo_limit, _CMP_LT_OQ);
  x = _mm256_max_pd(x, lo_limit);

  const __m256d log2e = _mm256_set1_pd(1.4426950408889634);
  const __m256d ln2_hi = _mm256_set1_pd(0.6931471805599453);
  const __m256d ln2_lo = _mm256_set1_pd(2.3190468138462996e-17);
  const __m256d n = _mm256_round_pd(_mm256_mul_pd(x, log2e), _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
  __m256d r = _mm256_fnmadd_pd(n, ln2_hi, x);
  r = _mm256_fnmadd_pd(n, ln2_lo, r);

  __m256d p = _mm256_set1_pd(1.0 / 6227020800.0);  // 1/13!
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 479001600.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 39916800.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 3628800.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 362880.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 40320.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 5040.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 720.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 120.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 24.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 6.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(0.5));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0));

  // n is integral and in [-1022, 1023]; the magic constant moves it into the
  // low mantissa bits where it can be read back as a 64-bit integer.
  const __m256d magic = _mm256_set1_pd(6755399441055744.0);  // 2^52 + 2^51
  const __m256i ni = _mm256_sub_epi64(_mm256_castpd_si256(_mm256_add_pd(n, magic)),
                                      _mm256_castpd_si256(magic));
  const __m256i bits = _mm256_slli_epi64(_mm256_add_epi64(ni, _mm256_set1_epi64x(1023)), 52);
  const __m256d result = _mm256_mul_pd(p, _mm256_castsi256_pd(bits));
  return _mm256_andnot_pd(underflow, result);
}

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

inline double tail_exp(double x) { return x < -708.0 ? 0.0 : std::exp(x); }

}  // namespace

void exp_nonpositive(std::span<const double> x, std::span<double> out) {
  std::size_t i = 0;
  for (; i + 4 <= x.size(); i += 4) _mm256_storeu_pd(out.data() + i, exp_pd(_mm256_loadu_pd(x.data() + i)));
  for (; i < x.size(); ++i) out[i] = tail_exp(x[i]);
}

void se_cross_covariance(const SoaView& test, const SoaView& train, SeKernel kernel,
                         std::span<double> out) {
  const std::size_t n = train.size;
  const int dim = train.dim;
  const __m256d neg_inv = _mm256_set1_pd(-kernel.inv_two_length_scale_sq);
  const __m256d sv = _mm256_set1_pd(kernel.signal_variance);
  for (std::size_t j = 0; j < test.size; ++j) {
    double* row = out.data() + j * n;
    __m256d t[3];
    for (int k = 0; k < dim; ++k) t[k] = _mm256_set1_pd(test.axis[k][j]);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
      __m256d d2 = _mm256_setzero_pd();
      for (int k = 0; k < dim; ++k) {
        const __m256d d = _mm256_sub_pd(t[k], _mm256_loadu_pd(train.axis[k] + i));
        d2 = _mm256_fmadd_pd(d, d, d2);
      }
      _mm256_storeu_pd(row + i, _mm256_mul_pd(sv, exp_pd(_mm256_mul_pd(d2, neg_inv))));
    }
    for (; i < n; ++i) {
      double d2 = 0.0;
      for (int k = 0; k < dim; ++k) {
        const double d = test.axis[k][j] - train.axis[k][i];
        d2 += d * d;
      }
      row[i] = kernel.signal_variance * tail_exp(-d2 * kernel.inv_two_length_scale_sq);
    }
  }
}

void se_weighted_sum(const SoaView& test, const SoaView& train, SeKernel kernel,
                     std::span<const double> weights, std::span<double> out) {
  const std::size_t n = train.size;
  const int dim = train.dim;
  const __m256d neg_inv = _mm256_set1_pd(-kernel.inv_two_length_scale_sq);
  for (std::size_t j = 0; j < test.size; ++j) {
    __m256d t[3];
    for (int k = 0; k < dim; ++k) t[k] = _mm256_set1_pd(test.axis[k][j]);
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
      __m256d d2 = _mm256_setzero_pd();
      for (int k = 0; k < dim; ++k) {
        const __m256d d = _mm256_sub_pd(t[k], _mm256_loadu_pd(train.axis[k] + i));
        d2 = _mm256_fmadd_pd(d, d, d2);
      }
      acc = _mm256_fmadd_pd(exp_pd(_mm256_mul_pd(d2, neg_inv)), _mm256_loadu_pd(weights.data() + i), acc);
    }
    double s = hsum(acc);
    for (; i < n; ++i) {
      double d2 = 0.0;
      for (int k = 0; k < dim; ++k) {
        const double d = test.axis[k][j] - train.axis[k][i];
        d2 += d * d;
      }
      s += weights[i] * tail_exp(-d2 * kernel.inv_two_length_scale_sq);
    }
    out[j] = kernel.signal_variance * s;
  }
}

#else  // no x86: the dispatcher never selects this variant

void exp_nonpositive(std::span<const double> x, std::span<double> out) { scalar::exp_nonpositive(x, out); }
void se_cross_covariance(const SoaView& test, const SoaView& train, SeKernel kernel, std::span<double> out) {
  scalar::se_cross_covariance(test, train, kernel, out);
}
void se_weighted_sum(const SoaView& test, const SoaView& train, SeKernel kernel,
                     std::span<const double> weights, std::span<double> out) {
  scalar::se_weighted_sum(test, train, kernel, weights, out);
}

#endif

}  // namespace rgpis::simd::avx2
