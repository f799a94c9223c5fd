/******************************************************************************
 * Copyright 2026 The Autotune Authors. All Rights Reserved.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 *****************************************************************************/

// Compiled with -mavx2 -mfma; only reached after a CPUID check.

#include <immintrin.h>

#include "autotune/simd.h"

namespace autotune::simd {
namespace {

inline double HorizontalSum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d pair = _mm_add_pd(lo, hi);
  const __m128d swapped = _mm_unpackhi_pd(pair, pair);
  return _mm_cvtsd_f64(_mm_add_sd(pair, swapped));
}

double DotAvx2(const double* a, const double* b, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4),
                           _mm256_loadu_pd(b + i + 4), acc1);
  }
  for (; i + 4 <= n; i += 4) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
  }
  double sum = HorizontalSum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) {
    sum += a[i] * b[i];
  }
  return sum;
}

void AxpyAvx2(double alpha, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d vy =
        _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i));
    _mm256_storeu_pd(y + i, vy);
  }
  for (; i < n; ++i) {
    y[i] += alpha * x[i];
  }
}

void SquaredDistancesAvx2(const double* query, const double* points,
                          std::size_t n, std::size_t dims, double* out) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d acc = _mm256_setzero_pd();
    for (std::size_t k = 0; k < dims; ++k) {
      const __m256d diff = _mm256_sub_pd(_mm256_loadu_pd(points + k * n + i),
                                         _mm256_set1_pd(query[k]));
      acc = _mm256_fmadd_pd(diff, diff, acc);
    }
    _mm256_storeu_pd(out + i, acc);
  }
  for (; i < n; ++i) {
    double acc = 0.0;
    for (std::size_t k = 0; k < dims; ++k) {
      const double diff = points[k * n + i] - query[k];
      acc += diff * diff;
    }
    out[i] = acc;
  }
}

void Affine2Avx2(double w1, double w2, double bias, const double* x1,
                 const double* x2, std::size_t n, double* out) {
  const __m256d vw1 = _mm256_set1_pd(w1);
  const __m256d vw2 = _mm256_set1_pd(w2);
  const __m256d vb = _mm256_set1_pd(bias);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d z = _mm256_fmadd_pd(vw2, _mm256_loadu_pd(x2 + i), vb);
    z = _mm256_fmadd_pd(vw1, _mm256_loadu_pd(x1 + i), z);
    _mm256_storeu_pd(out + i, z);
  }
  for (; i < n; ++i) {
    out[i] = w1 * x1[i] + w2 * x2[i] + bias;
  }
}

}  // namespace

namespace detail {
const KernelTable kAvx2Table{Isa::kAvx2, DotAvx2, AxpyAvx2,
                             SquaredDistancesAvx2, Affine2Avx2};
}  // namespace detail

}  // namespace autotune::simd
