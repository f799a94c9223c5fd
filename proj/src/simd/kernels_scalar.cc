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

#include "autotune/simd.h"

namespace autotune::simd {
namespace {

double DotScalar(const double* a, const double* b, std::size_t n) {
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sum += a[i] * b[i];
  }
  return sum;
}

void AxpyScalar(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    y[i] += alpha * x[i];
  }
}

void SquaredDistancesScalar(const double* query, const double* points,
                            std::size_t n, std::size_t dims, double* out) {
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = 0.0;
  }
  for (std::size_t k = 0; k < dims; ++k) {
    const double* column = points + k * n;
    const double q = query[k];
    for (std::size_t i = 0; i < n; ++i) {
      const double diff = column[i] - q;
      out[i] += diff * diff;
    }
  }
}

void Affine2Scalar(double w1, double w2, double bias, const double* x1,
                   const double* x2, std::size_t n, double* out) {
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = w1 * x1[i] + w2 * x2[i] + bias;
  }
}

}  // namespace

namespace detail {
const KernelTable kScalarTable{Isa::kScalar, DotScalar, AxpyScalar,
                               SquaredDistancesScalar, Affine2Scalar};
}  // namespace detail

}  // namespace autotune::simd
