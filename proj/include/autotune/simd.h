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

#pragma once

#include <cstddef>
#include <span>
#include <string_view>

// Data-parallel inner loops used by the GP surrogate and the calibration
// MLP. Each kernel has a portable scalar reference and an AVX2/FMA variant;
// the variant is picked once at startup from CPUID and can be pinned with
// AUTOTUNE_SIMD=scalar|avx2.

namespace autotune::simd {

enum class Isa { kScalar, kAvx2 };

std::string_view IsaName(Isa isa);

struct KernelTable {
  Isa isa;

  // sum_i a[i] * b[i]
  double (*dot)(const double* a, const double* b, std::size_t n);

  // y[i] += alpha * x[i]
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);

  // out[i] = sum_k (points[k * n + i] - query[k])^2 for i < n. Points are
  // stored dimension-major so consecutive i are contiguous.
  void (*squared_distances)(const double* query, const double* points,
                            std::size_t n, std::size_t dims, double* out);

  // out[i] = w1 * x1[i] + w2 * x2[i] + bias
  void (*affine2)(double w1, double w2, double bias, const double* x1,
                  const double* x2, std::size_t n, double* out);
};

bool IsaAvailable(Isa isa);

/// Table for a specific ISA. Throws Error(kInvalidArgument) when the host
/// cannot run it.
const KernelTable& KernelsFor(Isa isa);

/// Table selected for this process.
const KernelTable& Kernels();

// Span conveniences over the active table.
inline double Dot(std::span<const double> a, std::span<const double> b) {
  return Kernels().dot(a.data(), b.data(), a.size());
}

inline void Axpy(double alpha, std::span<const double> x, std::span<double> y) {
  Kernels().axpy(alpha, x.data(), y.data(), x.size());
}

namespace detail {
extern const KernelTable kScalarTable;
#if defined(AUTOTUNE_HAVE_AVX2)
extern const KernelTable kAvx2Table;
#endif
}  // namespace detail

}  // namespace autotune::simd
