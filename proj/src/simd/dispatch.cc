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

#include <cstdlib>
#include <string>

#include "autotune/error.h"
#include "autotune/simd.h"

namespace autotune::simd {
namespace {

bool CpuHasAvx2() {
#if defined(AUTOTUNE_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const KernelTable& Select() {
  if (const char* forced = std::getenv("AUTOTUNE_SIMD")) {
    const std::string name(forced);
    if (name == "scalar") {
      return detail::kScalarTable;
    }
    if (name == "avx2") {
      return KernelsFor(Isa::kAvx2);
    }
    throw Error(ErrorCode::kInvalidArgument,
                "AUTOTUNE_SIMD must be 'scalar' or 'avx2', got '" + name + "'");
  }
  if (IsaAvailable(Isa::kAvx2)) {
    return KernelsFor(Isa::kAvx2);
  }
  return detail::kScalarTable;
}

}  // namespace

std::string_view IsaName(Isa isa) {
  return isa == Isa::kAvx2 ? "avx2" : "scalar";
}

bool IsaAvailable(Isa isa) {
  if (isa == Isa::kScalar) {
    return true;
  }
  static const bool avx2 = CpuHasAvx2();
  return avx2;
}

const KernelTable& KernelsFor(Isa isa) {
  if (!IsaAvailable(isa)) {
    throw Error(ErrorCode::kInvalidArgument,
                std::string("ISA not available on this host: ") +
                    std::string(IsaName(isa)));
  }
#if defined(AUTOTUNE_HAVE_AVX2)
  if (isa == Isa::kAvx2) {
    return detail::kAvx2Table;
  }
#endif
  return detail::kScalarTable;
}

const KernelTable& Kernels() {
  static const KernelTable& table = Select();
  return table;
}

}  // namespace autotune::simd
