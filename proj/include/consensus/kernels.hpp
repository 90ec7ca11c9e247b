/*
 * Copyright 2026 The consensus-select Authors
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

// Dense double-precision kernels used by the geometry and training code.
//
// Every kernel has a scalar reference implementation. Vector variants (AVX2+FMA
// on x86-64, NEON on AArch64) are compiled in when the toolchain targets that
// architecture and selected at runtime when the CPU supports them. Vector
// variants reassociate sums, so results agree with the scalar reference to a
// few ulps, not bit-for-bit.
//
// The environment variable CONSENSUS_SELECT_KERNEL=scalar|avx2|neon|auto pins
// the choice made by active().

#include <cstddef>
#include <span>
#include <string_view>

namespace consensus::kernels {

enum class Isa { kScalar, kAvx2, kNeon };

std::string_view to_string(Isa isa);

struct KernelTable {
  Isa isa;
  double (*dot)(const double* a, const double* b, std::size_t n);
  // y += alpha * x
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  // x *= alpha
  void (*scale)(double alpha, double* x, std::size_t n);
  double (*sum_squares)(const double* x, std::size_t n);
};

const KernelTable& scalar_table();

// True when the variant is compiled in and the running CPU supports it.
bool isa_supported(Isa isa);

// Throws Error(kInvalidArgument) when the variant is unavailable.
const KernelTable& table_for(Isa isa);

// The table used by the library. Resolved once on first call.
const KernelTable& active();

// Overrides the active table for the current process (tests, benchmarks).
void set_active(Isa isa);

inline double dot(std::span<const double> a, std::span<const double> b) {
  return active().dot(a.data(), b.data(), a.size());
}

inline void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  active().axpy(alpha, x.data(), y.data(), x.size());
}

inline void scale(double alpha, std::span<double> x) { active().scale(alpha, x.data(), x.size()); }

inline double sum_squares(std::span<const double> x) {
  return active().sum_squares(x.data(), x.size());
}

namespace detail {
const KernelTable* avx2_table();
const KernelTable* neon_table();
}  // namespace detail

}  // namespace consensus::kernels
