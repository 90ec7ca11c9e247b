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

#include <atomic>
#include <cstdlib>
#include <string>

#include "consensus/error.hpp"
#include "consensus/kernels.hpp"

namespace consensus::kernels {
namespace {

bool cpu_has_avx2() {
#if (defined(__x86_64__) || defined(_M_X64)) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const KernelTable& best_available() {
  if (isa_supported(Isa::kAvx2)) return *detail::avx2_table();
  if (isa_supported(Isa::kNeon)) return *detail::neon_table();
  return scalar_table();
}

const KernelTable& resolve_from_env() {
  const char* env = std::getenv("CONSENSUS_SELECT_KERNEL");
  if (env == nullptr) return best_available();
  const std::string choice(env);
  if (choice == "scalar") return scalar_table();
  if (choice == "avx2" && isa_supported(Isa::kAvx2)) return *detail::avx2_table();
  if (choice == "neon" && isa_supported(Isa::kNeon)) return *detail::neon_table();
  return best_available();
}

std::atomic<const KernelTable*>& active_slot() {
  static std::atomic<const KernelTable*> slot{&resolve_from_env()};
  return slot;
}

}  // namespace

std::string_view to_string(Isa isa) {
  switch (isa) {
    case Isa::kScalar: return "scalar";
    case Isa::kAvx2: return "avx2";
    case Isa::kNeon: return "neon";
  }
  return "unknown";
}

bool isa_supported(Isa isa) {
  switch (isa) {
    case Isa::kScalar: return true;
    case Isa::kAvx2: return detail::avx2_table() != nullptr && cpu_has_avx2();
    case Isa::kNeon: return detail::neon_table() != nullptr;
  }
  return false;
}

const KernelTable& table_for(Isa isa) {
  if (!isa_supported(isa)) {
    throw Error(ErrorKind::kInvalidArgument,
                "kernel variant '" + std::string(to_string(isa)) + "' is not available");
  }
  switch (isa) {
    case Isa::kAvx2: return *detail::avx2_table();
    case Isa::kNeon: return *detail::neon_table();
    default: return scalar_table();
  }
}

const KernelTable& active() { return *active_slot().load(std::memory_order_acquire); }

void set_active(Isa isa) { active_slot().store(&table_for(isa), std::memory_order_release); }

}  // namespace consensus::kernels
