// Copyright 2026 The AID Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>

#include "aid/simd/kernels.hpp"

namespace aid::simd {

namespace {

Isa detect() {
  if (const char* env = std::getenv("AID_SIMD")) {
    const std::string v = env;
    if (v == "scalar") return Isa::kScalar;
    if (v == "avx2" && cpu_has_avx2()) return Isa::kAvx2;
  }
  return cpu_has_avx2() ? Isa::kAvx2 : Isa::kScalar;
}

std::atomic<int>& isa_slot() {
  static std::atomic<int> slot{static_cast<int>(detect())};
  return slot;
}

}  // namespace

bool cpu_has_avx2() {
#if defined(AID_HAVE_AVX2) && (defined(__x86_64__) || defined(__i386__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

Isa active_isa() { return static_cast<Isa>(isa_slot().load(std::memory_order_relaxed)); }

std::string_view isa_name(Isa isa) { return isa == Isa::kAvx2 ? "avx2" : "scalar"; }

void set_active_isa(Isa isa) {
  if (isa == Isa::kAvx2 && !cpu_has_avx2()) throw std::invalid_argument("AVX2 kernels are not available");
  isa_slot().store(static_cast<int>(isa), std::memory_order_relaxed);
}

template <typename T>
const KernelTable<T>& kernels() {
#if defined(AID_HAVE_AVX2)
  if (active_isa() == Isa::kAvx2) return avx2_kernels<T>();
#endif
  return scalar_kernels<T>();
}

template const KernelTable<float>& kernels<float>();
template const KernelTable<double>& kernels<double>();

}  // namespace aid::simd
