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

#pragma once

#include <cstddef>
#include <string_view>

namespace aid::simd {

// Row-major dense kernels behind every convolution and reduction in the
// library. Each kernel has a scalar reference and an AVX2/FMA variant; the
// variant is chosen once at startup from CPUID and can be pinned with the
// AID_SIMD environment variable ("scalar" or "avx2").

enum class Isa { kScalar, kAvx2 };

template <typename T>
struct KernelTable {
  // C[M x N] += A[M x K] * B[K x N]
  void (*gemm)(int m, int n, int k, const T* a, int lda, const T* b, int ldb, T* c, int ldc);
  // sum_i x[i] * y[i]
  T (*dot)(std::size_t n, const T* x, const T* y);
  // y[i] += alpha * x[i]
  void (*axpy)(std::size_t n, T alpha, const T* x, T* y);
  // sum_i (x[i] - y[i])^2
  T (*sq_diff_sum)(std::size_t n, const T* x, const T* y);
};

template <typename T>
const KernelTable<T>& scalar_kernels();

#if defined(AID_HAVE_AVX2)
template <typename T>
const KernelTable<T>& avx2_kernels();
#endif

bool cpu_has_avx2();

// Active ISA; resolved lazily on first use.
Isa active_isa();
std::string_view isa_name(Isa isa);

// Overrides the active ISA (tests use this to run both paths). Throws
// std::invalid_argument if the ISA is not available on this CPU/build.
void set_active_isa(Isa isa);

template <typename T>
const KernelTable<T>& kernels();

template <typename T>
inline void gemm(int m, int n, int k, const T* a, int lda, const T* b, int ldb, T* c, int ldc) {
  kernels<T>().gemm(m, n, k, a, lda, b, ldb, c, ldc);
}

template <typename T>
inline T dot(std::size_t n, const T* x, const T* y) {
  return kernels<T>().dot(n, x, y);
}

template <typename T>
inline void axpy(std::size_t n, T alpha, const T* x, T* y) {
  kernels<T>().axpy(n, alpha, x, y);
}

template <typename T>
inline T sq_diff_sum(std::size_t n, const T* x, const T* y) {
  return kernels<T>().sq_diff_sum(n, x, y);
}

}  // namespace aid::simd
