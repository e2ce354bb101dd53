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

// Compiled with -mavx2 -mfma. Only reachable through avx2_kernels(), which
// the dispatcher hands out after a CPUID check.

#include <immintrin.h>

#include "aid/simd/kernels.hpp"

namespace aid::simd {

namespace {

template <typename T>
struct Vec;

template <>
struct Vec<float> {
  using Reg = __m256;
  static constexpr int kWidth = 8;
  static Reg load(const float* p) { return _mm256_loadu_ps(p); }
  static void store(float* p, Reg v) { _mm256_storeu_ps(p, v); }
  static Reg set1(float v) { return _mm256_set1_ps(v); }
  static Reg zero() { return _mm256_setzero_ps(); }
  static Reg fmadd(Reg a, Reg b, Reg c) { return _mm256_fmadd_ps(a, b, c); }
  static Reg sub(Reg a, Reg b) { return _mm256_sub_ps(a, b); }
  static Reg add(Reg a, Reg b) { return _mm256_add_ps(a, b); }
  static float hsum(Reg v) {
    __m128 lo = _mm256_castps256_ps128(v);
    __m128 hi = _mm256_extractf128_ps(v, 1);
    lo = _mm_add_ps(lo, hi);
    __m128 sh = _mm_movehdup_ps(lo);
    __m128 s = _mm_add_ps(lo, sh);
    sh = _mm_movehl_ps(sh, s);
    s = _mm_add_ss(s, sh);
    return _mm_cvtss_f32(s);
  }
};

template <>
struct Vec<double> {
  using Reg = __m256d;
  static constexpr int kWidth = 4;
  static Reg load(const double* p) { return _mm256_loadu_pd(p); }
  static void store(double* p, Reg v) { _mm256_storeu_pd(p, v); }
  static Reg set1(double v) { return _mm256_set1_pd(v); }
  static Reg zero() { return _mm256_setzero_pd(); }
  static Reg fmadd(Reg a, Reg b, Reg c) { return _mm256_fmadd_pd(a, b, c); }
  static Reg sub(Reg a, Reg b) { return _mm256_sub_pd(a, b); }
  static Reg add(Reg a, Reg b) { return _mm256_add_pd(a, b); }
  static double hsum(Reg v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_add_pd(lo, hi);
    __m128d h = _mm_unpackhi_pd(lo, lo);
    return _mm_cvtsd_f64(_mm_add_sd(lo, h));
  }
};

// Register tile: 4 rows of C by two vectors of columns, accumulated over the
// whole depth before a single store.
template <typename T>
void gemm_avx2(int m, int n, int k, const T* a, int lda, const T* b, int ldb, T* c, int ldc) {
  using V = Vec<T>;
  using Reg = typename V::Reg;
  constexpr int W = V::kWidth;
  constexpr int NR = 2 * W;

  int i = 0;
  for (; i + 4 <= m; i += 4) {
    const T* a0 = a + static_cast<std::size_t>(i) * lda;
    const T* a1 = a0 + lda;
    const T* a2 = a1 + lda;
    const T* a3 = a2 + lda;
    T* c0 = c + static_cast<std::size_t>(i) * ldc;
    T* c1 = c0 + ldc;
    T* c2 = c1 + ldc;
    T* c3 = c2 + ldc;
    int j = 0;
    for (; j + NR <= n; j += NR) {
      Reg r00 = V::load(c0 + j), r01 = V::load(c0 + j + W);
      Reg r10 = V::load(c1 + j), r11 = V::load(c1 + j + W);
      Reg r20 = V::load(c2 + j), r21 = V::load(c2 + j + W);
      Reg r30 = V::load(c3 + j), r31 = V::load(c3 + j + W);
      const T* bp = b + j;
      for (int p = 0; p < k; ++p, bp += ldb) {
        const Reg b0 = V::load(bp);
        const Reg b1 = V::load(bp + W);
        Reg av = V::set1(a0[p]);
        r00 = V::fmadd(av, b0, r00);
        r01 = V::fmadd(av, b1, r01);
        av = V::set1(a1[p]);
        r10 = V::fmadd(av, b0, r10);
        r11 = V::fmadd(av, b1, r11);
        av = V::set1(a2[p]);
        r20 = V::fmadd(av, b0, r20);
        r21 = V::fmadd(av, b1, r21);
        av = V::set1(a3[p]);
        r30 = V::fmadd(av, b0, r30);
        r31 = V::fmadd(av, b1, r31);
      }
      V::store(c0 + j, r00), V::store(c0 + j + W, r01);
      V::store(c1 + j, r10), V::store(c1 + j + W, r11);
      V::store(c2 + j, r20), V::store(c2 + j + W, r21);
      V::store(c3 + j, r30), V::store(c3 + j + W, r31);
    }
    for (; j + W <= n; j += W) {
      Reg r0 = V::load(c0 + j), r1 = V::load(c1 + j), r2 = V::load(c2 + j), r3 = V::load(c3 + j);
      const T* bp = b + j;
      for (int p = 0; p < k; ++p, bp += ldb) {
        const Reg bv = V::load(bp);
        r0 = V::fmadd(V::set1(a0[p]), bv, r0);
        r1 = V::fmadd(V::set1(a1[p]), bv, r1);
        r2 = V::fmadd(V::set1(a2[p]), bv, r2);
        r3 = V::fmadd(V::set1(a3[p]), bv, r3);
      }
      V::store(c0 + j, r0), V::store(c1 + j, r1), V::store(c2 + j, r2), V::store(c3 + j, r3);
    }
    for (; j < n; ++j) {
      T s0 = c0[j], s1 = c1[j], s2 = c2[j], s3 = c3[j];
      const T* bp = b + j;
      for (int p = 0; p < k; ++p, bp += ldb) {
        s0 += a0[p] * *bp;
        s1 += a1[p] * *bp;
        s2 += a2[p] * *bp;
        s3 += a3[p] * *bp;
      }
      c0[j] = s0, c1[j] = s1, c2[j] = s2, c3[j] = s3;
    }
  }
  for (; i < m; ++i) {
    const T* ar = a + static_cast<std::size_t>(i) * lda;
    T* cr = c + static_cast<std::size_t>(i) * ldc;
    int j = 0;
    for (; j + NR <= n; j += NR) {
      Reg r0 = V::load(cr + j), r1 = V::load(cr + j + W);
      const T* bp = b + j;
      for (int p = 0; p < k; ++p, bp += ldb) {
        const Reg av = V::set1(ar[p]);
        r0 = V::fmadd(av, V::load(bp), r0);
        r1 = V::fmadd(av, V::load(bp + W), r1);
      }
      V::store(cr + j, r0), V::store(cr + j + W, r1);
    }
    for (; j + W <= n; j += W) {
      Reg r0 = V::load(cr + j);
      const T* bp = b + j;
      for (int p = 0; p < k; ++p, bp += ldb) r0 = V::fmadd(V::set1(ar[p]), V::load(bp), r0);
      V::store(cr + j, r0);
    }
    for (; j < n; ++j) {
      T s = cr[j];
      const T* bp = b + j;
      for (int p = 0; p < k; ++p, bp += ldb) s += ar[p] * *bp;
      cr[j] = s;
    }
  }
}

template <typename T>
T dot_avx2(std::size_t n, const T* x, const T* y) {
  using V = Vec<T>;
  constexpr std::size_t W = V::kWidth;
  auto s0 = V::zero(), s1 = V::zero(), s2 = V::zero(), s3 = V::zero();
  std::size_t i = 0;
  for (; i + 4 * W <= n; i += 4 * W) {
    s0 = V::fmadd(V::load(x + i), V::load(y + i), s0);
    s1 = V::fmadd(V::load(x + i + W), V::load(y + i + W), s1);
    s2 = V::fmadd(V::load(x + i + 2 * W), V::load(y + i + 2 * W), s2);
    s3 = V::fmadd(V::load(x + i + 3 * W), V::load(y + i + 3 * W), s3);
  }
  for (; i + W <= n; i += W) s0 = V::fmadd(V::load(x + i), V::load(y + i), s0);
  T s = V::hsum(V::add(V::add(s0, s1), V::add(s2, s3)));
  for (; i < n; ++i) s += x[i] * y[i];
  return s;
}

template <typename T>
void axpy_avx2(std::size_t n, T alpha, const T* x, T* y) {
  using V = Vec<T>;
  constexpr std::size_t W = V::kWidth;
  const auto av = V::set1(alpha);
  std::size_t i = 0;
  for (; i + W <= n; i += W) V::store(y + i, V::fmadd(av, V::load(x + i), V::load(y + i)));
  for (; i < n; ++i) y[i] += alpha * x[i];
}

template <typename T>
T sq_diff_sum_avx2(std::size_t n, const T* x, const T* y) {
  using V = Vec<T>;
  constexpr std::size_t W = V::kWidth;
  auto s0 = V::zero(), s1 = V::zero();
  std::size_t i = 0;
  for (; i + 2 * W <= n; i += 2 * W) {
    const auto d0 = V::sub(V::load(x + i), V::load(y + i));
    const auto d1 = V::sub(V::load(x + i + W), V::load(y + i + W));
    s0 = V::fmadd(d0, d0, s0);
    s1 = V::fmadd(d1, d1, s1);
  }
  for (; i + W <= n; i += W) {
    const auto d = V::sub(V::load(x + i), V::load(y + i));
    s0 = V::fmadd(d, d, s0);
  }
  T s = V::hsum(V::add(s0, s1));
  for (; i < n; ++i) {
    const T d = x[i] - y[i];
    s += d * d;
  }
  return s;
}

}  // namespace

template <typename T>
const KernelTable<T>& avx2_kernels() {
  static const KernelTable<T> table{&gemm_avx2<T>, &dot_avx2<T>, &axpy_avx2<T>, &sq_diff_sum_avx2<T>};
  return table;
}

template const KernelTable<float>& avx2_kernels<float>();
template const KernelTable<double>& avx2_kernels<double>();

}  // namespace aid::simd
