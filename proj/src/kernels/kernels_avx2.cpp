// AVX2 kernel variants. Compiled with -mavx2 -mfma; only reached after the
// dispatcher has confirmed CPU support.

#if defined(SPARSEFIELD_X86_64)

#include <immintrin.h>

#include <cmath>
#include <cstddef>

#include "kernel_table.hpp"

namespace sparsefield::kernels::detail {
namespace {

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  __m128d swapped = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, swapped));
}

double sum_avx2(const double* x, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) acc = _mm256_add_pd(acc, _mm256_loadu_pd(x + i));
  double s = hsum(acc);
  for (; i < n; ++i) s += x[i];
  return s;
}

double dot_avx2(const double* x, const double* y, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    acc = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc);
  double s = hsum(acc);
  for (; i < n; ++i) s += x[i] * y[i];
  return s;
}

void axpy_avx2(double a, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d vy = _mm256_loadu_pd(y + i);
    vy = _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), vy);
    _mm256_storeu_pd(y + i, vy);
  }
  for (; i < n; ++i) y[i] += a * x[i];
}

double sum_abs_diff_avx2(const double* a, const double* b, std::size_t n) {
  // clear the sign bit to take |d|
  const __m256d sign_mask = _mm256_set1_pd(-0.0);
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d d = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
    acc = _mm256_add_pd(acc, _mm256_andnot_pd(sign_mask, d));
  }
  double s = hsum(acc);
  for (; i < n; ++i) s += std::fabs(a[i] - b[i]);
  return s;
}

double sum_sq_diff_avx2(const double* a, const double* b, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d d = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
    acc = _mm256_fmadd_pd(d, d, acc);
  }
  double s = hsum(acc);
  for (; i < n; ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

void stencil_row_avx2(const double* up, const double* center,
                      const double* down, const double* source, double* out,
                      std::size_t n, const StencilCoefs& c) {
  const __m256d cc = _mm256_set1_pd(c.c_center);
  const __m256d cx = _mm256_set1_pd(c.c_x);
  const __m256d cy = _mm256_set1_pd(c.c_y);
  const __m256d cs = _mm256_set1_pd(c.c_source);
  const __m256d k = _mm256_set1_pd(c.c_const);
  std::size_t j = 0;
  for (; j + 4 <= n; j += 4) {
    __m256d cen = _mm256_loadu_pd(center + j);
    __m256d lft = _mm256_loadu_pd(center + j - 1);
    __m256d rgt = _mm256_loadu_pd(center + j + 1);
    __m256d vup = _mm256_loadu_pd(up + j);
    __m256d vdn = _mm256_loadu_pd(down + j);
    __m256d acc = _mm256_fmadd_pd(cc, cen, k);
    acc = _mm256_fmadd_pd(cx, _mm256_add_pd(lft, rgt), acc);
    acc = _mm256_fmadd_pd(cy, _mm256_add_pd(vup, vdn), acc);
    acc = _mm256_fmadd_pd(cs, _mm256_loadu_pd(source + j), acc);
    _mm256_storeu_pd(out + j, acc);
  }
  for (; j < n; ++j) {
    out[j] = c.c_center * center[j] + c.c_x * (center[j - 1] + center[j + 1]) +
             c.c_y * (up[j] + down[j]) + c.c_source * source[j] + c.c_const;
  }
}

}  // namespace

const KernelTable& avx2_table() {
  static const KernelTable t{sum_avx2,         dot_avx2,
                             axpy_avx2,        sum_abs_diff_avx2,
                             sum_sq_diff_avx2, stencil_row_avx2};
  return t;
}

}  // namespace sparsefield::kernels::detail

#endif  // SPARSEFIELD_X86_64
