#include "tlmor/kernels/kernels.hpp"

#if defined(__x86_64__) || defined(_M_X64)
#include <immintrin.h>

#include <cmath>

namespace tlmor::kernels {

namespace {

void em_combine_avx2(std::size_t n, std::size_t cols, const double* x, const double* const* w, std::size_t q,
                     const double* dw, const double* drift, const double* scale, double* out) {
  for (std::size_t j = 0; j < cols; ++j) {
    const double* xj = x + j * n;
    double* oj = out + j * n;
    const double* dwj = dw + q * j;
    std::size_t r = 0;
    for (; r + 4 <= n; r += 4) {
      __m256d acc = _mm256_add_pd(_mm256_loadu_pd(xj + r), _mm256_loadu_pd(drift + r));
      for (std::size_t i = 0; i < q; ++i)
        acc = _mm256_fmadd_pd(_mm256_set1_pd(dwj[i]), _mm256_loadu_pd(w[i] + r + j * n), acc);
      if (scale) acc = _mm256_mul_pd(_mm256_loadu_pd(scale + r), acc);
      _mm256_storeu_pd(oj + r, acc);
    }
    for (; r < n; ++r) {
      double acc = xj[r] + drift[r];
      for (std::size_t i = 0; i < q; ++i) acc = std::fma(dwj[i], w[i][r + j * n], acc);
      oj[r] = scale ? scale[r] * acc : acc;
    }
  }
}

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

void column_distance_avx2(std::size_t p, std::size_t cols, const double* a, const double* b, double* out) {
  if (p == 1) {
    const __m256d sign = _mm256_set1_pd(-0.0);
    std::size_t j = 0;
    for (; j + 4 <= cols; j += 4) {
      const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(a + j), _mm256_loadu_pd(b + j));
      _mm256_storeu_pd(out + j, _mm256_andnot_pd(sign, d));
    }
    for (; j < cols; ++j) out[j] = std::fabs(a[j] - b[j]);
    return;
  }
  for (std::size_t j = 0; j < cols; ++j) {
    const double* aj = a + j * p;
    const double* bj = b + j * p;
    __m256d acc = _mm256_setzero_pd();
    std::size_t r = 0;
    for (; r + 4 <= p; r += 4) {
      const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(aj + r), _mm256_loadu_pd(bj + r));
      acc = _mm256_fmadd_pd(d, d, acc);
    }
    double s = hsum(acc);
    for (; r < p; ++r) {
      const double d = aj[r] - bj[r];
      s += d * d;
    }
    out[j] = std::sqrt(s);
  }
}

}  // namespace

const KernelTable* avx2_kernels() {
  static const KernelTable table{"avx2", em_combine_avx2, column_distance_avx2};
  static const bool supported = __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
  return supported ? &table : nullptr;
}

}  // namespace tlmor::kernels

#else

namespace tlmor::kernels {
const KernelTable* avx2_kernels() { return nullptr; }
}  // namespace tlmor::kernels

#endif
