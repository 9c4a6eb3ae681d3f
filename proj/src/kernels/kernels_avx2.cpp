// Compiled with -mavx2 -mfma. Only reached after a runtime CPU check, so keep
// this TU free of inline library code that could be ODR-merged with the
// baseline build (no <cmath>, <algorithm>, ...).

#include <immintrin.h>

#include "kernels_impl.hpp"

namespace dhs::kernels::avx2 {
namespace {

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  __m128d sh = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, sh));
}

inline double hmax(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_max_pd(lo, hi);
  __m128d sh = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_max_sd(lo, sh));
}

double dot(const double* a, const double* b, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), acc1);
  }
  if (i + 4 <= n) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    i += 4;
  }
  double s = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

double sum_squares(const double* x, std::size_t n) { return dot(x, x, n); }

double weighted_sum_squares(const double* w, const double* x, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d xv = _mm256_loadu_pd(x + i);
    acc = _mm256_fmadd_pd(_mm256_mul_pd(_mm256_loadu_pd(w + i), xv), xv, acc);
  }
  double s = hsum(acc);
  for (; i < n; ++i) s += w[i] * x[i] * x[i];
  return s;
}

void axpy(double a, const double* x, double* y, std::size_t n) {
  const __m256d av = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(av, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  }
  for (; i < n; ++i) y[i] += a * x[i];
}

void diag_multiply_add(const double* d, const double* x, double* y, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(_mm256_loadu_pd(d + i), _mm256_loadu_pd(x + i),
                                            _mm256_loadu_pd(y + i)));
  }
  for (; i < n; ++i) y[i] += d[i] * x[i];
}

void block_sq_norms(const double* x, std::size_t blocks, std::size_t width, double* out) {
  if (width == 2) {
    // two blocks per register: (a0 a1 b0 b1) -> hadd -> (a0+a1, ., b0+b1, .)
    std::size_t b = 0;
    for (; b + 2 <= blocks; b += 2) {
      __m256d v = _mm256_loadu_pd(x + 2 * b);
      __m256d sq = _mm256_mul_pd(v, v);
      __m256d h = _mm256_hadd_pd(sq, sq);
      out[b] = _mm256_cvtsd_f64(h);
      out[b + 1] = _mm_cvtsd_f64(_mm256_extractf128_pd(h, 1));
    }
    for (; b < blocks; ++b) out[b] = x[2 * b] * x[2 * b] + x[2 * b + 1] * x[2 * b + 1];
    return;
  }
  for (std::size_t b = 0; b < blocks; ++b) out[b] = dot(x + b * width, x + b * width, width);
}

double max_abs_diff(const double* a, const double* b, std::size_t n) {
  const __m256d sign = _mm256_set1_pd(-0.0);
  __m256d m = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d d = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
    m = _mm256_max_pd(m, _mm256_andnot_pd(sign, d));
  }
  double r = hmax(m);
  for (; i < n; ++i) {
    double d = a[i] - b[i];
    d = d < 0.0 ? -d : d;
    r = d > r ? d : r;
  }
  return r;
}

}  // namespace

const Table& table() {
  static const Table t{"avx2",     &dot,  &sum_squares,    &weighted_sum_squares, &axpy,
                       &diag_multiply_add, &block_sq_norms, &max_abs_diff};
  return t;
}

}  // namespace dhs::kernels::avx2
