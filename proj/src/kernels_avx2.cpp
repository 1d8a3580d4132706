// AVX2 + FMA kernel variants. This translation unit is the only one compiled
// with -mavx2 -mfma; callers reach it through the runtime dispatch in
// kernels.cpp, so building it is safe on any x86-64 host.

#include <cmath>
#include <cstddef>

#include "geocurve/kernels.hpp"

#if defined(GEOCURVE_HAVE_AVX2)

#include <immintrin.h>

namespace geocurve::kernels::avx2 {

namespace {

inline double hsum256(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  __m128d swapped = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, swapped));
}

inline double hmax256(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_max_pd(lo, hi);
  __m128d swapped = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_max_sd(lo, swapped));
}

}  // namespace

double dot(const double* x, const double* y, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i + 4), _mm256_loadu_pd(y + i + 4), acc1);
  }
  for (; i + 4 <= n; i += 4)
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc0);
  double acc = hsum256(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) acc += x[i] * y[i];
  return acc;
}

void axpy(double a, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d vy = _mm256_loadu_pd(y + i);
    vy = _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), vy);
    _mm256_storeu_pd(y + i, vy);
  }
  for (; i < n; ++i) y[i] += a * x[i];
}

void pointwise_dot_soa(const double* a, const double* b, std::size_t d,
                       std::size_t n, double* out) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d acc = _mm256_setzero_pd();
    for (std::size_t j = 0; j < d; ++j)
      acc = _mm256_fmadd_pd(_mm256_loadu_pd(a + j * n + i),
                            _mm256_loadu_pd(b + j * n + i), acc);
    _mm256_storeu_pd(out + i, acc);
  }
  for (; i < n; ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < d; ++j) acc += a[j * n + i] * b[j * n + i];
    out[i] = acc;
  }
}

void pointwise_geodesic_soa(const double* a, const double* b, std::size_t d,
                            std::size_t n, double* out) {
  // Vectorize the norm accumulations; atan2 stays a scalar epilogue. The
  // squared diff-norm is parked in out[], sum-norms in a stack chunk.
  constexpr std::size_t kChunk = 256;
  double c2buf[kChunk];
  std::size_t base = 0;
  while (base < n) {
    const std::size_t len = (n - base < kChunk) ? (n - base) : kChunk;
    std::size_t i = 0;
    for (; i + 4 <= len; i += 4) {
      __m256d s2 = _mm256_setzero_pd();
      __m256d c2 = _mm256_setzero_pd();
      for (std::size_t j = 0; j < d; ++j) {
        const __m256d aj = _mm256_loadu_pd(a + j * n + base + i);
        const __m256d bj = _mm256_loadu_pd(b + j * n + base + i);
        const __m256d dm = _mm256_sub_pd(aj, bj);
        const __m256d dp = _mm256_add_pd(aj, bj);
        s2 = _mm256_fmadd_pd(dm, dm, s2);
        c2 = _mm256_fmadd_pd(dp, dp, c2);
      }
      _mm256_storeu_pd(out + base + i, s2);
      _mm256_storeu_pd(c2buf + i, c2);
    }
    for (; i < len; ++i) {
      double s2 = 0.0, c2 = 0.0;
      for (std::size_t j = 0; j < d; ++j) {
        const double aj = a[j * n + base + i];
        const double bj = b[j * n + base + i];
        s2 += (aj - bj) * (aj - bj);
        c2 += (aj + bj) * (aj + bj);
      }
      out[base + i] = s2;
      c2buf[i] = c2;
    }
    for (std::size_t k = 0; k < len; ++k)
      out[base + k] = 2.0 * std::atan2(std::sqrt(out[base + k]), std::sqrt(c2buf[k]));
    base += len;
  }
}

double weighted_sumsq(const double* w, const double* x, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d vx = _mm256_loadu_pd(x + i);
    acc = _mm256_fmadd_pd(_mm256_mul_pd(vx, vx), _mm256_loadu_pd(w + i), acc);
  }
  double r = hsum256(acc);
  for (; i < n; ++i) r += w[i] * x[i] * x[i];
  return r;
}

double max_value(const double* x, std::size_t n) {
  if (n < 4) {
    double m = x[0];
    for (std::size_t i = 1; i < n; ++i)
      if (x[i] > m) m = x[i];
    return m;
  }
  __m256d vm = _mm256_loadu_pd(x);
  std::size_t i = 4;
  for (; i + 4 <= n; i += 4) vm = _mm256_max_pd(vm, _mm256_loadu_pd(x + i));
  double m = hmax256(vm);
  for (; i < n; ++i)
    if (x[i] > m) m = x[i];
  return m;
}

void gram_accumulate(const double* xs, const double* ys, std::size_t rows,
                     std::size_t dim, double* acc) {
  std::size_t l = 0;
  for (; l + 4 <= rows; l += 4) {
    const double* y0 = ys + (l + 0) * dim;
    const double* y1 = ys + (l + 1) * dim;
    const double* y2 = ys + (l + 2) * dim;
    const double* y3 = ys + (l + 3) * dim;
    for (std::size_t r = 0; r < dim; ++r) {
      const __m256d x0 = _mm256_set1_pd(xs[(l + 0) * dim + r]);
      const __m256d x1 = _mm256_set1_pd(xs[(l + 1) * dim + r]);
      const __m256d x2 = _mm256_set1_pd(xs[(l + 2) * dim + r]);
      const __m256d x3 = _mm256_set1_pd(xs[(l + 3) * dim + r]);
      double* row = acc + r * dim;
      std::size_t c = 0;
      for (; c + 4 <= dim; c += 4) {
        __m256d v = _mm256_loadu_pd(row + c);
        v = _mm256_fmadd_pd(x0, _mm256_loadu_pd(y0 + c), v);
        v = _mm256_fmadd_pd(x1, _mm256_loadu_pd(y1 + c), v);
        v = _mm256_fmadd_pd(x2, _mm256_loadu_pd(y2 + c), v);
        v = _mm256_fmadd_pd(x3, _mm256_loadu_pd(y3 + c), v);
        _mm256_storeu_pd(row + c, v);
      }
      for (; c < dim; ++c)
        row[c] += xs[(l + 0) * dim + r] * y0[c] + xs[(l + 1) * dim + r] * y1[c] +
                  xs[(l + 2) * dim + r] * y2[c] + xs[(l + 3) * dim + r] * y3[c];
    }
  }
  for (; l < rows; ++l) {
    const double* y = ys + l * dim;
    for (std::size_t r = 0; r < dim; ++r) {
      const __m256d x = _mm256_set1_pd(xs[l * dim + r]);
      double* row = acc + r * dim;
      std::size_t c = 0;
      for (; c + 4 <= dim; c += 4) {
        __m256d v = _mm256_loadu_pd(row + c);
        v = _mm256_fmadd_pd(x, _mm256_loadu_pd(y + c), v);
        _mm256_storeu_pd(row + c, v);
      }
      for (; c < dim; ++c) row[c] += xs[l * dim + r] * y[c];
    }
  }
}

}  // namespace geocurve::kernels::avx2

#endif  // GEOCURVE_HAVE_AVX2
