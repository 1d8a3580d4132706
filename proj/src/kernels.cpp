#include "geocurve/kernels.hpp"

#include <atomic>
#include <cmath>

#include "geocurve/errors.hpp"

namespace geocurve::kernels {

namespace scalar {

double dot(const double* x, const double* y, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += x[i] * y[i];
  return acc;
}

void axpy(double a, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void pointwise_dot_soa(const double* a, const double* b, std::size_t d,
                       std::size_t n, double* out) {
  for (std::size_t i = 0; i < n; ++i) out[i] = 0.0;
  for (std::size_t j = 0; j < d; ++j) {
    const double* aj = a + j * n;
    const double* bj = b + j * n;
    for (std::size_t i = 0; i < n; ++i) out[i] += aj[i] * bj[i];
  }
}

void pointwise_geodesic_soa(const double* a, const double* b, std::size_t d,
                            std::size_t n, double* out) {
  for (std::size_t i = 0; i < n; ++i) {
    double s2 = 0.0;  // ||a-b||^2
    double c2 = 0.0;  // ||a+b||^2
    for (std::size_t j = 0; j < d; ++j) {
      const double aj = a[j * n + i];
      const double bj = b[j * n + i];
      const double dm = aj - bj;
      const double dp = aj + bj;
      s2 += dm * dm;
      c2 += dp * dp;
    }
    out[i] = 2.0 * std::atan2(std::sqrt(s2), std::sqrt(c2));
  }
}

double weighted_sumsq(const double* w, const double* x, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += w[i] * x[i] * x[i];
  return acc;
}

double max_value(const double* x, std::size_t n) {
  double m = x[0];
  for (std::size_t i = 1; i < n; ++i)
    if (x[i] > m) m = x[i];
  return m;
}

void gram_accumulate(const double* xs, const double* ys, std::size_t rows,
                     std::size_t dim, double* acc) {
  // Process sample rows in blocks of 4 so each row of acc is touched once per
  // block instead of once per sample.
  std::size_t l = 0;
  for (; l + 4 <= rows; l += 4) {
    const double* y0 = ys + (l + 0) * dim;
    const double* y1 = ys + (l + 1) * dim;
    const double* y2 = ys + (l + 2) * dim;
    const double* y3 = ys + (l + 3) * dim;
    for (std::size_t r = 0; r < dim; ++r) {
      const double x0 = xs[(l + 0) * dim + r];
      const double x1 = xs[(l + 1) * dim + r];
      const double x2 = xs[(l + 2) * dim + r];
      const double x3 = xs[(l + 3) * dim + r];
      double* row = acc + r * dim;
      for (std::size_t c = 0; c < dim; ++c)
        row[c] += x0 * y0[c] + x1 * y1[c] + x2 * y2[c] + x3 * y3[c];
    }
  }
  for (; l < rows; ++l) {
    const double* y = ys + l * dim;
    for (std::size_t r = 0; r < dim; ++r) {
      const double x = xs[l * dim + r];
      double* row = acc + r * dim;
      for (std::size_t c = 0; c < dim; ++c) row[c] += x * y[c];
    }
  }
}

}  // namespace scalar

namespace {

Backend detect_backend() {
#if defined(GEOCURVE_HAVE_AVX2) && (defined(__x86_64__) || defined(_M_X64))
  if (__builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma"))
    return Backend::avx2;
#endif
  return Backend::scalar;
}

std::atomic<Backend> g_backend{detect_backend()};

}  // namespace

bool avx2_supported() {
#if defined(GEOCURVE_HAVE_AVX2) && (defined(__x86_64__) || defined(_M_X64))
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

Backend active_backend() { return g_backend.load(std::memory_order_relaxed); }

void force_backend(Backend b) {
  if (b == Backend::avx2 && !avx2_supported())
    throw InvalidArgument("force_backend: AVX2 not available on this build/CPU");
  g_backend.store(b, std::memory_order_relaxed);
}

void reset_backend() { g_backend.store(detect_backend(), std::memory_order_relaxed); }

#if defined(GEOCURVE_HAVE_AVX2)
#define GEOCURVE_DISPATCH(fn, ...)                   \
  do {                                               \
    if (active_backend() == Backend::avx2)           \
      return avx2::fn(__VA_ARGS__);                  \
    return scalar::fn(__VA_ARGS__);                  \
  } while (0)
#else
#define GEOCURVE_DISPATCH(fn, ...) return scalar::fn(__VA_ARGS__)
#endif

double dot(const double* x, const double* y, std::size_t n) {
  GEOCURVE_DISPATCH(dot, x, y, n);
}

void axpy(double a, const double* x, double* y, std::size_t n) {
  GEOCURVE_DISPATCH(axpy, a, x, y, n);
}

void pointwise_dot_soa(const double* a, const double* b, std::size_t d,
                       std::size_t n, double* out) {
  GEOCURVE_DISPATCH(pointwise_dot_soa, a, b, d, n, out);
}

void pointwise_geodesic_soa(const double* a, const double* b, std::size_t d,
                            std::size_t n, double* out) {
  GEOCURVE_DISPATCH(pointwise_geodesic_soa, a, b, d, n, out);
}

double weighted_sumsq(const double* w, const double* x, std::size_t n) {
  GEOCURVE_DISPATCH(weighted_sumsq, w, x, n);
}

double max_value(const double* x, std::size_t n) {
  GEOCURVE_DISPATCH(max_value, x, n);
}

void gram_accumulate(const double* xs, const double* ys, std::size_t rows,
                     std::size_t dim, double* acc) {
  GEOCURVE_DISPATCH(gram_accumulate, xs, ys, rows, dim, acc);
}

#undef GEOCURVE_DISPATCH

}  // namespace geocurve::kernels
