#pragma once

#include <cstddef>

// Hot numeric loops shared by the curve, covariance and regression layers.
// Every kernel has a scalar reference implementation and, on x86 builds, an
// AVX2 variant; the active backend is picked at runtime from cpuid and can be
// forced for testing. Curve data is laid out component-major (SoA): component
// j of node i of a d-dimensional curve with n nodes sits at [j * n + i].

namespace geocurve::kernels {

enum class Backend { scalar, avx2 };

// Backend currently used by the dispatching wrappers below.
Backend active_backend();

// True when the AVX2 variants were compiled in and the CPU supports them.
bool avx2_supported();

// Force a backend (tests use this to compare variants). Throws
// InvalidArgument when asking for an unavailable backend.
void force_backend(Backend b);

// Back to auto-detection.
void reset_backend();

// sum_i x[i] * y[i]
double dot(const double* x, const double* y, std::size_t n);

// y[i] += a * x[i]
void axpy(double a, const double* x, double* y, std::size_t n);

// out[i] = sum_j a[j*n+i] * b[j*n+i]; per-node inner products of two SoA
// point arrays.
void pointwise_dot_soa(const double* a, const double* b, std::size_t d,
                       std::size_t n, double* out);

// out[i] = geodesic distance on the unit sphere between node i of a and of b,
// computed as 2*atan2(||a-b||, ||a+b||) which is exact at both 0 and pi.
void pointwise_geodesic_soa(const double* a, const double* b, std::size_t d,
                            std::size_t n, double* out);

// sum_i w[i] * x[i]^2 (quadrature of squared distances).
double weighted_sumsq(const double* w, const double* x, std::size_t n);

// max_i x[i]; n must be >= 1.
double max_value(const double* x, std::size_t n);

// acc(dim x dim, row-major) += sum_l xs[l*dim..] * ys[l*dim..]^T; the
// outer-product accumulation behind empirical lag covariances.
void gram_accumulate(const double* xs, const double* ys, std::size_t rows,
                     std::size_t dim, double* acc);

namespace scalar {
double dot(const double* x, const double* y, std::size_t n);
void axpy(double a, const double* x, double* y, std::size_t n);
void pointwise_dot_soa(const double* a, const double* b, std::size_t d,
                       std::size_t n, double* out);
void pointwise_geodesic_soa(const double* a, const double* b, std::size_t d,
                            std::size_t n, double* out);
double weighted_sumsq(const double* w, const double* x, std::size_t n);
double max_value(const double* x, std::size_t n);
void gram_accumulate(const double* xs, const double* ys, std::size_t rows,
                     std::size_t dim, double* acc);
}  // namespace scalar

#if defined(GEOCURVE_HAVE_AVX2)
namespace avx2 {
double dot(const double* x, const double* y, std::size_t n);
void axpy(double a, const double* x, double* y, std::size_t n);
void pointwise_dot_soa(const double* a, const double* b, std::size_t d,
                       std::size_t n, double* out);
void pointwise_geodesic_soa(const double* a, const double* b, std::size_t d,
                            std::size_t n, double* out);
double weighted_sumsq(const double* w, const double* x, std::size_t n);
double max_value(const double* x, std::size_t n);
void gram_accumulate(const double* xs, const double* ys, std::size_t rows,
                     std::size_t dim, double* acc);
}  // namespace avx2
#endif

}  // namespace geocurve::kernels
