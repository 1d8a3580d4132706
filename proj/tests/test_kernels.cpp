#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "geocurve/errors.hpp"
#include "geocurve/kernels.hpp"

namespace k = geocurve::kernels;

namespace {

struct BackendGuard {
  ~BackendGuard() { k::reset_backend(); }
};

std::vector<double> random_vec(std::mt19937_64& rng, std::size_t n, double lo = -1.0,
                               double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> v(n);
  for (auto& x : v) x = u(rng);
  return v;
}

// Unit-norm SoA array of n points in R^d.
std::vector<double> random_soa_points(std::mt19937_64& rng, std::size_t d, std::size_t n) {
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<double> v(d * n);
  for (std::size_t i = 0; i < n; ++i) {
    double n2 = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
      v[j * n + i] = g(rng);
      n2 += v[j * n + i] * v[j * n + i];
    }
    const double inv = 1.0 / std::sqrt(n2);
    for (std::size_t j = 0; j < d; ++j) v[j * n + i] *= inv;
  }
  return v;
}

const std::size_t kSizes[] = {1, 2, 3, 4, 5, 7, 8, 9, 15, 16, 17, 33, 100, 257, 1024};

}  // namespace

TEST_SUITE("kernels") {

TEST_CASE("scalar dot/axpy/sumsq/max agree with naive loops") {
  std::mt19937_64 rng(7);
  for (std::size_t n : kSizes) {
    const auto x = random_vec(rng, n), y = random_vec(rng, n), w = random_vec(rng, n, 0, 1);
    double ref = 0.0;
    for (std::size_t i = 0; i < n; ++i) ref += x[i] * y[i];
    CHECK(k::scalar::dot(x.data(), y.data(), n) == doctest::Approx(ref).epsilon(1e-13));

    auto acc = y;
    k::scalar::axpy(0.37, x.data(), acc.data(), n);
    for (std::size_t i = 0; i < n; ++i)
      CHECK(acc[i] == doctest::Approx(y[i] + 0.37 * x[i]).epsilon(1e-14));

    double ss = 0.0, mx = x[0];
    for (std::size_t i = 0; i < n; ++i) {
      ss += w[i] * x[i] * x[i];
      mx = std::max(mx, x[i]);
    }
    CHECK(k::scalar::weighted_sumsq(w.data(), x.data(), n) ==
          doctest::Approx(ss).epsilon(1e-13));
    CHECK(k::scalar::max_value(x.data(), n) == mx);
  }
}

TEST_CASE("scalar gram_accumulate matches the naive outer-product sum") {
  std::mt19937_64 rng(11);
  for (std::size_t dim : {1u, 2u, 3u, 5u, 8u}) {
    for (std::size_t rows : {1u, 2u, 7u, 32u}) {
      const auto xs = random_vec(rng, rows * dim), ys = random_vec(rng, rows * dim);
      std::vector<double> acc(dim * dim, 0.5), ref(dim * dim, 0.5);
      k::scalar::gram_accumulate(xs.data(), ys.data(), rows, dim, acc.data());
      for (std::size_t l = 0; l < rows; ++l)
        for (std::size_t a = 0; a < dim; ++a)
          for (std::size_t b = 0; b < dim; ++b)
            ref[a * dim + b] += xs[l * dim + a] * ys[l * dim + b];
      for (std::size_t t = 0; t < dim * dim; ++t)
        CHECK(acc[t] == doctest::Approx(ref[t]).epsilon(1e-12));
    }
  }
}

TEST_CASE("avx2 variants match scalar on remainder-heavy sizes") {
  if (!k::avx2_supported()) return;  // nothing to compare on this host
  std::mt19937_64 rng(13);
  for (std::size_t n : kSizes) {
    const auto x = random_vec(rng, n), y = random_vec(rng, n), w = random_vec(rng, n, 0, 1);
    CHECK(k::avx2::dot(x.data(), y.data(), n) ==
          doctest::Approx(k::scalar::dot(x.data(), y.data(), n)).epsilon(1e-12));
    CHECK(k::avx2::weighted_sumsq(w.data(), x.data(), n) ==
          doctest::Approx(k::scalar::weighted_sumsq(w.data(), x.data(), n)).epsilon(1e-12));
    CHECK(k::avx2::max_value(x.data(), n) == k::scalar::max_value(x.data(), n));

    auto a1 = y, a2 = y;
    k::scalar::axpy(-1.7, x.data(), a1.data(), n);
    k::avx2::axpy(-1.7, x.data(), a2.data(), n);
    for (std::size_t i = 0; i < n; ++i) CHECK(a2[i] == doctest::Approx(a1[i]).epsilon(1e-13));

    for (std::size_t d : {2u, 3u, 4u}) {
      const auto p = random_soa_points(rng, d, n), q = random_soa_points(rng, d, n);
      std::vector<double> o1(n), o2(n);
      k::scalar::pointwise_dot_soa(p.data(), q.data(), d, n, o1.data());
      k::avx2::pointwise_dot_soa(p.data(), q.data(), d, n, o2.data());
      for (std::size_t i = 0; i < n; ++i)
        CHECK(o2[i] == doctest::Approx(o1[i]).epsilon(1e-12));
      k::scalar::pointwise_geodesic_soa(p.data(), q.data(), d, n, o1.data());
      k::avx2::pointwise_geodesic_soa(p.data(), q.data(), d, n, o2.data());
      for (std::size_t i = 0; i < n; ++i)
        CHECK(o2[i] == doctest::Approx(o1[i]).epsilon(1e-12));
    }
  }
}

TEST_CASE("avx2 gram_accumulate matches scalar") {
  if (!k::avx2_supported()) return;
  std::mt19937_64 rng(17);
  for (std::size_t dim : {1u, 3u, 4u, 7u, 8u, 13u}) {
    for (std::size_t rows : {1u, 3u, 4u, 5u, 21u}) {
      const auto xs = random_vec(rng, rows * dim), ys = random_vec(rng, rows * dim);
      std::vector<double> a1(dim * dim, 0.0), a2(dim * dim, 0.0);
      k::scalar::gram_accumulate(xs.data(), ys.data(), rows, dim, a1.data());
      k::avx2::gram_accumulate(xs.data(), ys.data(), rows, dim, a2.data());
      for (std::size_t t = 0; t < dim * dim; ++t)
        CHECK(a2[t] == doctest::Approx(a1[t]).epsilon(1e-12));
    }
  }
}

TEST_CASE("force_backend switches the dispatcher and reset restores detection") {
  BackendGuard guard;
  k::force_backend(k::Backend::scalar);
  CHECK(k::active_backend() == k::Backend::scalar);
  const double x[] = {1.0, 2.0, 3.0};
  CHECK(k::dot(x, x, 3) == doctest::Approx(14.0));
  if (k::avx2_supported()) {
    k::force_backend(k::Backend::avx2);
    CHECK(k::active_backend() == k::Backend::avx2);
    CHECK(k::dot(x, x, 3) == doctest::Approx(14.0));
  } else {
    CHECK_THROWS_AS(k::force_backend(k::Backend::avx2), geocurve::InvalidArgument);
  }
  k::reset_backend();
  CHECK((k::active_backend() == k::Backend::scalar ||
         k::active_backend() == k::Backend::avx2));
}

TEST_CASE("dispatched results are identical under both backends") {
  if (!k::avx2_supported()) return;
  BackendGuard guard;
  std::mt19937_64 rng(23);
  const std::size_t n = 403;
  const auto p = random_soa_points(rng, 3, n), q = random_soa_points(rng, 3, n);
  std::vector<double> o1(n), o2(n);
  k::force_backend(k::Backend::scalar);
  k::pointwise_geodesic_soa(p.data(), q.data(), 3, n, o1.data());
  k::force_backend(k::Backend::avx2);
  k::pointwise_geodesic_soa(p.data(), q.data(), 3, n, o2.data());
  for (std::size_t i = 0; i < n; ++i) CHECK(o2[i] == doctest::Approx(o1[i]).epsilon(1e-12));
}

}  // TEST_SUITE
