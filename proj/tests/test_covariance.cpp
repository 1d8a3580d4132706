#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <random>
#include <vector>

#include "geocurve/covariance.hpp"
#include "geocurve/curve.hpp"
#include "geocurve/errors.hpp"
#include "support.hpp"

using namespace geocurve;

namespace {

ManifoldCurve constant_curve(const TimeGrid& grid, const std::vector<double>& p) {
  const std::size_t N = grid.size(), d = p.size();
  std::vector<double> vals(d * N);
  for (std::size_t j = 0; j < d; ++j)
    for (std::size_t i = 0; i < N; ++i) vals[j * N + i] = p[j];
  return ManifoldCurve(grid, d, std::move(vals));
}

// Quadrature weights tiled across components and window slots, matching the
// stack layout of the block operator.
Eigen::VectorXd tile_weights(const TimeGrid& grid, std::size_t dim, std::size_t lags) {
  const std::size_t N = grid.size();
  Eigen::VectorXd w(static_cast<Eigen::Index>(lags * dim * N));
  Eigen::Index at = 0;
  for (std::size_t s = 0; s < lags; ++s)
    for (std::size_t j = 0; j < dim; ++j)
      for (std::size_t i = 0; i < N; ++i) w[at++] = grid.trapezoid_weights()[i];
  return w;
}

double wdot(const Eigen::VectorXd& w, const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  return a.cwiseProduct(w).dot(b);
}

// Random columns orthonormalized in the weighted inner product.
Eigen::MatrixXd w_orthonormal(std::mt19937_64& rng, const Eigen::VectorXd& w,
                              Eigen::Index count) {
  std::normal_distribution<double> g(0.0, 1.0);
  const Eigen::Index D = w.size();
  Eigen::MatrixXd u(D, count);
  for (Eigen::Index c = 0; c < count; ++c) {
    Eigen::VectorXd v(D);
    for (Eigen::Index i = 0; i < D; ++i) v[i] = g(rng);
    for (int pass = 0; pass < 2; ++pass)
      for (Eigen::Index k = 0; k < c; ++k) v -= u.col(k) * wdot(w, u.col(k), v);
    v /= std::sqrt(wdot(w, v, v));
    u.col(c) = v;
  }
  return u;
}

TangentCurve field_at(const ManifoldCurve& base,
                      const std::vector<std::vector<double>>& basis,
                      const std::vector<std::vector<double>>& coords) {
  const std::size_t N = base.nodes(), d = base.dim();
  std::vector<double> vals(d * N, 0.0);
  for (std::size_t b = 0; b < basis.size(); ++b)
    for (std::size_t i = 0; i < N; ++i)
      for (std::size_t j = 0; j < d; ++j) vals[j * N + i] += coords[b][i] * basis[b][j];
  return TangentCurve(base, std::move(vals));
}

std::vector<TangentCurve> random_fields(std::mt19937_64& rng, const ManifoldCurve& base,
                                        std::size_t n, double scale) {
  const auto basis = testgen::tangent_basis(
      std::vector<double>(base.values().begin(), base.values().begin() + base.dim()));
  // constant base: component j of node 0 is values()[j*N], rebuild properly
  std::vector<double> p(base.dim());
  for (std::size_t j = 0; j < base.dim(); ++j) p[j] = base.value(j, 0);
  const auto tb = testgen::tangent_basis(p);
  std::normal_distribution<double> g(0.0, scale);
  std::vector<TangentCurve> out;
  out.reserve(n);
  for (std::size_t l = 0; l < n; ++l) {
    std::vector<std::vector<double>> coords(tb.size(), std::vector<double>(base.nodes()));
    for (auto& row : coords)
      for (auto& c : row) c = g(rng);
    out.push_back(field_at(base, tb, coords));
  }
  return out;
}

}  // namespace

TEST_SUITE("covariance") {

TEST_CASE("planted spectrum is recovered by from_dense") {
  std::mt19937_64 rng(401);
  const TimeGrid grid({0.0, 0.1, 0.35, 0.7, 1.0});
  const std::size_t dim = 1, lags = 2;
  const Eigen::Index D = static_cast<Eigen::Index>(lags * dim * grid.size());
  const Eigen::VectorXd w = tile_weights(grid, dim, lags);
  const Eigen::MatrixXd u = w_orthonormal(rng, w, D);

  Eigen::VectorXd lam(D);
  for (Eigen::Index k = 0; k < D; ++k) lam[k] = 3.0 * std::pow(0.5, double(k));
  Eigen::MatrixXd full = Eigen::MatrixXd::Zero(D, D);
  for (Eigen::Index k = 0; k < D; ++k) full += lam[k] * u.col(k) * u.col(k).transpose();

  const auto op = BlockCovarianceOperator::from_dense(grid, dim, lags, full);
  REQUIRE(op.eigenvalues().size() == D);
  for (Eigen::Index k = 0; k < D; ++k)
    CHECK(op.eigenvalues()[k] == doctest::Approx(lam[k]).epsilon(1e-10));

  for (Eigen::Index k = 0; k < D; ++k) {
    const Eigen::VectorXd v = op.eigenvector(static_cast<std::size_t>(k));
    // W-orthonormal and aligned with the planted direction up to sign
    CHECK(std::abs(wdot(w, v, v) - 1.0) < 1e-10);
    CHECK(std::abs(std::abs(wdot(w, v, u.col(k))) - 1.0) < 1e-8);
    const Eigen::VectorXd av = op.apply(v);
    CHECK((av - lam[k] * v).cwiseAbs().maxCoeff() < 1e-9);
  }

  // distinct eigenvectors stay W-orthogonal
  CHECK(std::abs(wdot(w, op.eigenvector(0), op.eigenvector(3))) < 1e-10);
}

TEST_CASE("rank deficient operators clip at zero") {
  std::mt19937_64 rng(402);
  const TimeGrid grid = TimeGrid::uniform(0.0, 1.0, 4);
  const Eigen::VectorXd w = tile_weights(grid, 1, 1);
  const Eigen::MatrixXd u = w_orthonormal(rng, w, 1);
  const Eigen::MatrixXd full = 2.0 * u.col(0) * u.col(0).transpose();

  const auto op = BlockCovarianceOperator::from_dense(grid, 1, 1, full);
  CHECK(op.eigenvalues()[0] == doctest::Approx(2.0).epsilon(1e-12));
  for (Eigen::Index k = 1; k < op.eigenvalues().size(); ++k) {
    CHECK(op.eigenvalues()[k] >= 0.0);
    CHECK(op.eigenvalues()[k] < 1e-12);
  }
}

TEST_CASE("from_dense validates shape") {
  const TimeGrid grid = TimeGrid::uniform(0.0, 1.0, 3);
  CHECK_THROWS_AS(BlockCovarianceOperator::from_dense(grid, 1, 0, Eigen::MatrixXd::Zero(3, 3)),
                  InvalidArgument);
  CHECK_THROWS_AS(BlockCovarianceOperator::from_dense(grid, 2, 1, Eigen::MatrixXd::Zero(3, 3)),
                  DimensionMismatch);
}

TEST_CASE("lag covariance matches a loop computation") {
  std::mt19937_64 rng(403);
  const TimeGrid grid({0.0, 0.2, 0.55, 1.0});
  const auto p = testgen::random_unit(rng, 3);
  const auto base = constant_curve(grid, p);
  const auto logs = random_fields(rng, base, 5, 0.3);
  const std::size_t n = logs.size();
  const std::size_t D = logs[0].dim() * logs[0].nodes();

  for (bool center : {true, false}) {
    for (std::size_t lag : {std::size_t{0}, std::size_t{1}, std::size_t{2}}) {
      const auto kern = empirical_lag_covariance(logs, lag, center);

      std::vector<std::vector<double>> rows(n);
      for (std::size_t l = 0; l < n; ++l)
        rows[l].assign(logs[l].values().begin(), logs[l].values().end());
      if (center) {
        std::vector<double> mean(D, 0.0);
        for (std::size_t l = 0; l < n; ++l)
          for (std::size_t t = 0; t < D; ++t) mean[t] += rows[l][t] / double(n);
        for (std::size_t l = 0; l < n; ++l)
          for (std::size_t t = 0; t < D; ++t) rows[l][t] -= mean[t];
      }
      double worst = 0.0;
      for (std::size_t r = 0; r < D; ++r)
        for (std::size_t c = 0; c < D; ++c) {
          double acc = 0.0;
          for (std::size_t l = 0; l + lag < n; ++l) acc += rows[l][r] * rows[l + lag][c];
          acc /= double(n - lag);
          worst = std::max(worst, std::abs(acc - kern.block()(Eigen::Index(r), Eigen::Index(c))));
        }
      CHECK(worst < 1e-13);
    }
  }

  CHECK_THROWS_AS(empirical_lag_covariance(logs, n, true), InvalidArgument);
}

TEST_CASE("assemble lays the lag blocks out symmetrically") {
  std::mt19937_64 rng(404);
  const TimeGrid grid = TimeGrid::uniform(0.0, 1.0, 4);
  const auto p = testgen::random_unit(rng, 3);
  const auto base = constant_curve(grid, p);
  const auto logs = random_fields(rng, base, 6, 0.4);
  const std::size_t m = 1;
  const Eigen::Index D = static_cast<Eigen::Index>(logs[0].dim() * logs[0].nodes());

  const auto op = BlockCovarianceOperator::assemble(logs, m, true);
  REQUIRE(op.lags() == m + 1);
  REQUIRE(op.stack_dim() == std::size_t(2 * D));

  // stacked-window oracle: every block averages over the same n-m windows,
  // after subtracting the global mean curve
  const std::size_t n = logs.size(), K = n - m;
  std::vector<Eigen::VectorXd> z;
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(D);
  for (const auto& lg : logs) {
    Eigen::VectorXd v(D);
    for (Eigen::Index t = 0; t < D; ++t) v(t) = lg.values()[std::size_t(t)];
    z.push_back(v);
    mean += v / double(n);
  }
  for (auto& v : z) v -= mean;
  auto window_block = [&](std::size_t r, std::size_t s) {
    Eigen::MatrixXd B = Eigen::MatrixXd::Zero(D, D);
    for (std::size_t i = 0; i < K; ++i) B += z[i + r] * z[i + s].transpose();
    return Eigen::MatrixXd(B / double(K));
  };

  const auto& full = op.full_matrix();
  CHECK((full.block(0, 0, D, D) - window_block(0, 0)).cwiseAbs().maxCoeff() < 1e-14);
  CHECK((full.block(D, D, D, D) - window_block(1, 1)).cwiseAbs().maxCoeff() < 1e-14);
  CHECK((full.block(0, D, D, D) - window_block(0, 1)).cwiseAbs().maxCoeff() < 1e-14);
  CHECK((full.block(D, 0, D, D) - window_block(0, 1).transpose()).cwiseAbs().maxCoeff() < 1e-14);
  CHECK((full - full.transpose()).cwiseAbs().maxCoeff() == 0.0);
  CHECK(op.eigenvalues().minCoeff() >= 0.0);

  CHECK((op.lag_kernel(1).block() - window_block(0, 1)).cwiseAbs().maxCoeff() < 1e-14);
  CHECK_THROWS_AS(op.lag_kernel(2), InvalidArgument);

  // too few curves for the window length
  std::vector<TangentCurve> two(logs.begin(), logs.begin() + 2);
  CHECK_THROWS_AS(BlockCovarianceOperator::assemble(two, 1, true), InvalidArgument);
}

TEST_CASE("make_stack flattens windows slot-major") {
  std::mt19937_64 rng(405);
  const TimeGrid grid = TimeGrid::uniform(0.0, 1.0, 3);
  const auto p = testgen::random_unit(rng, 3);
  const auto base = constant_curve(grid, p);
  const auto logs = random_fields(rng, base, 4, 0.3);

  const auto op = BlockCovarianceOperator::assemble(logs, 1, true);
  const std::size_t D = logs[0].dim() * logs[0].nodes();
  std::vector<TangentCurve> window(logs.begin(), logs.begin() + 2);
  const Eigen::VectorXd stack = op.make_stack(window);
  REQUIRE(stack.size() == Eigen::Index(2 * D));
  for (std::size_t s = 0; s < 2; ++s)
    for (std::size_t t = 0; t < D; ++t)
      CHECK(stack[Eigen::Index(s * D + t)] == window[s].values()[t]);

  std::vector<TangentCurve> wrong(logs.begin(), logs.begin() + 1);
  CHECK_THROWS_AS(op.make_stack(wrong), DimensionMismatch);
}

TEST_CASE("regularized inverse reciprocates the planted spectrum") {
  std::mt19937_64 rng(406);
  const TimeGrid grid = TimeGrid::uniform(0.0, 1.0, 4);
  const Eigen::VectorXd w = tile_weights(grid, 1, 1);
  const Eigen::MatrixXd u = w_orthonormal(rng, w, 2);
  const Eigen::MatrixXd full =
      4.0 * u.col(0) * u.col(0).transpose() + 1.0 * u.col(1) * u.col(1).transpose();
  const auto op = BlockCovarianceOperator::from_dense(grid, 1, 1, full);

  const RegularizedInverse inv(op, 0.0, 1e-6);
  CHECK(inv.retained() == 2);
  // eigenvalue 4 inverts to 1/4, eigenvalue 1 to 1
  CHECK((inv.apply(u.col(0)) - 0.25 * u.col(0)).cwiseAbs().maxCoeff() < 1e-10);
  CHECK((inv.apply(u.col(1)) - u.col(1)).cwiseAbs().maxCoeff() < 1e-10);
  CHECK(inv.quad_form(u.col(0)) == doctest::Approx(0.25).epsilon(1e-10));
  CHECK(std::abs(inv.pairing(u.col(0), u.col(1))) < 1e-12);

  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(u.rows());
  CHECK(mahalanobis_semidistance(inv, u.col(0), zero) == doctest::Approx(0.5).epsilon(1e-10));
  CHECK(mahalanobis_semidistance(op, 0.0, 1e-6, u.col(0), zero) ==
        doctest::Approx(0.5).epsilon(1e-10));

  const RegularizedInverse ridged(op, 1.0, 1e-6);
  CHECK((ridged.apply(u.col(0)) - u.col(0) / 5.0).cwiseAbs().maxCoeff() < 1e-10);
  CHECK(ridged.quad_form(u.col(0)) == doctest::Approx(0.2).epsilon(1e-10));

  // whitener factors the pairing
  std::normal_distribution<double> g(0.0, 1.0);
  Eigen::VectorXd x(u.rows()), y(u.rows());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    x[i] = g(rng);
    y[i] = g(rng);
  }
  const auto& P = inv.whitener();
  CHECK(inv.pairing(x, y) == doctest::Approx((P * x).dot(P * y)).epsilon(1e-12));
}

TEST_CASE("cutoff drops the tail of the spectrum") {
  std::mt19937_64 rng(407);
  const TimeGrid grid = TimeGrid::uniform(0.0, 1.0, 5);
  const Eigen::VectorXd w = tile_weights(grid, 1, 1);
  const Eigen::MatrixXd u = w_orthonormal(rng, w, 3);
  const Eigen::MatrixXd full = 1.0 * u.col(0) * u.col(0).transpose() +
                               0.5 * u.col(1) * u.col(1).transpose() +
                               1e-6 * u.col(2) * u.col(2).transpose();
  const auto op = BlockCovarianceOperator::from_dense(grid, 1, 1, full);

  CHECK(RegularizedInverse(op, 0.0, 1e-3).retained() == 2);
  CHECK(RegularizedInverse(op, 0.0, 1e-9).retained() == 3);
  // the cut component contributes nothing to the semidistance
  const RegularizedInverse inv(op, 0.0, 1e-3);
  CHECK(inv.quad_form(u.col(2)) < 1e-10);
}

TEST_CASE("mahalanobis agrees with the spectral oracle") {
  std::mt19937_64 rng(408);
  const TimeGrid grid({0.0, 0.15, 0.3, 0.8, 1.0});
  const std::size_t dim = 1, lags = 2;
  const Eigen::Index D = static_cast<Eigen::Index>(lags * dim * grid.size());
  const Eigen::VectorXd w = tile_weights(grid, dim, lags);
  const Eigen::MatrixXd u = w_orthonormal(rng, w, D);

  Eigen::VectorXd lam(D);
  for (Eigen::Index k = 0; k < D; ++k) lam[k] = 2.0 * std::exp(-double(k));
  Eigen::MatrixXd full = Eigen::MatrixXd::Zero(D, D);
  for (Eigen::Index k = 0; k < D; ++k) full += lam[k] * u.col(k) * u.col(k).transpose();
  const auto op = BlockCovarianceOperator::from_dense(grid, dim, lags, full);

  const double ridge = 0.017, cutoff = 1e-3;
  const RegularizedInverse inv(op, ridge, cutoff);

  std::normal_distribution<double> g(0.0, 1.0);
  for (int rep = 0; rep < 20; ++rep) {
    Eigen::VectorXd x(D), y(D);
    for (Eigen::Index i = 0; i < D; ++i) {
      x[i] = g(rng);
      y[i] = g(rng);
    }
    double acc = 0.0;
    for (std::size_t k = 0; k < inv.retained(); ++k) {
      const double c = wdot(w, op.eigenvector(k), x - y);
      acc += c * c / (op.eigenvalues()[Eigen::Index(k)] + ridge);
    }
    const double got = mahalanobis_semidistance(inv, x, y);
    CHECK(got == doctest::Approx(std::sqrt(acc)).epsilon(1e-10));
  }
}

TEST_CASE("degenerate spectra are rejected") {
  const TimeGrid grid = TimeGrid::uniform(0.0, 1.0, 3);
  const Eigen::Index D = 3;
  const auto op = BlockCovarianceOperator::from_dense(grid, 1, 1, Eigen::MatrixXd::Zero(D, D));
  CHECK_THROWS_AS(RegularizedInverse(op, 0.0, 1e-6), DegenerateCovariance);
  CHECK_THROWS_AS(RegularizedKernel::from_operator(op), DegenerateCovariance);

  std::mt19937_64 rng(409);
  const Eigen::VectorXd w = tile_weights(grid, 1, 1);
  const Eigen::MatrixXd u = w_orthonormal(rng, w, 1);
  const auto ok = BlockCovarianceOperator::from_dense(grid, 1, 1,
                                                      u.col(0) * u.col(0).transpose());
  CHECK_THROWS_AS(RegularizedInverse(ok, -1.0, 1e-6), InvalidArgument);
  CHECK_THROWS_AS(RegularizedInverse(ok, 0.0, 0.0), InvalidArgument);
  CHECK_THROWS_AS(RegularizedInverse(ok, 0.0, 2.0), InvalidArgument);
}

TEST_CASE("nuclear norm sums planted magnitudes") {
  std::mt19937_64 rng(410);
  const TimeGrid grid({0.0, 0.3, 0.45, 1.0});
  const Eigen::VectorXd w = tile_weights(grid, 1, 1);
  const Eigen::MatrixXd u = w_orthonormal(rng, w, 3);
  const Eigen::MatrixXd block = 2.0 * u.col(0) * u.col(0).transpose() +
                                0.7 * u.col(1) * u.col(1).transpose() -
                                0.3 * u.col(2) * u.col(2).transpose();
  const DiscretizedKernel kern(grid, 1, block);
  CHECK(kern.nuclear_norm() == doctest::Approx(3.0).epsilon(1e-9));

  // apply folds the quadrature weights in
  const Eigen::VectorXd got = kern.apply(u.col(0));
  CHECK((got - 2.0 * u.col(0)).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("kernel gammas follow the exponent") {
  std::mt19937_64 rng(411);
  const TimeGrid grid = TimeGrid::uniform(0.0, 1.0, 6);
  Eigen::VectorXd w(6);
  for (std::size_t i = 0; i < 6; ++i) w[Eigen::Index(i)] = grid.trapezoid_weights()[i];
  const Eigen::MatrixXd phi = w_orthonormal(rng, w, 2);
  Eigen::VectorXd raw(2);
  raw << 4.0, 1.0;

  const auto k1 = RegularizedKernel::from_eigenfunctions(grid, phi, raw, 1.0);
  CHECK(k1.gammas()[0] == doctest::Approx(0.8).epsilon(1e-12));
  CHECK(k1.gammas()[1] == doctest::Approx(0.2).epsilon(1e-12));

  const auto kh = RegularizedKernel::from_eigenfunctions(grid, phi, raw, 0.5);
  CHECK(kh.gammas()[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  CHECK(kh.gammas()[1] == doctest::Approx(1.0 / 3.0).epsilon(1e-12));

  const auto k0 = RegularizedKernel::from_eigenfunctions(grid, phi, raw, 0.0);
  CHECK(k0.gammas()[0] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(k0.gammas().sum() == doctest::Approx(1.0).epsilon(1e-12));

  Eigen::VectorXd bad(2);
  bad << 1.0, 0.0;
  CHECK_THROWS_AS(RegularizedKernel::from_eigenfunctions(grid, phi, bad, 1.0), InvalidArgument);
  CHECK_THROWS_AS(
      RegularizedKernel::from_eigenfunctions(grid, phi, Eigen::VectorXd::Ones(3), 1.0),
      DimensionMismatch);
}

TEST_CASE("sqrt kernel scales eigenfunction coordinates") {
  std::mt19937_64 rng(412);
  const TimeGrid grid({0.0, 0.2, 0.5, 0.65, 1.0});
  const std::size_t N = grid.size();
  Eigen::VectorXd w(static_cast<Eigen::Index>(N));
  for (std::size_t i = 0; i < N; ++i) w[Eigen::Index(i)] = grid.trapezoid_weights()[i];
  const Eigen::MatrixXd phi = w_orthonormal(rng, w, 3);
  Eigen::VectorXd raw(3);
  raw << 2.0, 1.0, 0.5;
  const auto kern = RegularizedKernel::from_eigenfunctions(grid, phi, raw, 1.0);

  const auto p = testgen::random_unit(rng, 3);
  const auto base = constant_curve(grid, p);
  const auto tb = testgen::tangent_basis(p);

  for (Eigen::Index k = 0; k < 3; ++k) {
    // tangent field phi_k(t) * tau with constant tau
    std::vector<std::vector<double>> coords(1, std::vector<double>(N));
    for (std::size_t i = 0; i < N; ++i) coords[0][i] = phi(Eigen::Index(i), k);
    const auto u = field_at(base, {tb[0]}, coords);
    const auto img = sqrt_kernel_apply(kern, u);
    const double s = std::sqrt(kern.gammas()[k]);
    double worst = 0.0;
    for (std::size_t t = 0; t < u.values().size(); ++t)
      worst = std::max(worst, std::abs(img.values()[t] - s * u.values()[t]));
    CHECK(worst < 1e-10);
    CHECK(hw_inner_product(kern, u, u) == doctest::Approx(kern.gammas()[k]).epsilon(1e-10));
  }

  // distinct eigenfunction fields are H-orthogonal
  std::vector<std::vector<double>> c0(1, std::vector<double>(N)), c1(1, std::vector<double>(N));
  for (std::size_t i = 0; i < N; ++i) {
    c0[0][i] = phi(Eigen::Index(i), 0);
    c1[0][i] = phi(Eigen::Index(i), 1);
  }
  const auto u0 = field_at(base, {tb[0]}, c0);
  const auto u1 = field_at(base, {tb[1]}, c1);
  CHECK(std::abs(hw_inner_product(kern, u0, u1)) < 1e-12);
}

TEST_CASE("hw inner product matches the filtered quadrature dot") {
  std::mt19937_64 rng(413);
  const TimeGrid grid({0.0, 0.25, 0.4, 0.9, 1.0});
  const std::size_t N = grid.size(), d = 3;
  Eigen::VectorXd w(static_cast<Eigen::Index>(N));
  for (std::size_t i = 0; i < N; ++i) w[Eigen::Index(i)] = grid.trapezoid_weights()[i];
  const Eigen::MatrixXd phi = w_orthonormal(rng, w, 4);
  Eigen::VectorXd raw(4);
  raw << 3.0, 2.0, 1.0, 0.25;
  const auto kern = RegularizedKernel::from_eigenfunctions(grid, phi, raw, 0.5);

  const auto p = testgen::random_unit(rng, d);
  const auto base = constant_curve(grid, p);
  const auto fields = random_fields(rng, base, 2, 0.5);

  std::vector<double> fu(d * N), fv(d * N);
  kern.apply_sqrt_soa(fields[0].values().data(), fu.data(), d);
  kern.apply_sqrt_soa(fields[1].values().data(), fv.data(), d);
  double dot = 0.0;
  for (std::size_t j = 0; j < d; ++j)
    for (std::size_t i = 0; i < N; ++i)
      dot += grid.trapezoid_weights()[i] * fu[j * N + i] * fv[j * N + i];

  CHECK(hw_inner_product(kern, fields[0], fields[1]) == doctest::Approx(dot).epsilon(1e-10));

  // cached sqrt matrix is the spectral filter in explicit form
  const Eigen::MatrixXd expect =
      phi * kern.gammas().cwiseSqrt().asDiagonal() * phi.transpose() * w.asDiagonal();
  CHECK((kern.sqrt_matrix() - expect).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("from_operator traces the lag zero block") {
  std::mt19937_64 rng(414);
  const TimeGrid grid = TimeGrid::uniform(0.0, 1.0, 6);
  const auto p = testgen::random_unit(rng, 3);
  const auto base = constant_curve(grid, p);
  const auto logs = random_fields(rng, base, 25, 0.4);
  const auto op = BlockCovarianceOperator::assemble(logs, 1, true);

  const double exponent = 0.5, cutoff = 1e-9;
  const auto kern = RegularizedKernel::from_operator(op, exponent, cutoff);
  CHECK(kern.gammas().sum() == doctest::Approx(1.0).epsilon(1e-12));
  for (Eigen::Index k = 0; k < kern.gammas().size(); ++k) CHECK(kern.gammas()[k] > 0.0);

  const std::size_t N = grid.size();
  Eigen::VectorXd w(static_cast<Eigen::Index>(N));
  for (std::size_t i = 0; i < N; ++i) w[Eigen::Index(i)] = grid.trapezoid_weights()[i];

  // eigenfunctions W-orthonormal
  const auto& phi = kern.eigenfunctions();
  for (Eigen::Index a = 0; a < phi.cols(); ++a)
    for (Eigen::Index b = 0; b <= a; ++b) {
      const double ip = wdot(w, phi.col(a), phi.col(b));
      CHECK(std::abs(ip - (a == b ? 1.0 : 0.0)) < 1e-10);
    }

  // oracle: trace the lag-0 block over ambient components, eigendecompose in
  // the quadrature metric, and normalize the powered spectrum
  Eigen::MatrixXd scalar = Eigen::MatrixXd::Zero(Eigen::Index(N), Eigen::Index(N));
  for (std::size_t j = 0; j < 3; ++j)
    scalar += op.full_matrix().block(Eigen::Index(j * N), Eigen::Index(j * N), Eigen::Index(N),
                                     Eigen::Index(N));
  const Eigen::VectorXd sw = w.cwiseSqrt();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sw.asDiagonal() * scalar *
                                                     sw.asDiagonal());
  std::vector<double> lams;
  const double lam1 = eig.eigenvalues().maxCoeff();
  for (Eigen::Index k = eig.eigenvalues().size(); k-- > 0;)
    if (eig.eigenvalues()[k] >= cutoff * lam1 && eig.eigenvalues()[k] > 0.0)
      lams.push_back(eig.eigenvalues()[k]);
  REQUIRE(kern.retained() == lams.size());
  double total = 0.0;
  for (double l : lams) total += std::pow(l, exponent);
  for (std::size_t k = 0; k < lams.size(); ++k)
    CHECK(kern.gammas()[Eigen::Index(k)] ==
          doctest::Approx(std::pow(lams[k], exponent) / total).epsilon(1e-9));
}

}  // TEST_SUITE
