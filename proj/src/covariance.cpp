#include "geocurve/covariance.hpp"

#include <cmath>
#include <string>

#include "geocurve/errors.hpp"
#include "geocurve/kernels.hpp"

namespace geocurve {

namespace {

Eigen::VectorXd expand_weights(const TimeGrid& grid, std::size_t dim, std::size_t lags) {
  const std::size_t n = grid.size();
  Eigen::VectorXd w(static_cast<Eigen::Index>(lags * dim * n));
  std::size_t at = 0;
  for (std::size_t s = 0; s < lags; ++s)
    for (std::size_t j = 0; j < dim; ++j)
      for (std::size_t i = 0; i < n; ++i) w[at++] = grid.trapezoid_weights()[i];
  return w;
}

void check_log_sample(std::span<const TangentCurve> logs, const char* who) {
  if (logs.empty()) throw InvalidArgument(std::string(who) + ": empty sample");
  const auto& g = logs[0].grid();
  const std::size_t d = logs[0].dim();
  for (const auto& l : logs) {
    if (l.dim() != d) throw DimensionMismatch(std::string(who) + ": dimension mismatch");
    if (!(l.grid() == g))
      throw GridMismatch(std::string(who) + ": tangent curves on different grids");
  }
}

}  // namespace

DiscretizedKernel::DiscretizedKernel(TimeGrid grid, std::size_t dim, Eigen::MatrixXd block)
    : grid_(std::move(grid)), dim_(dim), block_(std::move(block)) {
  const auto expected = static_cast<Eigen::Index>(grid_.size() * dim_);
  if (block_.rows() != expected || block_.cols() != expected)
    throw DimensionMismatch("DiscretizedKernel: block is " + std::to_string(block_.rows()) +
                            "x" + std::to_string(block_.cols()) + ", expected " +
                            std::to_string(expected) + " square");
  weights_ = expand_weights(grid_, dim_, 1);
}

Eigen::VectorXd DiscretizedKernel::apply(const Eigen::VectorXd& v) const {
  if (v.size() != block_.rows())
    throw DimensionMismatch("DiscretizedKernel::apply: vector size mismatch");
  return block_ * weights_.cwiseProduct(v);
}

double DiscretizedKernel::nuclear_norm() const {
  const Eigen::VectorXd sw = weights_.cwiseSqrt();
  const Eigen::MatrixXd sym = sw.asDiagonal() * block_ * sw.asDiagonal();
  Eigen::BDCSVD<Eigen::MatrixXd> svd(sym);
  return svd.singularValues().sum();
}

DiscretizedKernel empirical_lag_covariance(std::span<const TangentCurve> logs,
                                           std::size_t lag, bool center) {
  check_log_sample(logs, "empirical_lag_covariance");
  const std::size_t n = logs.size();
  if (lag >= n)
    throw InvalidArgument("empirical_lag_covariance: lag " + std::to_string(lag) +
                          " >= sample size " + std::to_string(n));
  const std::size_t D = logs[0].dim() * logs[0].nodes();

  std::vector<double> rows(n * D);
  for (std::size_t l = 0; l < n; ++l)
    std::copy(logs[l].values().begin(), logs[l].values().end(), rows.begin() + l * D);
  if (center) {
    std::vector<double> mean(D, 0.0);
    for (std::size_t l = 0; l < n; ++l)
      kernels::axpy(1.0 / static_cast<double>(n), rows.data() + l * D, mean.data(), D);
    for (std::size_t l = 0; l < n; ++l)
      kernels::axpy(-1.0, mean.data(), rows.data() + l * D, D);
  }

  std::vector<double> acc(D * D, 0.0);
  kernels::gram_accumulate(rows.data(), rows.data() + lag * D, n - lag, D, acc.data());
  const double scale = 1.0 / static_cast<double>(n - lag);
  Eigen::MatrixXd block(D, D);
  for (std::size_t r = 0; r < D; ++r)
    for (std::size_t c = 0; c < D; ++c)
      block(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          scale * acc[r * D + c];
  return DiscretizedKernel(logs[0].grid(), logs[0].dim(), std::move(block));
}

BlockCovarianceOperator BlockCovarianceOperator::assemble(std::span<const TangentCurve> logs,
                                                          std::size_t m, bool center) {
  check_log_sample(logs, "BlockCovarianceOperator::assemble");
  const std::size_t n = logs.size();
  if (n < m + 2)
    throw InvalidArgument("BlockCovarianceOperator::assemble: need more than m+1 curves");
  const std::size_t D = logs[0].dim() * logs[0].nodes();
  const std::size_t lags = m + 1;

  std::vector<double> rows(n * D);
  for (std::size_t l = 0; l < n; ++l)
    std::copy(logs[l].values().begin(), logs[l].values().end(), rows.begin() + l * D);
  if (center) {
    std::vector<double> mean(D, 0.0);
    for (std::size_t l = 0; l < n; ++l)
      kernels::axpy(1.0 / static_cast<double>(n), rows.data() + l * D, mean.data(), D);
    for (std::size_t l = 0; l < n; ++l)
      kernels::axpy(-1.0, mean.data(), rows.data() + l * D, D);
  }

  BlockCovarianceOperator op;
  op.grid_ = logs[0].grid();
  op.dim_ = logs[0].dim();
  op.lags_ = lags;
  op.full_.setZero(static_cast<Eigen::Index>(lags * D), static_cast<Eigen::Index>(lags * D));

  // Every block comes from the same n-m stacked windows, so the assembled
  // matrix is a Gram matrix of (centered) window stacks and stays PSD. Tiling
  // per-lag estimates Toeplitz-style would be cheaper but is indefinite in
  // finite samples, which breaks the spectral clip downstream.
  const std::size_t windows = n - m;
  const double scale = 1.0 / static_cast<double>(windows);
  std::vector<double> acc(D * D);
  for (std::size_t r = 0; r < lags; ++r) {
    for (std::size_t s = r; s < lags; ++s) {
      std::fill(acc.begin(), acc.end(), 0.0);
      kernels::gram_accumulate(rows.data() + r * D, rows.data() + s * D, windows, D,
                               acc.data());
      Eigen::MatrixXd blk(D, D);
      for (std::size_t br = 0; br < D; ++br)
        for (std::size_t bc = 0; bc < D; ++bc)
          blk(static_cast<Eigen::Index>(br), static_cast<Eigen::Index>(bc)) =
              scale * acc[br * D + bc];
      op.full_.block(static_cast<Eigen::Index>(r * D),
                     static_cast<Eigen::Index>(s * D), D, D) = blk;
      if (s > r)
        op.full_.block(static_cast<Eigen::Index>(s * D),
                       static_cast<Eigen::Index>(r * D), D, D) = blk.transpose();
    }
  }
  op.decompose();
  return op;
}

BlockCovarianceOperator BlockCovarianceOperator::from_dense(TimeGrid grid, std::size_t dim,
                                                            std::size_t lags,
                                                            Eigen::MatrixXd full) {
  if (lags == 0) throw InvalidArgument("BlockCovarianceOperator: lags must be >= 1");
  const auto expected = static_cast<Eigen::Index>(lags * dim * grid.size());
  if (full.rows() != expected || full.cols() != expected)
    throw DimensionMismatch("BlockCovarianceOperator::from_dense: matrix size mismatch");
  BlockCovarianceOperator op;
  op.grid_ = std::move(grid);
  op.dim_ = dim;
  op.lags_ = lags;
  op.full_ = std::move(full);
  op.decompose();
  return op;
}

void BlockCovarianceOperator::decompose() {
  weights_ = expand_weights(grid_, dim_, lags_);
  sqrt_weights_ = weights_.cwiseSqrt();

  // Numerical cleanup; the block layout is symmetric by construction.
  full_ = 0.5 * (full_ + full_.transpose()).eval();

  const Eigen::MatrixXd sym =
      sqrt_weights_.asDiagonal() * full_ * sqrt_weights_.asDiagonal();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sym);
  if (eig.info() != Eigen::Success)
    throw Error("BlockCovarianceOperator: eigendecomposition failed");

  const Eigen::Index D = sym.rows();
  eigvals_.resize(D);
  q_.resize(D, D);
  const double lam_max = eig.eigenvalues().maxCoeff();
  const double neg_tol = 1e-10 + 1e-14 * std::abs(lam_max);
  for (Eigen::Index k = 0; k < D; ++k) {
    const Eigen::Index src = D - 1 - k;  // descending
    double lam = eig.eigenvalues()[src];
    if (lam < -neg_tol)
      throw Error("BlockCovarianceOperator: eigenvalue " + std::to_string(lam) +
                  " below the -1e-10 clip tolerance");
    eigvals_[k] = lam < 0.0 ? 0.0 : lam;
    q_.col(k) = eig.eigenvectors().col(src);
  }
}

DiscretizedKernel BlockCovarianceOperator::lag_kernel(std::size_t lag) const {
  if (lag >= lags_) throw InvalidArgument("lag_kernel: lag out of range");
  const std::size_t D = curve_dim();
  return DiscretizedKernel(grid_, dim_,
                           full_.block(0, static_cast<Eigen::Index>(lag * D), D, D));
}

Eigen::VectorXd BlockCovarianceOperator::eigenvector(std::size_t k) const {
  if (static_cast<Eigen::Index>(k) >= eigvals_.size())
    throw InvalidArgument("eigenvector: index out of range");
  return q_.col(static_cast<Eigen::Index>(k)).cwiseQuotient(sqrt_weights_);
}

Eigen::VectorXd BlockCovarianceOperator::apply(const Eigen::VectorXd& v) const {
  if (v.size() != full_.rows())
    throw DimensionMismatch("BlockCovarianceOperator::apply: vector size mismatch");
  return full_ * weights_.cwiseProduct(v);
}

Eigen::VectorXd BlockCovarianceOperator::make_stack(
    std::span<const TangentCurve> window) const {
  if (window.size() != lags_)
    throw DimensionMismatch("make_stack: expected " + std::to_string(lags_) + " curves");
  const std::size_t D = curve_dim();
  Eigen::VectorXd stack(static_cast<Eigen::Index>(lags_ * D));
  for (std::size_t s = 0; s < lags_; ++s) {
    const auto& c = window[s];
    if (c.dim() != dim_ || !(c.grid() == grid_))
      throw GridMismatch("make_stack: curve layout does not match the operator");
    for (std::size_t t = 0; t < D; ++t)
      stack[static_cast<Eigen::Index>(s * D + t)] = c.values()[t];
  }
  return stack;
}

RegularizedInverse::RegularizedInverse(const BlockCovarianceOperator& op, double ridge,
                                       double rel_cutoff) {
  if (ridge < 0.0) throw InvalidArgument("RegularizedInverse: ridge must be >= 0");
  if (!(rel_cutoff > 0.0) || rel_cutoff > 1.0)
    throw InvalidArgument("RegularizedInverse: rel_cutoff must lie in (0, 1]");
  const auto& lam = op.eigenvalues();
  const double lam1 = lam.size() ? lam[0] : 0.0;
  if (!(lam1 > 0.0))
    throw DegenerateCovariance("RegularizedInverse: operator has no positive spectrum");
  std::size_t r = 0;
  while (static_cast<Eigen::Index>(r) < lam.size() && lam[static_cast<Eigen::Index>(r)] >= rel_cutoff * lam1 &&
         lam[static_cast<Eigen::Index>(r)] > 0.0)
    ++r;
  if (r == 0)
    throw DegenerateCovariance("RegularizedInverse: cutoff retains no eigenvalues");

  ridge_ = ridge;
  coeffs_.resize(static_cast<Eigen::Index>(r));
  // Recover Q and W^{1/2} through the eigenvector accessor contract.
  basis_.resize(op.stack_dim(), static_cast<Eigen::Index>(r));
  sqrt_weights_ = op.quad_weights().cwiseSqrt();
  for (std::size_t k = 0; k < r; ++k) {
    coeffs_[static_cast<Eigen::Index>(k)] = 1.0 / (lam[static_cast<Eigen::Index>(k)] + ridge);
    basis_.col(static_cast<Eigen::Index>(k)) =
        op.eigenvector(k).cwiseProduct(sqrt_weights_);
  }
  proj_ = coeffs_.cwiseSqrt().asDiagonal() * basis_.transpose() *
          sqrt_weights_.asDiagonal();
}

Eigen::VectorXd RegularizedInverse::apply(const Eigen::VectorXd& v) const {
  if (v.size() != sqrt_weights_.size())
    throw DimensionMismatch("RegularizedInverse::apply: vector size mismatch");
  const Eigen::VectorXd coef = basis_.transpose() * sqrt_weights_.cwiseProduct(v);
  return (basis_ * coeffs_.cwiseProduct(coef)).cwiseQuotient(sqrt_weights_);
}

double RegularizedInverse::pairing(const Eigen::VectorXd& u, const Eigen::VectorXd& v) const {
  if (u.size() != sqrt_weights_.size() || v.size() != sqrt_weights_.size())
    throw DimensionMismatch("RegularizedInverse::pairing: vector size mismatch");
  return (proj_ * u).dot(proj_ * v);
}

double RegularizedInverse::quad_form(const Eigen::VectorXd& u) const {
  if (u.size() != sqrt_weights_.size())
    throw DimensionMismatch("RegularizedInverse::quad_form: vector size mismatch");
  return (proj_ * u).squaredNorm();
}

RegularizedInverse regularized_inverse(const BlockCovarianceOperator& op, double ridge,
                                       double rel_cutoff) {
  return RegularizedInverse(op, ridge, rel_cutoff);
}

double mahalanobis_semidistance(const RegularizedInverse& inv, const Eigen::VectorXd& u,
                                const Eigen::VectorXd& v) {
  if (u.size() != v.size())
    throw DimensionMismatch("mahalanobis_semidistance: vector size mismatch");
  const double q = inv.quad_form(u - v);
  return std::sqrt(q < 0.0 ? 0.0 : q);
}

double mahalanobis_semidistance(const BlockCovarianceOperator& op, double ridge,
                                double rel_cutoff, const Eigen::VectorXd& u,
                                const Eigen::VectorXd& v) {
  return mahalanobis_semidistance(RegularizedInverse(op, ridge, rel_cutoff), u, v);
}

RegularizedKernel RegularizedKernel::from_operator(const BlockCovarianceOperator& op,
                                                   double exponent, double rel_cutoff) {
  if (!(rel_cutoff > 0.0) || rel_cutoff > 1.0)
    throw InvalidArgument("RegularizedKernel: rel_cutoff must lie in (0, 1]");
  const std::size_t N = op.grid().size();
  const std::size_t d = op.dim();

  // Trace the lag-0 block over ambient components: k(a, b) = sum_j R0[(j,a),(j,b)].
  const Eigen::MatrixXd& full = op.full_matrix();
  Eigen::MatrixXd scalar_kernel = Eigen::MatrixXd::Zero(N, N);
  for (std::size_t j = 0; j < d; ++j)
    scalar_kernel += full.block(static_cast<Eigen::Index>(j * N),
                                static_cast<Eigen::Index>(j * N), N, N);

  Eigen::VectorXd wt(static_cast<Eigen::Index>(N));
  for (std::size_t i = 0; i < N; ++i) wt[static_cast<Eigen::Index>(i)] =
      op.grid().trapezoid_weights()[i];
  const Eigen::VectorXd sw = wt.cwiseSqrt();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(
      sw.asDiagonal() * scalar_kernel * sw.asDiagonal());
  if (eig.info() != Eigen::Success)
    throw Error("RegularizedKernel: eigendecomposition failed");

  const double lam1 = eig.eigenvalues().maxCoeff();
  if (!(lam1 > 0.0))
    throw DegenerateCovariance("RegularizedKernel: trace kernel has no positive spectrum");

  std::vector<double> lams;
  std::vector<Eigen::Index> cols;
  for (Eigen::Index k = static_cast<Eigen::Index>(N); k-- > 0;) {  // descending
    const double lam = eig.eigenvalues()[k];
    if (lam >= rel_cutoff * lam1 && lam > 0.0) {
      lams.push_back(lam);
      cols.push_back(k);
    }
  }

  RegularizedKernel kern;
  kern.grid_ = op.grid();
  kern.exponent_ = exponent;
  kern.phi_.resize(static_cast<Eigen::Index>(N), static_cast<Eigen::Index>(lams.size()));
  kern.gammas_.resize(static_cast<Eigen::Index>(lams.size()));
  double total = 0.0;
  for (std::size_t k = 0; k < lams.size(); ++k) {
    kern.phi_.col(static_cast<Eigen::Index>(k)) =
        eig.eigenvectors().col(cols[k]).cwiseQuotient(sw);
    const double g = std::pow(lams[k], exponent);
    kern.gammas_[static_cast<Eigen::Index>(k)] = g;
    total += g;
  }
  kern.gammas_ /= total;
  kern.finalize();
  return kern;
}

RegularizedKernel RegularizedKernel::from_eigenfunctions(TimeGrid grid, Eigen::MatrixXd phi,
                                                         Eigen::VectorXd gamma_raw,
                                                         double exponent) {
  if (phi.rows() != static_cast<Eigen::Index>(grid.size()))
    throw DimensionMismatch("RegularizedKernel: phi rows != grid size");
  if (phi.cols() != gamma_raw.size() || phi.cols() == 0)
    throw DimensionMismatch("RegularizedKernel: gamma count != eigenfunction count");
  for (Eigen::Index k = 0; k < gamma_raw.size(); ++k)
    if (!(gamma_raw[k] > 0.0))
      throw InvalidArgument("RegularizedKernel: gammas must be positive");

  RegularizedKernel kern;
  kern.grid_ = std::move(grid);
  kern.exponent_ = exponent;
  kern.phi_ = std::move(phi);
  kern.gammas_.resize(gamma_raw.size());
  double total = 0.0;
  for (Eigen::Index k = 0; k < gamma_raw.size(); ++k) {
    kern.gammas_[k] = std::pow(gamma_raw[k], exponent);
    total += kern.gammas_[k];
  }
  kern.gammas_ /= total;
  kern.finalize();
  return kern;
}

void RegularizedKernel::finalize() {
  const std::size_t N = grid_.size();
  Eigen::VectorXd wt(static_cast<Eigen::Index>(N));
  for (std::size_t i = 0; i < N; ++i)
    wt[static_cast<Eigen::Index>(i)] = grid_.trapezoid_weights()[i];
  sqrt_mat_ = phi_ * gammas_.cwiseSqrt().asDiagonal() * phi_.transpose() * wt.asDiagonal();
}

void RegularizedKernel::apply_sqrt_soa(const double* in, double* out, std::size_t d) const {
  const std::size_t N = grid_.size();
  for (std::size_t j = 0; j < d; ++j) {
    Eigen::Map<const Eigen::VectorXd> vin(in + j * N, static_cast<Eigen::Index>(N));
    Eigen::Map<Eigen::VectorXd> vout(out + j * N, static_cast<Eigen::Index>(N));
    vout.noalias() = sqrt_mat_ * vin;
  }
}

TangentCurve sqrt_kernel_apply(const RegularizedKernel& kern, const TangentCurve& v) {
  if (!(v.grid() == kern.grid()))
    throw GridMismatch("sqrt_kernel_apply: curve grid does not match the kernel");
  const std::size_t N = v.nodes();
  const std::size_t d = v.dim();
  std::vector<double> filtered(d * N);
  kern.apply_sqrt_soa(v.values().data(), filtered.data(), d);
  // Re-project onto the tangent spaces of the base curve; filtering mixes
  // across time, so a time-varying base picks up a radial residue.
  const auto& b = v.base().values();
  for (std::size_t i = 0; i < N; ++i) {
    double radial = 0.0;
    for (std::size_t j = 0; j < d; ++j) radial += b[j * N + i] * filtered[j * N + i];
    for (std::size_t j = 0; j < d; ++j) filtered[j * N + i] -= radial * b[j * N + i];
  }
  return TangentCurve(v.base(), std::move(filtered));
}

double hw_inner_product(const RegularizedKernel& kern, const TangentCurve& u,
                        const TangentCurve& v) {
  if (!(u.grid() == kern.grid()) || !(v.grid() == kern.grid()))
    throw GridMismatch("hw_inner_product: curve grid does not match the kernel");
  if (u.dim() != v.dim())
    throw DimensionMismatch("hw_inner_product: ambient dimension mismatch");
  const std::size_t N = kern.grid().size();
  const std::size_t d = u.dim();
  Eigen::VectorXd wt(static_cast<Eigen::Index>(N));
  for (std::size_t i = 0; i < N; ++i)
    wt[static_cast<Eigen::Index>(i)] = kern.grid().trapezoid_weights()[i];

  double total = 0.0;
  for (std::size_t j = 0; j < d; ++j) {
    Eigen::Map<const Eigen::VectorXd> uj(u.values().data() + j * N,
                                         static_cast<Eigen::Index>(N));
    Eigen::Map<const Eigen::VectorXd> vj(v.values().data() + j * N,
                                         static_cast<Eigen::Index>(N));
    const Eigen::VectorXd cu = kern.eigenfunctions().transpose() * wt.cwiseProduct(uj);
    const Eigen::VectorXd cv = kern.eigenfunctions().transpose() * wt.cwiseProduct(vj);
    total += cu.cwiseProduct(cv).dot(kern.gammas());
  }
  return total;
}

}  // namespace geocurve
