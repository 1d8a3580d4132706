#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <span>
#include <vector>

#include "geocurve/curve.hpp"

// Empirical covariance structure of log-mapped (tangent) curve samples.
//
// A curve value is flattened component-major into a vector of length N*d0; a
// window of m+1 consecutive values is stacked slot-major into a vector of
// length (m+1)*N*d0. All inner products are quadrature-weighted (trapezoid
// weights of the grid), so the discrete operators converge to their integral
// counterparts under grid refinement: <u, v>_W = u^T diag(w) v with the node
// weight repeated across components and slots.

namespace geocurve {

// Matrix-valued kernel k(t_a, t_b) sampled on the grid. block is raw kernel
// values (D x D with D = N*d0, component-major); the quadrature weights are
// folded in on application: apply(v) = block * (w .* v).
class DiscretizedKernel {
 public:
  DiscretizedKernel(TimeGrid grid, std::size_t dim, Eigen::MatrixXd block);

  const TimeGrid& grid() const { return grid_; }
  std::size_t dim() const { return dim_; }
  const Eigen::MatrixXd& block() const { return block_; }

  Eigen::VectorXd apply(const Eigen::VectorXd& v) const;
  double frobenius_norm() const { return block_.norm(); }

  // Nuclear (trace) norm of the quadrature-symmetrized kernel
  // W^{1/2} block W^{1/2}; the lag-decay statistic.
  double nuclear_norm() const;

 private:
  TimeGrid grid_;
  std::size_t dim_;
  Eigen::MatrixXd block_;
  Eigen::VectorXd weights_;  // per-entry quadrature weights
};

// Lag-l cross covariance (1/(n-l)) sum_t (v_t - vbar)(v_{t+l} - vbar)^T of a
// tangent-curve sample; vbar is the mean over all n curves (skipped when
// center is false, e.g. for pre-centered input).
DiscretizedKernel empirical_lag_covariance(std::span<const TangentCurve> logs,
                                           std::size_t lag, bool center = true);

// (m+1)x(m+1) block operator whose (r,c) block is the cross-covariance of
// window slots r and c, estimated from the n-m stacked windows so the full
// matrix is a Gram matrix (PSD up to rounding). Eigendecomposed in the
// quadrature inner product.
class BlockCovarianceOperator {
 public:
  static BlockCovarianceOperator assemble(std::span<const TangentCurve> logs,
                                          std::size_t m, bool center = true);

  // Operator from an explicit dense kernel matrix (externally supplied or
  // synthetic); full must be (lags*N*dim) square.
  static BlockCovarianceOperator from_dense(TimeGrid grid, std::size_t dim,
                                            std::size_t lags, Eigen::MatrixXd full);

  const TimeGrid& grid() const { return grid_; }
  std::size_t dim() const { return dim_; }
  std::size_t lags() const { return lags_; }            // m + 1
  std::size_t stack_dim() const { return full_.rows(); }
  std::size_t curve_dim() const { return grid_.size() * dim_; }

  const Eigen::MatrixXd& full_matrix() const { return full_; }
  DiscretizedKernel lag_kernel(std::size_t lag) const;  // block (0, lag)

  // Descending, clipped at zero.
  const Eigen::VectorXd& eigenvalues() const { return eigvals_; }
  // k-th eigenvector, orthonormal in the quadrature inner product.
  Eigen::VectorXd eigenvector(std::size_t k) const;

  // Per-entry quadrature weights for stacks.
  const Eigen::VectorXd& quad_weights() const { return weights_; }

  // Forward action full * (w .* v).
  Eigen::VectorXd apply(const Eigen::VectorXd& v) const;

  // Flattens a window of m+1 tangent curves into a stack vector.
  Eigen::VectorXd make_stack(std::span<const TangentCurve> window) const;

 private:
  BlockCovarianceOperator() = default;
  void decompose();

  TimeGrid grid_{std::vector<double>{0.0, 1.0}};
  std::size_t dim_ = 0;
  std::size_t lags_ = 0;
  Eigen::MatrixXd full_;
  Eigen::VectorXd weights_;
  Eigen::VectorXd sqrt_weights_;
  Eigen::VectorXd eigvals_;
  Eigen::MatrixXd q_;  // eigenvectors of W^{1/2} full W^{1/2}, descending
};

// Spectral regularized inverse sum_{k: lam_k >= rel_cutoff*lam_1}
// (lam_k + ridge)^{-1} u_k u_k^T, acting in the quadrature inner product.
class RegularizedInverse {
 public:
  RegularizedInverse(const BlockCovarianceOperator& op, double ridge,
                     double rel_cutoff);

  std::size_t retained() const { return coeffs_.size(); }
  double ridge() const { return ridge_; }

  // R^{-1}_reg v.
  Eigen::VectorXd apply(const Eigen::VectorXd& v) const;
  // <u, R^{-1}_reg v>_W; symmetric.
  double pairing(const Eigen::VectorXd& u, const Eigen::VectorXd& v) const;
  double quad_form(const Eigen::VectorXd& u) const;

  // Whitening map P (retained x D): pairing(u, v) == (P u) . (P v).
  const Eigen::MatrixXd& whitener() const { return proj_; }

 private:
  double ridge_ = 0.0;
  Eigen::VectorXd coeffs_;       // 1 / (lam_k + ridge)
  Eigen::MatrixXd proj_;         // diag(sqrt(coeffs)) Q_r^T W^{1/2}
  Eigen::MatrixXd basis_;        // Q_r
  Eigen::VectorXd sqrt_weights_;
};

RegularizedInverse regularized_inverse(const BlockCovarianceOperator& op,
                                       double ridge, double rel_cutoff);

// sqrt((u - v)^T R^{-1}_reg (u - v)) in the quadrature pairing. u, v are
// stack vectors of the operator's dimension.
double mahalanobis_semidistance(const RegularizedInverse& inv, const Eigen::VectorXd& u,
                                const Eigen::VectorXd& v);
double mahalanobis_semidistance(const BlockCovarianceOperator& op, double ridge,
                                double rel_cutoff, const Eigen::VectorXd& u,
                                const Eigen::VectorXd& v);

// Scalar smoothing kernel with W-orthonormal eigenfunctions phi_k on the grid
// and weights gamma_k > 0 summing to one (a configurable power of the source
// spectrum). Acts componentwise on tangent curves; sqrt(K) scales the k-th
// coefficient by gamma_k^{1/2}.
class RegularizedKernel {
 public:
  // Builds the scalar kernel from a block covariance: the lag-0 block traced
  // over ambient components, eigendecomposed in the quadrature inner product;
  // gammas proportional to eigenvalue^exponent over the retained spectrum
  // (eigenvalues >= rel_cutoff * leading).
  static RegularizedKernel from_operator(const BlockCovarianceOperator& op,
                                         double exponent = 1.0,
                                         double rel_cutoff = 1e-9);

  // Externally supplied spectrum: phi is N x K (columns W-orthonormal),
  // gamma_raw positive; gammas proportional to gamma_raw^exponent.
  static RegularizedKernel from_eigenfunctions(TimeGrid grid, Eigen::MatrixXd phi,
                                               Eigen::VectorXd gamma_raw,
                                               double exponent = 1.0);

  const TimeGrid& grid() const { return grid_; }
  std::size_t retained() const { return gammas_.size(); }
  const Eigen::VectorXd& gammas() const { return gammas_; }
  double exponent() const { return exponent_; }
  const Eigen::MatrixXd& eigenfunctions() const { return phi_; }

  // Cached N x N matrix of sqrt(K): Phi diag(gamma^{1/2}) Phi^T diag(w_t).
  const Eigen::MatrixXd& sqrt_matrix() const { return sqrt_mat_; }

  // Componentwise sqrt(K) on a raw SoA tangent value array (d components of
  // length N); no tangent re-projection.
  void apply_sqrt_soa(const double* in, double* out, std::size_t d) const;

 private:
  RegularizedKernel() = default;
  void finalize();

  TimeGrid grid_{std::vector<double>{0.0, 1.0}};
  double exponent_ = 1.0;
  Eigen::MatrixXd phi_;      // N x K
  Eigen::VectorXd gammas_;   // K, positive, sums to 1
  Eigen::MatrixXd sqrt_mat_;
};

// Componentwise spectral filter gamma_k^{1/2} with tangent re-projection at
// each node (exact for constant base curves, second-order otherwise).
TangentCurve sqrt_kernel_apply(const RegularizedKernel& kern, const TangentCurve& v);

// <u, v>_{H~_W} = sum_j sum_k gamma_k <phi_k, u_j>_W <phi_k, v_j>_W; equals
// the ambient quadrature inner product of the (unprojected) sqrt(K) images.
double hw_inner_product(const RegularizedKernel& kern, const TangentCurve& u,
                        const TangentCurve& v);

}  // namespace geocurve
