#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "geocurve/covariance.hpp"
#include "geocurve/curve.hpp"
#include "geocurve/frechet.hpp"

// Global regression of sphere-valued curve responses on time-correlated
// curve regressors. A fitted model holds the Fréchet functional mean of the
// regressors, the log-mapped sample at that mean, the (m+1)-lag block
// covariance with its spectral regularized inverse, and the scalar smoothing
// kernel; queries are windows of m+1 regressor curves.

namespace geocurve {

struct FitConfig {
  // Operator work runs at this many nodes at most; denser curves are
  // index-thinned first.
  std::size_t working_resolution = 200;
  double ridge_scale = 1e-6;     // ridge = ridge_scale * leading eigenvalue
  double rel_cutoff = 1e-3;      // spectrum retained relative to the leading eigenvalue
  double kernel_exponent = 1.0;  // power applied to the smoothing-kernel spectrum
  double kernel_rel_cutoff = 1e-9;
  KarcherConfig karcher;
};

struct PredictConfig {
  // false: optimize over the submanifold generated by the m+1 query-window
  // regressors; true: over all n sample regressors.
  bool use_all_regressors = false;
  int max_sweeps = 500;
  double init_step = 0.5;
  double min_step = 1e-6;
  double coord_cap = 10.0;  // |w_k| bound for the search box
};

struct QueryBlock {
  std::vector<ManifoldCurve> slots;  // m+1 curves on the model grid
};

struct Prediction {
  ManifoldCurve curve;
  std::vector<double> coords;           // submanifold coordinates w
  std::vector<double> sample_weights;   // empirical Fréchet weights at the query
  std::vector<double> objective_trace;  // objective after each descent sweep
  double objective = 0.0;
  bool converged = false;
  bool coord_capped = false;  // a coordinate hit the search box
};

class RegressionModel {
 public:
  // responses[i] pairs with regressors[i] at sample time i; requires
  // n > m >= 1 and all curves on one shared grid.
  static RegressionModel fit(std::span<const ManifoldCurve> responses,
                             std::span<const ManifoldCurve> regressors, std::size_t m,
                             const FitConfig& cfg = {});

  std::size_t n() const { return n_; }
  std::size_t m() const { return m_; }
  std::size_t windows() const { return n_ - m_; }
  std::size_t dim() const { return dim_; }
  const TimeGrid& grid() const { return grid_; }
  const FitConfig& config() const { return cfg_; }

  const ManifoldCurve& mu_hat() const { return *mu_; }
  bool mean_converged() const { return mean_converged_; }
  // Mean of the log-mapped regressors (common origin mu_hat).
  const TangentCurve& xbar() const { return *xbar_; }
  // Per-slot means of the n-m window stacks; the weight centering.
  const std::vector<std::vector<double>>& slot_means() const { return slot_means_; }

  const BlockCovarianceOperator& op() const { return *op_; }
  const RegularizedInverse& inverse() const { return *inv_; }
  const RegularizedKernel& kernel() const { return *kern_; }

  const ManifoldCurve& response(std::size_t i) const { return ys_[i]; }
  const ManifoldCurve& regressor(std::size_t i) const { return xs_[i]; }
  const TangentCurve& log_regressor(std::size_t i) const { return log_x_[i]; }
  std::span<const TangentCurve> log_regressors() const { return log_x_; }

  // Observed window starting at index j (j <= n - m - 1).
  QueryBlock make_query(std::size_t j) const;
  // Window start for a candidate index, clamped into the valid range.
  std::size_t window_index(std::size_t candidate) const;

  // Empirical Fréchet weights of every sample window against the query;
  // their mean is 1 by construction of the centering.
  std::vector<double> weights(const QueryBlock& q) const;

  // (1/(n-m)) sum_i w_i(q) * integral d^2(Y_i(t), z(t)) dt.
  double objective(const QueryBlock& q, const ManifoldCurve& z) const;
  double objective_with_weights(std::span<const double> w, const ManifoldCurve& z) const;

  Prediction predict(const QueryBlock& q, const PredictConfig& pcfg = {}) const;

 private:
  RegressionModel() = default;

  void check_query(const QueryBlock& q) const;
  // Whitened sqrt(K)-transformed centered stack of a window of log values.
  Eigen::VectorXd transform_window(const std::vector<const double*>& slots) const;

  TimeGrid grid_{std::vector<double>{0.0, 1.0}};
  std::size_t dim_ = 0, n_ = 0, m_ = 0;
  FitConfig cfg_;
  std::optional<ManifoldCurve> mu_;
  bool mean_converged_ = false;
  std::optional<TangentCurve> xbar_;
  std::vector<ManifoldCurve> ys_, xs_;
  std::vector<TangentCurve> log_x_;
  std::vector<std::vector<double>> slot_means_;
  std::optional<BlockCovarianceOperator> op_;
  std::optional<RegularizedKernel> kern_;
  std::optional<RegularizedInverse> inv_;
  Eigen::MatrixXd transformed_;  // retained x (n - m) sample stacks
};

// Free-function forms of the model operations.
RegressionModel fit(std::span<const ManifoldCurve> responses,
                    std::span<const ManifoldCurve> regressors, std::size_t m,
                    const FitConfig& cfg = {});
std::vector<double> frechet_weights(const RegressionModel& model, const QueryBlock& q);
double empirical_objective(const RegressionModel& model, const QueryBlock& q,
                           const ManifoldCurve& z);
Prediction predict(const RegressionModel& model, const QueryBlock& q,
                   const PredictConfig& pcfg = {});

}  // namespace geocurve
