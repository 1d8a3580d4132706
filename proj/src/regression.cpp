#include "geocurve/regression.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "geocurve/errors.hpp"
#include "geocurve/kernels.hpp"

namespace geocurve {

RegressionModel RegressionModel::fit(std::span<const ManifoldCurve> responses,
                                     std::span<const ManifoldCurve> regressors,
                                     std::size_t m, const FitConfig& cfg) {
  if (responses.size() != regressors.size())
    throw DimensionMismatch("fit: response/regressor counts differ");
  const std::size_t n = regressors.size();
  if (m < 1) throw InvalidArgument("fit: correlation range m must be >= 1");
  if (n <= m + 1)
    throw InvalidArgument("fit: need n > m + 1 samples, got n = " + std::to_string(n) +
                          ", m = " + std::to_string(m));
  const TimeGrid& raw_grid = regressors[0].grid();
  const std::size_t d = regressors[0].dim();
  for (std::size_t i = 0; i < n; ++i) {
    if (regressors[i].dim() != d || responses[i].dim() != d)
      throw DimensionMismatch("fit: ambient dimension mismatch at sample " + std::to_string(i));
    if (!(regressors[i].grid() == raw_grid) || !(responses[i].grid() == raw_grid))
      throw GridMismatch("fit: sample curves live on different grids (sample " +
                         std::to_string(i) + ")");
  }

  RegressionModel model;
  model.cfg_ = cfg;
  model.n_ = n;
  model.m_ = m;
  model.dim_ = d;

  // Thin to the operator working resolution.
  const auto idx = TimeGrid::subsample_indices(raw_grid.size(), cfg.working_resolution);
  const bool thin = idx.size() < raw_grid.size();
  model.xs_.reserve(n);
  model.ys_.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    model.xs_.push_back(thin ? regressors[i].restrict_to(idx) : regressors[i]);
    model.ys_.push_back(thin ? responses[i].restrict_to(idx) : responses[i]);
  }
  model.grid_ = model.xs_[0].grid();
  const std::size_t N = model.grid_.size();
  const std::size_t D = N * d;

  auto mean = frechet_mean_curve(model.xs_, cfg.karcher);
  model.mu_ = std::move(mean.mean);
  model.mean_converged_ = mean.converged;

  model.log_x_.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    try {
      model.log_x_.push_back(log_map_curve(*model.mu_, model.xs_[i]));
    } catch (const AntipodalPoint& e) {
      throw AntipodalPoint("fit: regressor " + std::to_string(i) +
                           " is antipodal to the mean: " + e.what(),
                           e.has_node() ? e.node() : 0);
    }
  }

  std::vector<double> xbar_vals(D, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    kernels::axpy(1.0 / static_cast<double>(n), model.log_x_[i].values().data(),
                  xbar_vals.data(), D);
  model.xbar_ = TangentCurve(*model.mu_, std::move(xbar_vals));

  model.op_ = BlockCovarianceOperator::assemble(model.log_x_, m, /*center=*/true);
  const auto& lam = model.op_->eigenvalues();
  if (!(lam[0] > 1e-13 * std::max(1.0, lam.sum())))
    throw DegenerateCovariance("fit: regressor sample has no covariance spectrum "
                               "(identical curves?)");

  model.kern_ = RegularizedKernel::from_operator(*model.op_, cfg.kernel_exponent,
                                                 cfg.kernel_rel_cutoff);
  model.inv_ = RegularizedInverse(*model.op_, cfg.ridge_scale * lam[0], cfg.rel_cutoff);

  // Per-slot centering over the n-m windows: the sample stacks then average
  // to zero exactly, which is what makes the weight mean identically one.
  const std::size_t wins = n - m;
  model.slot_means_.assign(m + 1, std::vector<double>(D, 0.0));
  for (std::size_t r = 0; r <= m; ++r)
    for (std::size_t i = 0; i < wins; ++i)
      kernels::axpy(1.0 / static_cast<double>(wins), model.log_x_[i + r].values().data(),
                    model.slot_means_[r].data(), D);

  model.transformed_.resize(model.inv_->whitener().rows(),
                            static_cast<Eigen::Index>(wins));
  std::vector<const double*> slots(m + 1);
  for (std::size_t i = 0; i < wins; ++i) {
    for (std::size_t r = 0; r <= m; ++r) slots[r] = model.log_x_[i + r].values().data();
    model.transformed_.col(static_cast<Eigen::Index>(i) ) = model.transform_window(slots);
  }
  return model;
}

Eigen::VectorXd RegressionModel::transform_window(
    const std::vector<const double*>& slots) const {
  const std::size_t N = grid_.size();
  const std::size_t D = N * dim_;
  Eigen::VectorXd stack(static_cast<Eigen::Index>((m_ + 1) * D));
  std::vector<double> centered(D), filtered(D);
  for (std::size_t r = 0; r <= m_; ++r) {
    for (std::size_t t = 0; t < D; ++t) centered[t] = slots[r][t] - slot_means_[r][t];
    kern_->apply_sqrt_soa(centered.data(), filtered.data(), dim_);
    for (std::size_t t = 0; t < D; ++t)
      stack[static_cast<Eigen::Index>(r * D + t)] = filtered[t];
  }
  return inv_->whitener() * stack;
}

void RegressionModel::check_query(const QueryBlock& q) const {
  if (q.slots.size() != m_ + 1)
    throw DimensionMismatch("query: expected " + std::to_string(m_ + 1) + " window curves, got " +
                            std::to_string(q.slots.size()));
  for (const auto& c : q.slots) {
    if (c.dim() != dim_) throw DimensionMismatch("query: ambient dimension mismatch");
    if (!(c.grid() == grid_))
      throw GridMismatch("query: curve is not on the model working grid");
  }
}

QueryBlock RegressionModel::make_query(std::size_t j) const {
  if (j + m_ >= n_)
    throw InvalidArgument("make_query: window start " + std::to_string(j) +
                          " exceeds n - m - 1 = " + std::to_string(n_ - m_ - 1));
  QueryBlock q;
  q.slots.reserve(m_ + 1);
  for (std::size_t r = 0; r <= m_; ++r) q.slots.push_back(xs_[j + r]);
  return q;
}

std::size_t RegressionModel::window_index(std::size_t candidate) const {
  return std::min(candidate, n_ - m_ - 1);
}

std::vector<double> RegressionModel::weights(const QueryBlock& q) const {
  check_query(q);
  std::vector<TangentCurve> logs;
  logs.reserve(m_ + 1);
  for (std::size_t r = 0; r <= m_; ++r) {
    try {
      logs.push_back(log_map_curve(*mu_, q.slots[r]));
    } catch (const AntipodalPoint& e) {
      throw AntipodalPoint("weights: query slot " + std::to_string(r) +
                           " is antipodal to the mean: " + e.what(),
                           e.has_node() ? e.node() : 0);
    }
  }
  std::vector<const double*> slots(m_ + 1);
  for (std::size_t r = 0; r <= m_; ++r) slots[r] = logs[r].values().data();
  const Eigen::VectorXd tq = transform_window(slots);

  const std::size_t wins = windows();
  std::vector<double> w(wins);
  for (std::size_t i = 0; i < wins; ++i)
    w[i] = 1.0 + tq.dot(transformed_.col(static_cast<Eigen::Index>(i)));
  return w;
}

double RegressionModel::objective_with_weights(std::span<const double> w,
                                               const ManifoldCurve& z) const {
  if (w.size() != windows())
    throw DimensionMismatch("objective: weight count != window count");
  if (z.dim() != dim_ || !(z.grid() == grid_))
    throw GridMismatch("objective: z is not on the model working grid");
  const std::size_t N = grid_.size();
  std::vector<double> dist(N);
  const double* tw = grid_.trapezoid_weights().data();
  double total = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    kernels::pointwise_geodesic_soa(ys_[i].values().data(), z.values().data(), dim_, N,
                                    dist.data());
    total += w[i] * kernels::weighted_sumsq(tw, dist.data(), N);
  }
  return total / static_cast<double>(windows());
}

double RegressionModel::objective(const QueryBlock& q, const ManifoldCurve& z) const {
  const auto w = weights(q);
  return objective_with_weights(w, z);
}

namespace {

// Objective over raw z values (SoA), skipping curve revalidation inside the
// descent loop.
double objective_raw(const std::vector<ManifoldCurve>& ys, std::span<const double> w,
                     const double* zvals, std::size_t d, std::size_t N, const double* tw,
                     std::vector<double>& dist) {
  double total = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    kernels::pointwise_geodesic_soa(ys[i].values().data(), zvals, d, N, dist.data());
    total += w[i] * kernels::weighted_sumsq(tw, dist.data(), N);
  }
  return total / static_cast<double>(w.size());
}

void combine_and_exp(const std::vector<const double*>& basis, std::span<const double> coords,
                     const ManifoldCurve& mu, std::vector<double>& tangent,
                     std::vector<double>& zvals) {
  const std::size_t d = mu.dim();
  const std::size_t N = mu.nodes();
  std::fill(tangent.begin(), tangent.end(), 0.0);
  for (std::size_t k = 0; k < basis.size(); ++k)
    if (coords[k] != 0.0) kernels::axpy(coords[k], basis[k], tangent.data(), d * N);
  std::vector<double> p(d), v(d), out(d);
  for (std::size_t i = 0; i < N; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      p[j] = mu.values()[j * N + i];
      v[j] = tangent[j * N + i];
    }
    exp_map_span({p.data(), d}, {v.data(), d}, {out.data(), d});
    for (std::size_t j = 0; j < d; ++j) zvals[j * N + i] = out[j];
  }
}

}  // namespace

Prediction RegressionModel::predict(const QueryBlock& q, const PredictConfig& pcfg) const {
  check_query(q);
  const std::size_t N = grid_.size();
  const std::size_t d = dim_;
  const std::size_t DN = d * N;
  const auto wts = weights(q);

  // Basis of the geodesic submanifold: log images of the window regressors
  // (default) or of the whole sample.
  std::vector<TangentCurve> window_logs;
  std::vector<const double*> basis;
  if (pcfg.use_all_regressors) {
    basis.resize(n_);
    for (std::size_t i = 0; i < n_; ++i) basis[i] = log_x_[i].values().data();
  } else {
    window_logs.reserve(m_ + 1);
    for (std::size_t r = 0; r <= m_; ++r)
      window_logs.push_back(log_map_curve(*mu_, q.slots[r]));
    basis.resize(m_ + 1);
    for (std::size_t r = 0; r <= m_; ++r) basis[r] = window_logs[r].values().data();
  }
  const std::size_t K = basis.size();

  // Initialize at the weighted Karcher solution projected onto the basis
  // span. Signed weights can break the Karcher solve; fall back to the
  // unweighted mean, and to the regressor mean if even that fails.
  std::vector<double> v0(DN, 0.0);
  try {
    auto init = weighted_frechet_curve(ys_, std::span<const double>(wts.data(), wts.size()),
                                       cfg_.karcher);
    v0 = log_map_curve(*mu_, init.mean).values();
  } catch (const Error&) {
    try {
      auto init = frechet_mean_curve(ys_, cfg_.karcher);
      v0 = log_map_curve(*mu_, init.mean).values();
    } catch (const Error&) {
      std::fill(v0.begin(), v0.end(), 0.0);
    }
  }

  // Least-squares coordinates of v0 in the basis, quadrature-weighted.
  std::vector<double> wq(DN);
  for (std::size_t j = 0; j < d; ++j)
    for (std::size_t i = 0; i < N; ++i)
      wq[j * N + i] = grid_.trapezoid_weights()[i];
  Eigen::MatrixXd gram(K, K);
  Eigen::VectorXd rhs(K);
  std::vector<double> tmp(DN);
  for (std::size_t a = 0; a < K; ++a) {
    for (std::size_t t = 0; t < DN; ++t) tmp[t] = wq[t] * basis[a][t];
    for (std::size_t b = a; b < K; ++b) {
      const double g = kernels::dot(tmp.data(), basis[b], DN);
      gram(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = g;
      gram(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(a)) = g;
    }
    rhs[static_cast<Eigen::Index>(a)] = kernels::dot(tmp.data(), v0.data(), DN);
  }
  const double tr = gram.trace();
  gram.diagonal().array() += 1e-12 * std::max(1.0, tr / static_cast<double>(K));
  Eigen::VectorXd w0 = gram.ldlt().solve(rhs);

  Prediction out{ManifoldCurve(grid_, d, std::vector<double>(ys_[0].values())),
                 {}, wts, {}, 0.0, false, false};
  std::vector<double> coords(K);
  for (std::size_t k = 0; k < K; ++k) {
    coords[k] = std::clamp(w0[static_cast<Eigen::Index>(k)], -pcfg.coord_cap, pcfg.coord_cap);
    if (coords[k] != w0[static_cast<Eigen::Index>(k)]) out.coord_capped = true;
  }

  // Derivative-free coordinate descent with per-coordinate step halving.
  std::vector<double> tangent(DN), zvals(DN), dist(N);
  const double* tw = grid_.trapezoid_weights().data();
  combine_and_exp(basis, coords, *mu_, tangent, zvals);
  double best = objective_raw(ys_, wts, zvals.data(), d, N, tw, dist);
  out.objective_trace.push_back(best);

  std::vector<double> steps(K, pcfg.init_step);
  std::vector<double> trial = coords;
  int sweep = 0;
  for (; sweep < pcfg.max_sweeps; ++sweep) {
    double largest_step = 0.0;
    for (double s : steps) largest_step = std::max(largest_step, s);
    if (largest_step < pcfg.min_step) {
      out.converged = true;
      break;
    }
    for (std::size_t k = 0; k < K; ++k) {
      if (steps[k] < pcfg.min_step) continue;
      bool improved = false;
      for (const double delta : {steps[k], -steps[k]}) {
        const double cand = std::clamp(coords[k] + delta, -pcfg.coord_cap, pcfg.coord_cap);
        if (cand == coords[k]) continue;
        trial[k] = cand;
        combine_and_exp(basis, trial, *mu_, tangent, zvals);
        const double val = objective_raw(ys_, wts, zvals.data(), d, N, tw, dist);
        if (val < best) {
          best = val;
          coords[k] = cand;
          if (std::abs(cand) >= pcfg.coord_cap) out.coord_capped = true;
          improved = true;
          break;
        }
        trial[k] = coords[k];
      }
      if (!improved) steps[k] *= 0.5;
    }
    out.objective_trace.push_back(best);
  }

  combine_and_exp(basis, coords, *mu_, tangent, zvals);
  out.curve = ManifoldCurve(grid_, d, zvals);
  out.coords = std::move(coords);
  out.objective = best;
  return out;
}

RegressionModel fit(std::span<const ManifoldCurve> responses,
                    std::span<const ManifoldCurve> regressors, std::size_t m,
                    const FitConfig& cfg) {
  return RegressionModel::fit(responses, regressors, m, cfg);
}

std::vector<double> frechet_weights(const RegressionModel& model, const QueryBlock& q) {
  return model.weights(q);
}

double empirical_objective(const RegressionModel& model, const QueryBlock& q,
                           const ManifoldCurve& z) {
  return model.objective(q, z);
}

Prediction predict(const RegressionModel& model, const QueryBlock& q,
                   const PredictConfig& pcfg) {
  return model.predict(q, pcfg);
}

}  // namespace geocurve
