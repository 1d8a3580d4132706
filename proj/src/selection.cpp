#include "geocurve/selection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <string>

#include "geocurve/covariance.hpp"
#include "geocurve/errors.hpp"

namespace geocurve {

std::size_t estimate_lag_range(std::span<const TangentCurve> logs, double threshold) {
  if (logs.size() < 10)
    throw InvalidArgument("estimate_lag_range: need at least 10 curves, got " +
                          std::to_string(logs.size()));
  if (!(threshold > 0.0 && threshold < 1.0))
    throw InvalidArgument("estimate_lag_range: threshold must lie in (0, 1)");
  const std::size_t cap = std::max<std::size_t>(logs.size() / 4, 1);
  const double base = empirical_lag_covariance(logs, 0).nuclear_norm();
  if (!(base > 0.0)) return cap;
  for (std::size_t lag = 1; lag <= cap; ++lag) {
    if (empirical_lag_covariance(logs, lag).nuclear_norm() < threshold * base) return lag;
  }
  return cap;
}

namespace {

double median_of(std::vector<double> v) {
  const std::size_t n = v.size();
  auto mid = v.begin() + static_cast<std::ptrdiff_t>(n / 2);
  std::nth_element(v.begin(), mid, v.end());
  if (n % 2 == 1) return *mid;
  const double hi = *mid;
  const double lo = *std::max_element(v.begin(), mid);
  return 0.5 * (lo + hi);
}

// Indices of the k smallest values, ties broken by ascending position.
std::vector<std::size_t> k_smallest(const std::vector<double>& vals, std::size_t k) {
  std::vector<std::size_t> order(vals.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return vals[a] < vals[b]; });
  order.resize(std::min(k, order.size()));
  return order;
}

}  // namespace

SelectionResult scvsa(const RegressionModel& model,
                      std::span<const TangentCurve> response_logs,
                      const SelectionConfig& cfg) {
  const std::size_t n = model.n();
  if (response_logs.empty()) throw InvalidArgument("scvsa: no response logs supplied");
  if (cfg.prediction_index >= n)
    throw InvalidArgument("scvsa: prediction_index " + std::to_string(cfg.prediction_index) +
                          " out of range");
  if (!(cfg.weight_quantile > 0.0 && cfg.weight_quantile < 1.0))
    throw InvalidArgument("scvsa: weight_quantile must lie in (0, 1)");

  std::vector<std::size_t> cands = cfg.candidate_times;
  if (cands.empty()) {
    cands.resize(n);
    std::iota(cands.begin(), cands.end(), std::size_t{0});
  }
  for (std::size_t c : cands)
    if (c >= n) throw InvalidArgument("scvsa: candidate index " + std::to_string(c) +
                                      " out of range");
  if (!cfg.include_s_star)
    cands.erase(std::remove(cands.begin(), cands.end(), cfg.prediction_index), cands.end());
  std::sort(cands.begin(), cands.end());
  cands.erase(std::unique(cands.begin(), cands.end()), cands.end());
  if (cands.empty()) throw InvalidArgument("scvsa: candidate set is empty");
  const std::size_t C = cands.size();

  std::vector<std::size_t> resp = cfg.response_times;
  if (resp.empty()) {
    resp.resize(response_logs.size());
    std::iota(resp.begin(), resp.end(), std::size_t{0});
  }
  for (std::size_t r : resp)
    if (r >= response_logs.size())
      throw InvalidArgument("scvsa: response index " + std::to_string(r) + " out of range");

  std::size_t k = cfg.k_nn;
  if (k == 0) k = static_cast<std::size_t>(std::ceil(0.1 * static_cast<double>(C)));
  k = std::max<std::size_t>(k, 1);
  if (k > C)
    throw InvalidArgument("scvsa: k_nn " + std::to_string(k) + " exceeds candidate count " +
                          std::to_string(C));

  // Single-curve covariance of the log-mapped regressors drives the
  // regressor-vs-response semi-metric.
  auto op0 = BlockCovarianceOperator::assemble(model.log_regressors(), 0, true);
  const double lam0 = op0.eigenvalues().size() ? op0.eigenvalues()[0] : 0.0;
  RegularizedInverse inv0(op0, model.config().ridge_scale * lam0,
                          model.config().rel_cutoff);

  const std::size_t D = op0.curve_dim();
  auto as_vec = [D](const TangentCurve& t) {
    return Eigen::Map<const Eigen::VectorXd>(t.values().data(),
                                             static_cast<Eigen::Index>(D));
  };
  for (const auto& t : response_logs)
    if (t.values().size() != D)
      throw DimensionMismatch("scvsa: response log is not on the model working grid");

  SelectionResult res;
  res.candidates = cands;
  res.distances.assign(C, std::numeric_limits<double>::infinity());
  res.relative_distances.assign(C, std::numeric_limits<double>::infinity());

  std::set<std::size_t> s1;
  std::vector<double> drow(C);
  for (std::size_t r : resp) {
    const Eigen::VectorXd y = as_vec(response_logs[r]);
    for (std::size_t ci = 0; ci < C; ++ci) {
      const Eigen::VectorXd x = as_vec(model.log_regressor(cands[ci]));
      drow[ci] = mahalanobis_semidistance(inv0, x, y);
    }
    const double med = median_of(drow);
    const double scale = med > 0.0 ? med : 1.0;
    for (std::size_t ci = 0; ci < C; ++ci) {
      res.distances[ci] = std::min(res.distances[ci], drow[ci]);
      res.relative_distances[ci] = std::min(res.relative_distances[ci], drow[ci] / scale);
    }
    for (std::size_t ci : k_smallest(drow, k)) s1.insert(cands[ci]);
  }
  res.s1.assign(s1.begin(), s1.end());

  // Each candidate is scored by the weight of its own window placed in the
  // query slot (1 + the squared whitened norm of that window), one static
  // value per candidate. The prediction time only affects the candidate set,
  // which is what keeps the selection invariant across prediction times when
  // every candidate is admitted.
  res.weights.resize(C);
  for (std::size_t ci = 0; ci < C; ++ci) {
    const std::size_t wi = model.window_index(cands[ci]);
    res.weights[ci] = model.weights(model.make_query(wi))[wi];
  }

  const auto keep = static_cast<std::size_t>(
      std::ceil(cfg.weight_quantile * static_cast<double>(C)));
  std::set<std::size_t> s2;
  for (std::size_t ci : k_smallest(res.weights, std::max<std::size_t>(keep, 1)))
    s2.insert(cands[ci]);
  res.s2.assign(s2.begin(), s2.end());

  std::set_intersection(res.s1.begin(), res.s1.end(), res.s2.begin(), res.s2.end(),
                        std::back_inserter(res.selected));
  res.empty_intersection = res.selected.empty();
  return res;
}

SelectionResult scvsa(const RegressionModel& model, const SelectionConfig& cfg) {
  std::vector<TangentCurve> logs;
  logs.reserve(model.n());
  for (std::size_t i = 0; i < model.n(); ++i) {
    try {
      logs.push_back(log_map_curve(model.mu_hat(), model.response(i)));
    } catch (const AntipodalPoint& e) {
      throw AntipodalPoint("scvsa: response " + std::to_string(i) +
                           " is antipodal to the regressor mean: " + e.what(),
                           e.has_node() ? e.node() : 0);
    }
  }
  return scvsa(model, logs, cfg);
}

}  // namespace geocurve
