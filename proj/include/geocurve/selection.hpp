#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "geocurve/curve.hpp"
#include "geocurve/regression.hpp"

// Variable selection over candidate regressor times: the intersection of a
// Mahalanobis nearest-neighborhood set S1 (candidates close to observed
// response values in the regularized semi-metric) and a small-weight set S2
// (candidates whose self-paired empirical Fréchet weights, the candidate's
// own window placed in the query slot, fall in the lowest quantile). The
// prediction time enters only through the Scenario-1 candidate exclusion.

namespace geocurve {

struct SelectionConfig {
  std::size_t k_nn = 0;          // 0: ceil(0.1 * candidate count)
  double weight_quantile = 0.2;  // S2 keeps the lowest this-fraction of weights
  bool include_s_star = true;    // false drops the prediction index from the candidates
  std::vector<std::size_t> candidate_times;  // empty: every sample index
  std::vector<std::size_t> response_times;   // empty: every supplied response log
  std::size_t prediction_index = 0;          // s*, the target prediction time
};

struct SelectionResult {
  std::vector<std::size_t> s1, s2, selected;  // ascending candidate time indices
  bool empty_intersection = false;

  // Per-candidate diagnostics, aligned with `candidates`.
  std::vector<std::size_t> candidates;
  std::vector<double> weights;             // self-paired Fréchet weight of the candidate window
  std::vector<double> distances;           // min over responses, Mahalanobis
  std::vector<double> relative_distances;  // distance / per-response median
};

// Smallest lag whose centered lag-covariance nuclear norm drops below
// threshold times the lag-0 norm, capped at n/4 (the cap is also the
// fallback when the norms never decay).
std::size_t estimate_lag_range(std::span<const TangentCurve> logs, double threshold);

// response_logs are the observed responses log-mapped at the model mean
// (shared origin with the regressor logs).
SelectionResult scvsa(const RegressionModel& model,
                      std::span<const TangentCurve> response_logs,
                      const SelectionConfig& cfg = {});

// Convenience form: log-maps every model response at mu_hat first.
SelectionResult scvsa(const RegressionModel& model, const SelectionConfig& cfg = {});

}  // namespace geocurve
