#pragma once

#include <span>
#include <vector>

#include "geocurve/curve.hpp"
#include "geocurve/geometry.hpp"

// Karcher-iteration Fréchet means of sphere points and of discretized curves
// (the curve solve is independent per node). Weights may be signed as long as
// they do not sum to zero; the iteration is the fixed-point update
// p <- exp_p(step * sum_i wbar_i log_p(x_i)) started at the normalized
// weighted Euclidean mean.

namespace geocurve {

struct KarcherConfig {
  int max_iters = 100;
  double tol = 1e-10;  // stop when the update tangent norm drops below this
  double step = 1.0;
};

struct KarcherPoint {
  SpherePoint mean;
  bool converged = false;
  int iterations = 0;
  // Weighted Fréchet objective after each iteration (index 0 is the value at
  // the initial point). Non-increasing for nonnegative weights.
  std::vector<double> objective_trace;
};

struct KarcherCurve {
  ManifoldCurve mean;
  bool converged = false;  // true only if every node converged
};

KarcherPoint frechet_mean_points(std::span<const SpherePoint> points,
                                 std::span<const double> weights,
                                 const KarcherConfig& cfg = {});

KarcherCurve frechet_mean_curve(std::span<const ManifoldCurve> curves,
                                const KarcherConfig& cfg = {});

KarcherCurve weighted_frechet_curve(std::span<const ManifoldCurve> curves,
                                    std::span<const double> weights,
                                    const KarcherConfig& cfg = {});

namespace detail {

// Raw per-node solver. points is row-major (count x d). Returns the number of
// iterations used; *converged reports the tolerance test. trace may be null.
int karcher_span(const double* points, std::size_t count, std::size_t d,
                 const double* weights, const KarcherConfig& cfg, double* out_mean,
                 bool* converged, std::vector<double>* trace);

}  // namespace detail

}  // namespace geocurve
