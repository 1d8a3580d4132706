#include "geocurve/frechet.hpp"

#include <cmath>
#include <string>

#include "geocurve/errors.hpp"

namespace geocurve {

namespace detail {

namespace {

double objective_at(const double* p, const double* points, std::size_t count,
                    std::size_t d, const double* wbar) {
  double obj = 0.0;
  for (std::size_t i = 0; i < count; ++i) {
    const double dist =
        geodesic_distance_span({p, d}, {points + i * d, d});
    obj += wbar[i] * dist * dist;
  }
  return obj;
}

}  // namespace

int karcher_span(const double* points, std::size_t count, std::size_t d,
                 const double* weights, const KarcherConfig& cfg, double* out_mean,
                 bool* converged, std::vector<double>* trace) {
  double wsum = 0.0;
  for (std::size_t i = 0; i < count; ++i) wsum += weights[i];
  if (wsum == 0.0)
    throw InvalidArgument("frechet_mean: weights sum to zero");

  std::vector<double> wbar(count);
  for (std::size_t i = 0; i < count; ++i) wbar[i] = weights[i] / wsum;

  // Euclidean weighted mean, renormalized. If it degenerates (signed weights
  // can cancel), fall back to the point with the largest |weight|.
  std::vector<double> p(d, 0.0);
  for (std::size_t i = 0; i < count; ++i)
    for (std::size_t j = 0; j < d; ++j) p[j] += wbar[i] * points[i * d + j];
  double nrm2 = 0.0;
  for (double v : p) nrm2 += v * v;
  if (std::sqrt(nrm2) < 1e-8) {
    std::size_t pick = 0;
    for (std::size_t i = 1; i < count; ++i)
      if (std::abs(weights[i]) > std::abs(weights[pick])) pick = i;
    for (std::size_t j = 0; j < d; ++j) p[j] = points[pick * d + j];
  } else {
    const double inv = 1.0 / std::sqrt(nrm2);
    for (double& v : p) v *= inv;
  }

  if (trace) {
    trace->clear();
    trace->push_back(objective_at(p.data(), points, count, d, wbar.data()));
  }

  std::vector<double> grad(d), lg(d), next(d);
  bool ok = false;
  int it = 0;
  for (; it < cfg.max_iters; ++it) {
    for (std::size_t j = 0; j < d; ++j) grad[j] = 0.0;
    for (std::size_t i = 0; i < count; ++i) {
      if (!log_map_span({p.data(), d}, {points + i * d, d}, {lg.data(), d}))
        throw AntipodalPoint("frechet_mean: iterate became antipodal to input " +
                             std::to_string(i));
      for (std::size_t j = 0; j < d; ++j) grad[j] += wbar[i] * lg[j];
    }
    double gn2 = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
      grad[j] *= cfg.step;
      gn2 += grad[j] * grad[j];
    }
    exp_map_span({p.data(), d}, {grad.data(), d}, {next.data(), d});
    p = next;
    if (trace) trace->push_back(objective_at(p.data(), points, count, d, wbar.data()));
    if (std::sqrt(gn2) < cfg.tol) {
      ok = true;
      ++it;
      break;
    }
  }
  for (std::size_t j = 0; j < d; ++j) out_mean[j] = p[j];
  if (converged) *converged = ok;
  return it;
}

}  // namespace detail

KarcherPoint frechet_mean_points(std::span<const SpherePoint> points,
                                 std::span<const double> weights,
                                 const KarcherConfig& cfg) {
  if (points.empty()) throw InvalidArgument("frechet_mean_points: empty input");
  if (weights.size() != points.size())
    throw DimensionMismatch("frechet_mean_points: weight count != point count");
  const std::size_t d = points[0].dim();
  std::vector<double> flat(points.size() * d);
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (points[i].dim() != d)
      throw DimensionMismatch("frechet_mean_points: inconsistent point dimensions");
    for (std::size_t j = 0; j < d; ++j) flat[i * d + j] = points[i][j];
  }
  std::vector<double> mean(d);
  bool converged = false;
  std::vector<double> trace;
  const int iters = detail::karcher_span(flat.data(), points.size(), d, weights.data(),
                                         cfg, mean.data(), &converged, &trace);
  return KarcherPoint{SpherePoint::normalized(std::move(mean)), converged, iters,
                      std::move(trace)};
}

namespace {

KarcherCurve mean_curve_impl(std::span<const ManifoldCurve> curves,
                             const double* weights, const KarcherConfig& cfg) {
  if (curves.empty()) throw InvalidArgument("frechet_mean_curve: empty input");
  const ManifoldCurve& first = curves[0];
  const std::size_t n = first.nodes();
  const std::size_t d = first.dim();
  for (const auto& c : curves) {
    if (c.dim() != d) throw DimensionMismatch("frechet_mean_curve: dimension mismatch");
    if (!(c.grid() == first.grid()))
      throw GridMismatch("frechet_mean_curve: curves live on different grids");
  }

  std::vector<double> node_points(curves.size() * d);
  std::vector<double> vals(d * n);
  std::vector<double> mean(d);
  bool all_ok = true;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t c = 0; c < curves.size(); ++c)
      for (std::size_t j = 0; j < d; ++j)
        node_points[c * d + j] = curves[c].values()[j * n + i];
    bool ok = false;
    try {
      detail::karcher_span(node_points.data(), curves.size(), d, weights, cfg,
                           mean.data(), &ok, nullptr);
    } catch (const AntipodalPoint& e) {
      throw AntipodalPoint(std::string(e.what()) + " (curve node " + std::to_string(i) + ")",
                           i);
    }
    all_ok = all_ok && ok;
    for (std::size_t j = 0; j < d; ++j) vals[j * n + i] = mean[j];
  }
  return KarcherCurve{ManifoldCurve(first.grid(), d, std::move(vals)), all_ok};
}

}  // namespace

KarcherCurve frechet_mean_curve(std::span<const ManifoldCurve> curves,
                                const KarcherConfig& cfg) {
  std::vector<double> w(curves.size(), 1.0);
  return mean_curve_impl(curves, w.data(), cfg);
}

KarcherCurve weighted_frechet_curve(std::span<const ManifoldCurve> curves,
                                    std::span<const double> weights,
                                    const KarcherConfig& cfg) {
  if (weights.size() != curves.size())
    throw DimensionMismatch("weighted_frechet_curve: weight count != curve count");
  return mean_curve_impl(curves, weights.data(), cfg);
}

}  // namespace geocurve
