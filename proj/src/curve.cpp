#include "geocurve/curve.hpp"

#include <cmath>
#include <string>

#include "geocurve/errors.hpp"
#include "geocurve/kernels.hpp"

namespace geocurve {

namespace {

constexpr double kNodeNormFixTol = 1e-6;   // renormalize within, reject beyond
constexpr double kAdjacencyLimit = M_PI / 2.0;

}  // namespace

TimeGrid::TimeGrid(std::vector<double> nodes) : nodes_(std::move(nodes)) {
  if (nodes_.size() < 2) throw InvalidArgument("TimeGrid: needs at least 2 nodes");
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (!std::isfinite(nodes_[i]))
      throw InvalidArgument("TimeGrid: non-finite node at index " + std::to_string(i));
    if (i > 0 && !(nodes_[i] > nodes_[i - 1]))
      throw InvalidArgument("TimeGrid: nodes not strictly increasing at index " +
                            std::to_string(i));
  }
  const std::size_t n = nodes_.size();
  weights_.resize(n);
  weights_.front() = 0.5 * (nodes_[1] - nodes_[0]);
  weights_.back() = 0.5 * (nodes_[n - 1] - nodes_[n - 2]);
  for (std::size_t i = 1; i + 1 < n; ++i)
    weights_[i] = 0.5 * (nodes_[i + 1] - nodes_[i - 1]);
}

TimeGrid TimeGrid::uniform(double a, double b, std::size_t n) {
  if (n < 2) throw InvalidArgument("TimeGrid::uniform: needs at least 2 nodes");
  if (!(b > a)) throw InvalidArgument("TimeGrid::uniform: b must exceed a");
  std::vector<double> nodes(n);
  const double h = (b - a) / static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i) nodes[i] = a + h * static_cast<double>(i);
  nodes.back() = b;
  return TimeGrid(std::move(nodes));
}

std::vector<std::size_t> TimeGrid::subsample_indices(std::size_t n, std::size_t max_nodes) {
  if (max_nodes < 2) throw InvalidArgument("TimeGrid::subsample: needs >= 2 nodes");
  if (max_nodes >= n) {
    std::vector<std::size_t> all(n);
    for (std::size_t i = 0; i < n; ++i) all[i] = i;
    return all;
  }
  std::vector<std::size_t> idx(max_nodes);
  for (std::size_t k = 0; k < max_nodes; ++k) {
    const double pos = static_cast<double>(k) * static_cast<double>(n - 1) /
                       static_cast<double>(max_nodes - 1);
    idx[k] = static_cast<std::size_t>(std::llround(pos));
  }
  idx.front() = 0;
  idx.back() = n - 1;
  return idx;
}

TimeGrid TimeGrid::subsample(std::size_t max_nodes) const {
  const auto idx = subsample_indices(nodes_.size(), max_nodes);
  std::vector<double> sel(idx.size());
  for (std::size_t k = 0; k < idx.size(); ++k) sel[k] = nodes_[idx[k]];
  return TimeGrid(std::move(sel));
}

ManifoldCurve::ManifoldCurve(TimeGrid grid, std::size_t dim, std::vector<double> values)
    : grid_(std::move(grid)), dim_(dim), values_(std::move(values)) {
  const std::size_t n = grid_.size();
  if (dim_ < 2) throw DimensionMismatch("ManifoldCurve: ambient dimension must be >= 2");
  if (values_.size() != dim_ * n)
    throw DimensionMismatch("ManifoldCurve: expected " + std::to_string(dim_ * n) +
                            " values, got " + std::to_string(values_.size()));
  for (std::size_t i = 0; i < n; ++i) {
    double nrm2 = 0.0;
    for (std::size_t j = 0; j < dim_; ++j) {
      const double v = values_[j * n + i];
      nrm2 += v * v;
    }
    const double nrm = std::sqrt(nrm2);
    if (std::abs(nrm - 1.0) > kNodeNormFixTol)
      throw InvalidArgument("ManifoldCurve: node " + std::to_string(i) +
                            " is off the sphere by " + std::to_string(std::abs(nrm - 1.0)));
    const double inv = 1.0 / nrm;
    for (std::size_t j = 0; j < dim_; ++j) values_[j * n + i] *= inv;
  }
  for (std::size_t i = 0; i + 1 < n; ++i) {
    double s2 = 0.0, c2 = 0.0;
    for (std::size_t j = 0; j < dim_; ++j) {
      const double a = values_[j * n + i];
      const double b = values_[j * n + i + 1];
      s2 += (a - b) * (a - b);
      c2 += (a + b) * (a + b);
    }
    const double d = 2.0 * std::atan2(std::sqrt(s2), std::sqrt(c2));
    if (!(d < kAdjacencyLimit))
      throw InvalidArgument("ManifoldCurve: adjacent nodes " + std::to_string(i) + "," +
                            std::to_string(i + 1) + " are " + std::to_string(d) +
                            " apart (>= pi/2); discretization too coarse");
  }
}

ManifoldCurve ManifoldCurve::from_points(TimeGrid grid, const std::vector<SpherePoint>& pts) {
  const std::size_t n = grid.size();
  if (pts.size() != n)
    throw DimensionMismatch("ManifoldCurve::from_points: point count != grid size");
  const std::size_t d = pts.front().dim();
  std::vector<double> values(d * n);
  for (std::size_t i = 0; i < n; ++i) {
    if (pts[i].dim() != d)
      throw DimensionMismatch("ManifoldCurve::from_points: inconsistent point dimensions");
    for (std::size_t j = 0; j < d; ++j) values[j * n + i] = pts[i][j];
  }
  return ManifoldCurve(std::move(grid), d, std::move(values));
}

SpherePoint ManifoldCurve::point(std::size_t node) const {
  std::vector<double> c(dim_);
  const std::size_t n = grid_.size();
  for (std::size_t j = 0; j < dim_; ++j) c[j] = values_[j * n + node];
  return make_point_unchecked(std::move(c));
}

ManifoldCurve ManifoldCurve::restrict_to(const std::vector<std::size_t>& idx) const {
  const std::size_t n = grid_.size();
  std::vector<double> nodes(idx.size());
  std::vector<double> vals(dim_ * idx.size());
  for (std::size_t k = 0; k < idx.size(); ++k) {
    if (idx[k] >= n) throw InvalidArgument("ManifoldCurve::restrict_to: index out of range");
    nodes[k] = grid_.node(idx[k]);
    for (std::size_t j = 0; j < dim_; ++j) vals[j * idx.size() + k] = values_[j * n + idx[k]];
  }
  return ManifoldCurve(TimeGrid(std::move(nodes)), dim_, std::move(vals));
}

TangentCurve::TangentCurve(ManifoldCurve base, std::vector<double> values)
    : base_(std::move(base)), values_(std::move(values)) {
  const std::size_t n = base_.nodes();
  const std::size_t d = base_.dim();
  if (values_.size() != d * n)
    throw DimensionMismatch("TangentCurve: expected " + std::to_string(d * n) +
                            " values, got " + std::to_string(values_.size()));
  const auto& b = base_.values();
  for (std::size_t i = 0; i < n; ++i) {
    double radial = 0.0;
    for (std::size_t j = 0; j < d; ++j) radial += b[j * n + i] * values_[j * n + i];
    if (std::abs(radial) > 1e-10)
      throw InvalidArgument("TangentCurve: node " + std::to_string(i) +
                            " not tangent to base (radial part " + std::to_string(radial) + ")");
  }
}

TangentVector TangentCurve::vector(std::size_t node) const {
  const std::size_t n = base_.nodes();
  std::vector<double> c(dim());
  for (std::size_t j = 0; j < dim(); ++j) c[j] = values_[j * n + node];
  return TangentVector(base_.point(node), std::move(c));
}

namespace {

void check_same_layout(const ManifoldCurve& x, const ManifoldCurve& y, const char* who) {
  if (x.dim() != y.dim())
    throw DimensionMismatch(std::string(who) + ": ambient dimension mismatch");
  if (!(x.grid() == y.grid()))
    throw GridMismatch(std::string(who) + ": curves live on different time grids");
}

}  // namespace

double sup_geodesic_distance(const ManifoldCurve& x, const ManifoldCurve& y) {
  check_same_layout(x, y, "sup_geodesic_distance");
  const std::size_t n = x.nodes();
  std::vector<double> dist(n);
  kernels::pointwise_geodesic_soa(x.values().data(), y.values().data(), x.dim(), n,
                                  dist.data());
  return kernels::max_value(dist.data(), n);
}

double integrated_sq_geodesic_distance(const ManifoldCurve& x, const ManifoldCurve& y) {
  check_same_layout(x, y, "integrated_sq_geodesic_distance");
  const std::size_t n = x.nodes();
  std::vector<double> dist(n);
  kernels::pointwise_geodesic_soa(x.values().data(), y.values().data(), x.dim(), n,
                                  dist.data());
  return kernels::weighted_sumsq(x.grid().trapezoid_weights().data(), dist.data(), n);
}

TangentCurve log_map_curve(const ManifoldCurve& base, const ManifoldCurve& x) {
  check_same_layout(base, x, "log_map_curve");
  const std::size_t n = base.nodes();
  const std::size_t d = base.dim();
  std::vector<double> vals(d * n);
  std::vector<double> p(d), q(d), v(d);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      p[j] = base.values()[j * n + i];
      q[j] = x.values()[j * n + i];
    }
    if (!log_map_span({p.data(), d}, {q.data(), d}, {v.data(), d}))
      throw AntipodalPoint("log_map_curve: antipodal pair at node " + std::to_string(i), i);
    for (std::size_t j = 0; j < d; ++j) vals[j * n + i] = v[j];
  }
  return TangentCurve(base, std::move(vals));
}

ManifoldCurve exp_map_curve(const TangentCurve& v) {
  const std::size_t n = v.nodes();
  const std::size_t d = v.dim();
  std::vector<double> vals(d * n);
  std::vector<double> p(d), t(d), out(d);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      p[j] = v.base().values()[j * n + i];
      t[j] = v.values()[j * n + i];
    }
    exp_map_span({p.data(), d}, {t.data(), d}, {out.data(), d});
    for (std::size_t j = 0; j < d; ++j) vals[j * n + i] = out[j];
  }
  return ManifoldCurve(v.grid(), d, std::move(vals));
}

double lipschitz_estimate(const ManifoldCurve& x) {
  const std::size_t n = x.nodes();
  const std::size_t d = x.dim();
  double best = 0.0;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    double s2 = 0.0, c2 = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
      const double a = x.values()[j * n + i];
      const double b = x.values()[j * n + i + 1];
      s2 += (a - b) * (a - b);
      c2 += (a + b) * (a + b);
    }
    const double dist = 2.0 * std::atan2(std::sqrt(s2), std::sqrt(c2));
    const double rate = dist / (x.grid().node(i + 1) - x.grid().node(i));
    if (rate > best) best = rate;
  }
  return best;
}

}  // namespace geocurve
