#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "geocurve/geometry.hpp"

// Discretized sphere-valued curves on a shared time grid. Values are stored
// component-major (SoA): component j of node i lives at values()[j * N + i],
// which is the layout the kernels layer vectorizes over.

namespace geocurve {

class TimeGrid {
 public:
  // Requires >= 2 strictly increasing finite nodes.
  explicit TimeGrid(std::vector<double> nodes);

  static TimeGrid uniform(double a, double b, std::size_t n);

  std::size_t size() const { return nodes_.size(); }
  double node(std::size_t i) const { return nodes_[i]; }
  const std::vector<double>& nodes() const { return nodes_; }
  double span() const { return nodes_.back() - nodes_.front(); }

  // Composite trapezoid quadrature weights over the grid.
  const std::vector<double>& trapezoid_weights() const { return weights_; }

  // Index-thinned grid with at most max_nodes nodes, keeping both endpoints.
  TimeGrid subsample(std::size_t max_nodes) const;

  // The thinning indices subsample() uses, exposed so curves can be thinned
  // consistently with their grid.
  static std::vector<std::size_t> subsample_indices(std::size_t n, std::size_t max_nodes);

  bool operator==(const TimeGrid& other) const { return nodes_ == other.nodes_; }

 private:
  std::vector<double> nodes_;
  std::vector<double> weights_;
};

class ManifoldCurve {
 public:
  // values is SoA of size dim * grid.size(); node norms off unit by <= 1e-6
  // are renormalized, larger deviations are rejected. Adjacent nodes must be
  // within geodesic distance pi/2 (ingestion guard against aliased or
  // corrupted discretizations).
  ManifoldCurve(TimeGrid grid, std::size_t dim, std::vector<double> values);

  static ManifoldCurve from_points(TimeGrid grid, const std::vector<SpherePoint>& pts);

  const TimeGrid& grid() const { return grid_; }
  std::size_t dim() const { return dim_; }
  std::size_t nodes() const { return grid_.size(); }
  const std::vector<double>& values() const { return values_; }
  double value(std::size_t component, std::size_t node) const {
    return values_[component * grid_.size() + node];
  }
  SpherePoint point(std::size_t node) const;

  // Curve restricted to the given node indices (strictly increasing).
  ManifoldCurve restrict_to(const std::vector<std::size_t>& idx) const;

 private:
  TimeGrid grid_;
  std::size_t dim_;
  std::vector<double> values_;
};

class TangentCurve {
 public:
  // values is SoA like the base curve; each node's components must be
  // orthogonal to the base point within 1e-10.
  TangentCurve(ManifoldCurve base, std::vector<double> values);

  const ManifoldCurve& base() const { return base_; }
  const TimeGrid& grid() const { return base_.grid(); }
  std::size_t dim() const { return base_.dim(); }
  std::size_t nodes() const { return base_.nodes(); }
  const std::vector<double>& values() const { return values_; }
  TangentVector vector(std::size_t node) const;

 private:
  ManifoldCurve base_;
  std::vector<double> values_;
};

// sup_t d(x(t), y(t)) over the shared grid.
double sup_geodesic_distance(const ManifoldCurve& x, const ManifoldCurve& y);

// Trapezoid quadrature of d(x(t), y(t))^2 over the shared grid.
double integrated_sq_geodesic_distance(const ManifoldCurve& x, const ManifoldCurve& y);

// Node-wise log map of x at the base curve; the error for an antipodal node
// carries that node's index.
TangentCurve log_map_curve(const ManifoldCurve& base, const ManifoldCurve& x);

// Node-wise exp map of v at its base curve.
ManifoldCurve exp_map_curve(const TangentCurve& v);

// max over adjacent nodes of d(x_i, x_{i+1}) / (t_{i+1} - t_i).
double lipschitz_estimate(const ManifoldCurve& x);

}  // namespace geocurve
