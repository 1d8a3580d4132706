#pragma once

#include <cstddef>
#include <span>
#include <vector>

// Riemannian primitives on the unit sphere S^{d0-1} embedded in R^{d0}.
// Typed entry points validate their invariants; the span overloads are the
// raw compute paths shared with the curve layer and assume the caller upholds
// them (unit-norm bases, tangency).

namespace geocurve {

class SpherePoint {
 public:
  // Requires d0 >= 2 and ||coords|| == 1 within 1e-12.
  explicit SpherePoint(std::vector<double> coords);

  // Rescales coords to unit length; rejects near-zero input.
  static SpherePoint normalized(std::vector<double> coords);

  std::size_t dim() const { return coords_.size(); }
  const std::vector<double>& coords() const { return coords_; }
  double operator[](std::size_t i) const { return coords_[i]; }
  std::span<const double> span() const { return {coords_.data(), coords_.size()}; }

  bool operator==(const SpherePoint& other) const { return coords_ == other.coords_; }

 private:
  struct unchecked_tag {};
  SpherePoint(std::vector<double> coords, unchecked_tag) : coords_(std::move(coords)) {}
  friend SpherePoint make_point_unchecked(std::vector<double>);

  std::vector<double> coords_;
};

// Internal fast path for values already known to be unit.
SpherePoint make_point_unchecked(std::vector<double> coords);

class TangentVector {
 public:
  // Requires components the same dimension as base and orthogonal to it
  // within 1e-10.
  TangentVector(SpherePoint base, std::vector<double> components);

  const SpherePoint& base() const { return base_; }
  const std::vector<double>& components() const { return components_; }
  std::span<const double> span() const { return {components_.data(), components_.size()}; }
  std::size_t dim() const { return components_.size(); }
  double norm() const;

 private:
  SpherePoint base_;
  std::vector<double> components_;
};

// Geodesic (great-circle) distance in [0, pi]; equals acos of the clamped
// inner product but is computed in a form exact at both endpoints.
double geodesic_distance(const SpherePoint& p, const SpherePoint& q);

// exp_p(v) = cos(|v|) p + sin(|v|) v/|v|; |v| < 1e-14 returns p.
// Requires v based at p.
SpherePoint exp_map(const SpherePoint& p, const TangentVector& v);

// Inverse of exp_map; undefined at the antipode (throws AntipodalPoint when
// d(p, q) >= pi - 1e-8). log_map(p, p) is the zero vector.
TangentVector log_map(const SpherePoint& p, const SpherePoint& q);

// Orthogonal projection of an ambient vector onto the tangent space at p:
// w - (p.w) p.
TangentVector project_to_tangent(const SpherePoint& p, std::span<const double> w);

// --- raw span forms ------------------------------------------------------

// Distance between two unit vectors given as spans of equal length.
double geodesic_distance_span(std::span<const double> p, std::span<const double> q);

// out = exp_p(v); out may not alias p or v. Result is renormalized.
void exp_map_span(std::span<const double> p, std::span<const double> v,
                  std::span<double> out);

// out = log_p(q); returns false when q is within 1e-8 of the antipode of p
// (out is untouched in that case). out may not alias p or q.
bool log_map_span(std::span<const double> p, std::span<const double> q,
                  std::span<double> out);

// out = w - (p.w) p; aliasing out == w is allowed.
void project_span(std::span<const double> p, std::span<const double> w,
                  std::span<double> out);

}  // namespace geocurve
