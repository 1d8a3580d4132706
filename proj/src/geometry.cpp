#include "geocurve/geometry.hpp"

#include <cmath>

#include "geocurve/errors.hpp"
#include "geocurve/kernels.hpp"

namespace geocurve {

namespace {

constexpr double kAntipodeTol = 1e-8;   // log map rejects d >= pi - this
constexpr double kUnitNormTol = 1e-12;  // SpherePoint invariant
constexpr double kTangencyTol = 1e-10;  // TangentVector invariant

double norm_of(std::span<const double> v) {
  return std::sqrt(kernels::dot(v.data(), v.data(), v.size()));
}

}  // namespace

SpherePoint::SpherePoint(std::vector<double> coords) : coords_(std::move(coords)) {
  if (coords_.size() < 2)
    throw DimensionMismatch("SpherePoint: ambient dimension must be >= 2");
  const double n = norm_of({coords_.data(), coords_.size()});
  if (std::abs(n - 1.0) > kUnitNormTol)
    throw InvalidArgument("SpherePoint: coordinates are not unit norm (|norm-1| = " +
                          std::to_string(std::abs(n - 1.0)) + ")");
}

SpherePoint SpherePoint::normalized(std::vector<double> coords) {
  if (coords.size() < 2)
    throw DimensionMismatch("SpherePoint: ambient dimension must be >= 2");
  const double n = norm_of({coords.data(), coords.size()});
  if (!(n > 1e-14))
    throw InvalidArgument("SpherePoint::normalized: vector too close to zero");
  for (double& c : coords) c /= n;
  return make_point_unchecked(std::move(coords));
}

SpherePoint make_point_unchecked(std::vector<double> coords) {
  return SpherePoint(std::move(coords), SpherePoint::unchecked_tag{});
}

TangentVector::TangentVector(SpherePoint base, std::vector<double> components)
    : base_(std::move(base)), components_(std::move(components)) {
  if (components_.size() != base_.dim())
    throw DimensionMismatch("TangentVector: component/base dimension mismatch");
  const double radial =
      kernels::dot(base_.coords().data(), components_.data(), components_.size());
  if (std::abs(radial) > kTangencyTol)
    throw InvalidArgument("TangentVector: components not orthogonal to base (p.v = " +
                          std::to_string(radial) + ")");
}

double TangentVector::norm() const {
  return norm_of({components_.data(), components_.size()});
}

double geodesic_distance_span(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size())
    throw DimensionMismatch("geodesic_distance: dimension mismatch");
  double s2 = 0.0, c2 = 0.0;
  for (std::size_t j = 0; j < p.size(); ++j) {
    const double dm = p[j] - q[j];
    const double dp = p[j] + q[j];
    s2 += dm * dm;
    c2 += dp * dp;
  }
  return 2.0 * std::atan2(std::sqrt(s2), std::sqrt(c2));
}

double geodesic_distance(const SpherePoint& p, const SpherePoint& q) {
  return geodesic_distance_span(p.span(), q.span());
}

void exp_map_span(std::span<const double> p, std::span<const double> v,
                  std::span<double> out) {
  const double theta = norm_of(v);
  if (theta < 1e-14) {
    for (std::size_t j = 0; j < p.size(); ++j) out[j] = p[j];
    return;
  }
  const double c = std::cos(theta);
  const double s = std::sin(theta) / theta;
  double nrm2 = 0.0;
  for (std::size_t j = 0; j < p.size(); ++j) {
    out[j] = c * p[j] + s * v[j];
    nrm2 += out[j] * out[j];
  }
  // cos/sin keep the norm within rounding; renormalize so downstream unit
  // checks stay exact under long exp/log chains.
  const double inv = 1.0 / std::sqrt(nrm2);
  for (std::size_t j = 0; j < p.size(); ++j) out[j] *= inv;
}

SpherePoint exp_map(const SpherePoint& p, const TangentVector& v) {
  if (!(v.base() == p))
    throw InvalidArgument("exp_map: tangent vector is based at a different point");
  std::vector<double> out(p.dim());
  exp_map_span(p.span(), v.span(), {out.data(), out.size()});
  return make_point_unchecked(std::move(out));
}

bool log_map_span(std::span<const double> p, std::span<const double> q,
                  std::span<double> out) {
  const double d = geodesic_distance_span(p, q);
  if (d >= M_PI - kAntipodeTol) return false;
  double dot_pq = 0.0;
  for (std::size_t j = 0; j < p.size(); ++j) dot_pq += p[j] * q[j];
  double unorm2 = 0.0;
  for (std::size_t j = 0; j < p.size(); ++j) {
    const double u = q[j] - dot_pq * p[j];
    out[j] = u;
    unorm2 += u * u;
  }
  const double unorm = std::sqrt(unorm2);
  if (unorm < 1e-150 || d < 1e-150) {
    for (std::size_t j = 0; j < p.size(); ++j) out[j] = 0.0;
    return true;
  }
  const double scale = d / unorm;
  for (std::size_t j = 0; j < p.size(); ++j) out[j] *= scale;
  // Strip the rounding-level radial residue so the tangency invariant holds
  // bit-tightly.
  double radial = 0.0;
  for (std::size_t j = 0; j < p.size(); ++j) radial += p[j] * out[j];
  for (std::size_t j = 0; j < p.size(); ++j) out[j] -= radial * p[j];
  return true;
}

TangentVector log_map(const SpherePoint& p, const SpherePoint& q) {
  if (p.dim() != q.dim()) throw DimensionMismatch("log_map: dimension mismatch");
  std::vector<double> out(p.dim());
  if (!log_map_span(p.span(), q.span(), {out.data(), out.size()}))
    throw AntipodalPoint("log_map: points are antipodal (distance within 1e-8 of pi)");
  return TangentVector(p, std::move(out));
}

void project_span(std::span<const double> p, std::span<const double> w,
                  std::span<double> out) {
  double radial = 0.0;
  for (std::size_t j = 0; j < p.size(); ++j) radial += p[j] * w[j];
  for (std::size_t j = 0; j < p.size(); ++j) out[j] = w[j] - radial * p[j];
}

TangentVector project_to_tangent(const SpherePoint& p, std::span<const double> w) {
  if (w.size() != p.dim())
    throw DimensionMismatch("project_to_tangent: dimension mismatch");
  std::vector<double> out(p.dim());
  project_span(p.span(), w, {out.data(), out.size()});
  // One more pass kills the second-order residue of the first.
  project_span(p.span(), {out.data(), out.size()}, {out.data(), out.size()});
  return TangentVector(p, std::move(out));
}

}  // namespace geocurve
