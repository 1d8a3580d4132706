#pragma once

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "geocurve/curve.hpp"
#include "geocurve/geometry.hpp"

// Shared generators for the test suites: random sphere points, tangent
// vectors, and smooth cap-contained curves with controllable dispersion.

namespace testgen {

using geocurve::ManifoldCurve;
using geocurve::SpherePoint;
using geocurve::TimeGrid;

inline std::vector<double> random_unit(std::mt19937_64& rng, std::size_t d) {
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<double> v(d);
  double n2 = 0.0;
  do {
    n2 = 0.0;
    for (auto& x : v) {
      x = g(rng);
      n2 += x * x;
    }
  } while (n2 < 1e-12);
  const double inv = 1.0 / std::sqrt(n2);
  for (auto& x : v) x *= inv;
  return v;
}

inline SpherePoint random_point(std::mt19937_64& rng, std::size_t d) {
  return SpherePoint(random_unit(rng, d));
}

// Random tangent vector at p with norm exactly `len`.
inline std::vector<double> random_tangent(std::mt19937_64& rng, const std::vector<double>& p,
                                          double len) {
  const std::size_t d = p.size();
  std::vector<double> v;
  double n2 = 0.0;
  do {
    v = random_unit(rng, d);
    double dot = 0.0;
    for (std::size_t j = 0; j < d; ++j) dot += v[j] * p[j];
    n2 = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
      v[j] -= dot * p[j];
      n2 += v[j] * v[j];
    }
  } while (n2 < 1e-12);
  const double s = len / std::sqrt(n2);
  for (auto& x : v) x *= s;
  return v;
}

// Orthonormal tangent basis at p (d-1 vectors), via Gram-Schmidt of the
// coordinate axes against p.
inline std::vector<std::vector<double>> tangent_basis(const std::vector<double>& p) {
  const std::size_t d = p.size();
  std::vector<std::vector<double>> basis;
  for (std::size_t axis = 0; axis < d && basis.size() + 1 < d; ++axis) {
    std::vector<double> v(d, 0.0);
    v[axis] = 1.0;
    double dot = 0.0;
    for (std::size_t j = 0; j < d; ++j) dot += v[j] * p[j];
    for (std::size_t j = 0; j < d; ++j) v[j] -= dot * p[j];
    for (const auto& b : basis) {
      double bd = 0.0;
      for (std::size_t j = 0; j < d; ++j) bd += v[j] * b[j];
      for (std::size_t j = 0; j < d; ++j) v[j] -= bd * b[j];
    }
    double n2 = 0.0;
    for (double x : v) n2 += x * x;
    if (n2 < 1e-8) continue;
    const double inv = 1.0 / std::sqrt(n2);
    for (auto& x : v) x *= inv;
    basis.push_back(std::move(v));
  }
  return basis;
}

// Smooth curve inside the geodesic cap of the given radius around `center`:
// a few Fourier modes along each tangent direction, rescaled so the sup of
// the tangent field norm is at most `radius`.
inline ManifoldCurve random_cap_curve(std::mt19937_64& rng, const TimeGrid& grid,
                                      const std::vector<double>& center, double radius) {
  const std::size_t d = center.size();
  const std::size_t N = grid.size();
  const auto basis = tangent_basis(center);
  std::uniform_real_distribution<double> u(-1.0, 1.0);

  std::vector<std::vector<double>> coeff(basis.size(), std::vector<double>(4));
  for (auto& row : coeff)
    for (auto& c : row) c = u(rng);

  const double t0 = grid.node(0), span = grid.span();
  std::vector<double> field(basis.size());
  std::vector<std::vector<double>> tangents(N, std::vector<double>(d, 0.0));
  double sup = 0.0;
  for (std::size_t i = 0; i < N; ++i) {
    const double s = (grid.node(i) - t0) / span;
    double n2 = 0.0;
    for (std::size_t b = 0; b < basis.size(); ++b) {
      const auto& c = coeff[b];
      field[b] = c[0] + c[1] * std::sin(2.0 * std::numbers::pi * s) +
                 c[2] * std::cos(2.0 * std::numbers::pi * s) +
                 c[3] * std::sin(4.0 * std::numbers::pi * s);
      n2 += field[b] * field[b];
    }
    for (std::size_t j = 0; j < d; ++j) {
      double v = 0.0;
      for (std::size_t b = 0; b < basis.size(); ++b) v += field[b] * basis[b][j];
      tangents[i][j] = v;
    }
    sup = std::max(sup, std::sqrt(n2));
  }
  const double scale = sup > 0.0 ? radius / sup : 0.0;

  std::vector<double> vals(d * N), out(d);
  for (std::size_t i = 0; i < N; ++i) {
    for (auto& v : tangents[i]) v *= scale;
    geocurve::exp_map_span({center.data(), d}, {tangents[i].data(), d}, {out.data(), d});
    for (std::size_t j = 0; j < d; ++j) vals[j * N + i] = out[j];
  }
  return ManifoldCurve(grid, d, std::move(vals));
}

inline std::vector<ManifoldCurve> random_cap_sample(std::mt19937_64& rng, const TimeGrid& grid,
                                                    const std::vector<double>& center,
                                                    double radius, std::size_t n) {
  std::vector<ManifoldCurve> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(random_cap_curve(rng, grid, center, radius));
  return out;
}

}  // namespace testgen
