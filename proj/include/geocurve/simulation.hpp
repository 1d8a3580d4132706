#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "geocurve/curve.hpp"

// Synthetic generator for time-correlated sphere-valued curve samples:
// an ARIMA series drives per-sample volatility of a linear-drift SDE, the
// normalized path components feed the inverse von Mises-Fisher transform,
// and the regressor is subordinated to the response through a polar-angle
// transform that preserves azimuths. Sphere dimension is fixed to S^2 here;
// the inverse transform below is specific to three ambient components.

namespace geocurve {

struct ArimaSpec {
  std::vector<double> ar;
  std::size_t i = 0;  // differencing order
  std::vector<double> ma;
  double noise_sd = 1.0;
  std::size_t n = 0;
  std::uint64_t seed = 1;
};

// Deterministic per seed. Gaussian innovations; a fixed burn-in precedes the
// recorded stretch so stationary specs start near their stationary law.
// Throws if i = 0 and the AR polynomial is not stationary.
std::vector<double> arima_simulate(const ArimaSpec& spec);

struct SdeSpec {
  double mu = 0.0;           // scalar rate; ignored when drift is non-empty
  Eigen::MatrixXd drift;     // k x k rate matrix (empty: mu * identity)
  std::vector<double> v_scale;       // per-path volatility multipliers V(s_i)
  std::vector<double> x0{1.0, 1.0};  // initial state, every component nonzero
  TimeGrid grid = TimeGrid::uniform(0.0, 1.0, 2);
  std::uint64_t seed = 1;
  bool correlated_components = false;
  double component_corr = 0.0;  // pairwise correlation when correlated
  bool antithetic = false;      // consecutive paths use mirrored increments
};

struct SdePaths {
  TimeGrid grid;
  std::size_t components = 0;
  std::vector<Eigen::MatrixXd> paths;  // one k x N matrix per v_scale entry
};

// Euler-Maruyama for dX = (drift X) dt + V diag(X) L dW on a uniform grid,
// one path per v_scale entry, seed split per path so ordering never matters.
SdePaths euler_sde(const SdeSpec& spec);

// |path| / sup|path|; throws on an identically zero path.
std::vector<double> normalize_sup(std::span<const double> path);

// Pointwise inverse von Mises-Fisher transform of two [0,1] curves into an
// S^2 curve: the third component is log(2 u1 sinh(kappa) + exp(-kappa)) /
// kappa, the first two put azimuth 2 pi u2 at the matching latitude.
// u1 = 1 and u1 = 0 map exactly to the north and south poles.
ManifoldCurve inverse_vmf(const TimeGrid& grid, std::span<const double> u1,
                          std::span<const double> u2, double kappa);

// New curve with polar angles transform(theta) and azimuths copied from y.
// Throws if the transform leaves [0, pi].
ManifoldCurve regressor_from_response(const ManifoldCurve& y,
                                      const std::function<double(double)>& polar_transform);

struct GeneratorConfig {
  ArimaSpec arima;  // n and seed are overridden by the outer fields
  SdeSpec sde;      // v_scale, seed and grid are filled in
  double kappa = 1.5;
  std::size_t n = 100;
  std::uint64_t seed = 1;

  // Affine squeeze of u1 into [lo, hi] before the inverse transform; tightens
  // dispersion without touching the time correlation.
  std::array<double, 2> u1_range{0.0, 1.0};

  // Polar family for the regressor: theta' = clamp((a0 + a1 tau) theta +
  // (b0 + b1 tau), [eps, pi - eps]) at sample fraction tau = i / (n - 1).
  bool identity_polar = false;
  double a0 = 1.0, a1 = 0.0, b0 = 0.0, b1 = 0.0;
};

struct BivariateSample {
  std::vector<ManifoldCurve> responses, regressors;
  std::vector<double> volatility;  // the ARIMA-driven multipliers, |v_i|
};

BivariateSample generate_bivariate_sample(const GeneratorConfig& cfg);

// Stream-indexed seed derivation (splitmix-style); part of the generator
// contract so parallel and serial runs agree bit for bit.
std::uint64_t split_seed(std::uint64_t base, std::uint64_t stream);

}  // namespace geocurve
