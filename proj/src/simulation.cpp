#include "geocurve/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "geocurve/errors.hpp"

namespace geocurve {

std::uint64_t split_seed(std::uint64_t base, std::uint64_t stream) {
  std::uint64_t z = base + (stream + 1) * 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::vector<double> arima_simulate(const ArimaSpec& spec) {
  if (spec.n == 0) throw InvalidArgument("arima_simulate: n must be positive");
  if (spec.noise_sd < 0.0) throw InvalidArgument("arima_simulate: noise_sd must be >= 0");
  const std::size_t p = spec.ar.size(), q = spec.ma.size();

  if (spec.i == 0 && p > 0) {
    Eigen::MatrixXd comp = Eigen::MatrixXd::Zero(p, p);
    for (std::size_t k = 0; k < p; ++k) comp(0, static_cast<Eigen::Index>(k)) = spec.ar[k];
    if (p > 1)
      comp.block(1, 0, static_cast<Eigen::Index>(p - 1), static_cast<Eigen::Index>(p - 1))
          .setIdentity();
    const auto eig = comp.eigenvalues();
    for (Eigen::Index k = 0; k < eig.size(); ++k)
      if (std::abs(eig[k]) >= 1.0)
        throw InvalidArgument("arima_simulate: AR part is not stationary (companion "
                              "eigenvalue modulus " + std::to_string(std::abs(eig[k])) + ")");
  }

  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  auto innovation = [&]() { return spec.noise_sd > 0.0 ? spec.noise_sd * gauss(rng) : 0.0; };

  const std::size_t burn = spec.i == 0 ? 500 + 10 * std::max(p, q) : 0;
  const std::size_t total = burn + spec.n;
  std::vector<double> x(total, 0.0), e(total, 0.0);
  for (std::size_t t = 0; t < total; ++t) {
    e[t] = innovation();
    double v = e[t];
    for (std::size_t k = 0; k < p && k < t; ++k) v += spec.ar[k] * x[t - 1 - k];
    for (std::size_t k = 0; k < q && k < t; ++k) v += spec.ma[k] * e[t - 1 - k];
    x[t] = v;
  }
  std::vector<double> out(x.begin() + static_cast<std::ptrdiff_t>(burn), x.end());
  for (std::size_t d = 0; d < spec.i; ++d)
    for (std::size_t t = 1; t < out.size(); ++t) out[t] += out[t - 1];
  return out;
}

SdePaths euler_sde(const SdeSpec& spec) {
  const std::size_t k = spec.x0.size();
  if (k == 0) throw InvalidArgument("euler_sde: empty initial state");
  for (double v : spec.x0)
    if (v == 0.0)
      throw InvalidArgument("euler_sde: initial state must have no zero component "
                            "(a zero component never leaves zero)");
  if (spec.v_scale.empty()) throw InvalidArgument("euler_sde: no volatility multipliers");

  const std::size_t N = spec.grid.size();
  const double dt = spec.grid.span() / static_cast<double>(N - 1);
  for (std::size_t l = 0; l + 1 < N; ++l) {
    const double h = spec.grid.node(l + 1) - spec.grid.node(l);
    if (std::abs(h - dt) > 1e-9 * std::max(1.0, std::abs(dt)))
      throw InvalidArgument("euler_sde: grid must be uniform");
  }

  Eigen::MatrixXd M;
  if (spec.drift.size() > 0) {
    if (spec.drift.rows() != static_cast<Eigen::Index>(k) ||
        spec.drift.cols() != static_cast<Eigen::Index>(k))
      throw DimensionMismatch("euler_sde: drift matrix must be k x k");
    M = spec.drift;
  } else {
    M = spec.mu * Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(k),
                                            static_cast<Eigen::Index>(k));
  }

  Eigen::MatrixXd L = Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(k),
                                                static_cast<Eigen::Index>(k));
  if (spec.correlated_components && k > 1) {
    const double rho = spec.component_corr;
    if (!(rho > -1.0 / static_cast<double>(k - 1) && rho < 1.0))
      throw InvalidArgument("euler_sde: component correlation out of range");
    Eigen::MatrixXd C = Eigen::MatrixXd::Constant(static_cast<Eigen::Index>(k),
                                                  static_cast<Eigen::Index>(k), rho);
    C.diagonal().setOnes();
    Eigen::LLT<Eigen::MatrixXd> llt(C);
    if (llt.info() != Eigen::Success)
      throw InvalidArgument("euler_sde: correlation matrix is not positive definite");
    L = llt.matrixL();
  }

  SdePaths out{spec.grid, k, {}};
  out.paths.reserve(spec.v_scale.size());
  const double sdt = std::sqrt(dt);
  Eigen::VectorXd x(static_cast<Eigen::Index>(k)), z(static_cast<Eigen::Index>(k)),
      dw(static_cast<Eigen::Index>(k));
  for (std::size_t i = 0; i < spec.v_scale.size(); ++i) {
    const bool mirror = spec.antithetic && (i % 2 == 1);
    std::mt19937_64 rng(split_seed(spec.seed, mirror ? i - 1 : i));
    std::normal_distribution<double> gauss(0.0, 1.0);
    const double sign = mirror ? -1.0 : 1.0;
    const double V = spec.v_scale[i];

    Eigen::MatrixXd path(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(N));
    for (std::size_t j = 0; j < k; ++j) x[static_cast<Eigen::Index>(j)] = spec.x0[j];
    path.col(0) = x;
    for (std::size_t l = 1; l < N; ++l) {
      for (std::size_t j = 0; j < k; ++j)
        z[static_cast<Eigen::Index>(j)] = sign * gauss(rng);
      dw = sdt * (L * z);
      x += dt * (M * x) + V * x.cwiseProduct(dw);
      path.col(static_cast<Eigen::Index>(l)) = x;
    }
    out.paths.push_back(std::move(path));
  }
  return out;
}

std::vector<double> normalize_sup(std::span<const double> path) {
  if (path.empty()) throw InvalidArgument("normalize_sup: empty path");
  double sup = 0.0;
  for (double v : path) sup = std::max(sup, std::abs(v));
  if (sup == 0.0) throw InvalidArgument("normalize_sup: path is identically zero");
  std::vector<double> out(path.size());
  for (std::size_t t = 0; t < path.size(); ++t) out[t] = std::abs(path[t]) / sup;
  return out;
}

ManifoldCurve inverse_vmf(const TimeGrid& grid, std::span<const double> u1,
                          std::span<const double> u2, double kappa) {
  if (!(kappa > 0.0)) throw InvalidArgument("inverse_vmf: kappa must be positive");
  const std::size_t N = grid.size();
  if (u1.size() != N || u2.size() != N)
    throw DimensionMismatch("inverse_vmf: input curves do not match the grid");
  std::vector<double> vals(3 * N);
  const double sinhk = std::sinh(kappa);
  const double emk = std::exp(-kappa);
  for (std::size_t t = 0; t < N; ++t) {
    const double a = u1[t], b = u2[t];
    if (a < 0.0 || a > 1.0 || b < 0.0 || b > 1.0)
      throw InvalidArgument("inverse_vmf: inputs must lie in [0, 1] (node " +
                            std::to_string(t) + ")");
    double y3;
    if (a >= 1.0) y3 = 1.0;
    else if (a <= 0.0) y3 = -1.0;
    else y3 = std::clamp(std::log(2.0 * a * sinhk + emk) / kappa, -1.0, 1.0);
    const double s = std::sqrt(std::max(0.0, 1.0 - y3 * y3));
    const double phi = 2.0 * std::numbers::pi * b;
    vals[0 * N + t] = s * std::cos(phi);
    vals[1 * N + t] = s * std::sin(phi);
    vals[2 * N + t] = y3;
  }
  return ManifoldCurve(grid, 3, std::move(vals));
}

ManifoldCurve regressor_from_response(const ManifoldCurve& y,
                                      const std::function<double(double)>& polar_transform) {
  if (y.dim() != 3) throw DimensionMismatch("regressor_from_response: curve must be on S^2");
  const std::size_t N = y.nodes();
  std::vector<double> vals(3 * N);
  for (std::size_t t = 0; t < N; ++t) {
    const double y1 = y.value(0, t), y2 = y.value(1, t), y3 = y.value(2, t);
    const double theta = std::acos(std::clamp(y3, -1.0, 1.0));
    const double tp = polar_transform(theta);
    if (!(tp >= 0.0 && tp <= std::numbers::pi))
      throw InvalidArgument("regressor_from_response: transform left [0, pi] at node " +
                            std::to_string(t));
    const double s = std::hypot(y1, y2);
    const double cphi = s > 0.0 ? y1 / s : 1.0;
    const double sphi = s > 0.0 ? y2 / s : 0.0;
    const double st = std::sin(tp);
    vals[0 * N + t] = st * cphi;
    vals[1 * N + t] = st * sphi;
    vals[2 * N + t] = std::cos(tp);
  }
  return ManifoldCurve(y.grid(), 3, std::move(vals));
}

BivariateSample generate_bivariate_sample(const GeneratorConfig& cfg) {
  if (cfg.n == 0) throw InvalidArgument("generate_bivariate_sample: n must be positive");
  const double lo = cfg.u1_range[0], hi = cfg.u1_range[1];
  if (!(lo >= 0.0 && lo < hi && hi <= 1.0))
    throw InvalidArgument("generate_bivariate_sample: u1_range must satisfy 0 <= lo < hi <= 1");
  if (cfg.sde.x0.size() < 2)
    throw InvalidArgument("generate_bivariate_sample: the driving process needs at least "
                          "two components (u1 and u2 sources)");

  ArimaSpec a = cfg.arima;
  a.n = cfg.n;
  a.seed = split_seed(cfg.seed, 0);
  const auto series = arima_simulate(a);

  SdeSpec s = cfg.sde;
  s.seed = split_seed(cfg.seed, 1);
  s.v_scale.resize(cfg.n);
  for (std::size_t i = 0; i < cfg.n; ++i) s.v_scale[i] = std::abs(series[i]);
  const auto paths = euler_sde(s);
  const std::size_t N = paths.grid.size();

  BivariateSample out;
  out.volatility = s.v_scale;
  out.responses.reserve(cfg.n);
  out.regressors.reserve(cfg.n);
  std::vector<double> c0(N), c1(N), u1(N);
  for (std::size_t i = 0; i < cfg.n; ++i) {
    const auto& P = paths.paths[i];
    for (std::size_t t = 0; t < N; ++t) {
      c0[t] = P(0, static_cast<Eigen::Index>(t));
      c1[t] = P(1, static_cast<Eigen::Index>(t));
    }
    const auto raw1 = normalize_sup(c0);
    const auto u2 = normalize_sup(c1);
    for (std::size_t t = 0; t < N; ++t) u1[t] = lo + (hi - lo) * raw1[t];
    out.responses.push_back(inverse_vmf(paths.grid, u1, u2, cfg.kappa));

    if (cfg.identity_polar) {
      out.regressors.push_back(out.responses.back());
    } else {
      const double tau = cfg.n > 1 ? static_cast<double>(i) / static_cast<double>(cfg.n - 1)
                                   : 0.0;
      const double slope = cfg.a0 + cfg.a1 * tau;
      const double shift = cfg.b0 + cfg.b1 * tau;
      auto tf = [slope, shift](double th) {
        constexpr double eps = 1e-3;
        return std::clamp(slope * th + shift, eps, std::numbers::pi - eps);
      };
      out.regressors.push_back(regressor_from_response(out.responses.back(), tf));
    }
  }
  return out;
}

}  // namespace geocurve
