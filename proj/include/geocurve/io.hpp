#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <string>

#include "geocurve/covariance.hpp"
#include "geocurve/curve.hpp"
#include "geocurve/regression.hpp"
#include "geocurve/selection.hpp"

// Portable on-disk formats: curve CSV (header t,c1,...,cd0, one row per
// node), matrix CSV, and JSON manifests. All floating-point output uses
// shortest-exact formatting so written values read back bit-identical.

namespace geocurve::io {

std::string format_double(double v);  // %.17g

void write_curve_csv(const std::filesystem::path& path, const ManifoldCurve& curve);
ManifoldCurve read_curve_csv(const std::filesystem::path& path);

void write_matrix_csv(const std::filesystem::path& path, const Eigen::MatrixXd& m);
Eigen::MatrixXd read_matrix_csv(const std::filesystem::path& path);

// JSON manifest (grid, dims, spectrum) + CSV dump of the dense block matrix.
void save_operator(const std::filesystem::path& dir, const BlockCovarianceOperator& op);
BlockCovarianceOperator load_operator(const std::filesystem::path& dir);

// JSON manifest + CSV tensors (mean curve, log stacks, operator) for audits.
void save_model(const std::filesystem::path& dir, const RegressionModel& model);

std::string selection_to_json(const SelectionResult& res);

// Curve moved onto a new grid by per-segment geodesic interpolation; the
// target grid must lie within the source time span.
ManifoldCurve resample_curve(const ManifoldCurve& curve, const TimeGrid& target);

// FNV-1a over file bytes / over a directory's (relative path, bytes) pairs
// in sorted order; used by the determinism checks.
std::uint64_t hash_file(const std::filesystem::path& path);
std::uint64_t hash_directory(const std::filesystem::path& dir);

}  // namespace geocurve::io
