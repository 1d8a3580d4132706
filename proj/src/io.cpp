#include "geocurve/io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

#include <json.hpp>

#include "geocurve/errors.hpp"

namespace geocurve::io {

namespace fs = std::filesystem;
using nlohmann::json;

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

namespace {

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  return out;
}

std::ifstream open_in(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open for reading: " + path.string());
  return in;
}

std::vector<double> parse_row(const std::string& line, const fs::path& path,
                              std::size_t lineno) {
  std::vector<double> out;
  std::size_t pos = 0;
  while (pos <= line.size()) {
    std::size_t comma = line.find(',', pos);
    if (comma == std::string::npos) comma = line.size();
    const std::string tok = line.substr(pos, comma - pos);
    try {
      std::size_t used = 0;
      out.push_back(std::stod(tok, &used));
      while (used < tok.size() && std::isspace(static_cast<unsigned char>(tok[used]))) ++used;
      if (used != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::exception&) {
      throw IoError(path.string() + ":" + std::to_string(lineno) +
                    ": cannot parse number '" + tok + "'");
    }
    pos = comma + 1;
    if (comma == line.size()) break;
  }
  return out;
}

}  // namespace

void write_curve_csv(const fs::path& path, const ManifoldCurve& curve) {
  auto out = open_out(path);
  const std::size_t N = curve.nodes(), d = curve.dim();
  out << "t";
  for (std::size_t j = 1; j <= d; ++j) out << ",c" << j;
  out << "\n";
  for (std::size_t i = 0; i < N; ++i) {
    out << format_double(curve.grid().node(i));
    for (std::size_t j = 0; j < d; ++j) out << "," << format_double(curve.value(j, i));
    out << "\n";
  }
  if (!out) throw IoError("write failed: " + path.string());
}

ManifoldCurve read_curve_csv(const fs::path& path) {
  auto in = open_in(path);
  std::string line;
  if (!std::getline(in, line)) throw IoError(path.string() + ": empty file");
  if (line.rfind("t,c1", 0) != 0)
    throw IoError(path.string() + ": expected header t,c1,...");
  const std::size_t d = static_cast<std::size_t>(
      std::count(line.begin(), line.end(), ',') );
  std::vector<double> times;
  std::vector<std::vector<double>> rows;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    auto row = parse_row(line, path, lineno);
    if (row.size() != d + 1)
      throw IoError(path.string() + ":" + std::to_string(lineno) + ": expected " +
                    std::to_string(d + 1) + " fields, got " + std::to_string(row.size()));
    times.push_back(row[0]);
    row.erase(row.begin());
    rows.push_back(std::move(row));
  }
  if (times.size() < 2) throw IoError(path.string() + ": need at least two nodes");
  const std::size_t N = times.size();
  std::vector<double> vals(d * N);
  for (std::size_t i = 0; i < N; ++i)
    for (std::size_t j = 0; j < d; ++j) vals[j * N + i] = rows[i][j];
  try {
    return ManifoldCurve(TimeGrid(std::move(times)), d, std::move(vals));
  } catch (const Error& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

void write_matrix_csv(const fs::path& path, const Eigen::MatrixXd& m) {
  auto out = open_out(path);
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      if (c) out << ",";
      out << format_double(m(r, c));
    }
    out << "\n";
  }
  if (!out) throw IoError("write failed: " + path.string());
}

Eigen::MatrixXd read_matrix_csv(const fs::path& path) {
  auto in = open_in(path);
  std::string line;
  std::vector<std::vector<double>> rows;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    rows.push_back(parse_row(line, path, lineno));
    if (rows.back().size() != rows.front().size())
      throw IoError(path.string() + ": ragged rows");
  }
  if (rows.empty()) throw IoError(path.string() + ": empty matrix");
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()),
                    static_cast<Eigen::Index>(rows[0].size()));
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t c = 0; c < rows[r].size(); ++c)
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
  return m;
}

namespace {

json grid_to_json(const TimeGrid& grid) {
  json nodes = json::array();
  for (double t : grid.nodes()) nodes.push_back(t);
  return nodes;
}

TimeGrid grid_from_json(const json& j) {
  std::vector<double> nodes;
  for (const auto& v : j) nodes.push_back(v.get<double>());
  return TimeGrid(std::move(nodes));
}

}  // namespace

void save_operator(const fs::path& dir, const BlockCovarianceOperator& op) {
  fs::create_directories(dir);
  json manifest;
  manifest["kind"] = "block_covariance_operator";
  manifest["dim"] = op.dim();
  manifest["lags"] = op.lags();
  manifest["grid"] = grid_to_json(op.grid());
  json spec = json::array();
  for (Eigen::Index k = 0; k < op.eigenvalues().size(); ++k)
    spec.push_back(op.eigenvalues()[k]);
  manifest["eigenvalues"] = spec;
  auto out = open_out(dir / "operator.json");
  out << manifest.dump(2) << "\n";
  write_matrix_csv(dir / "operator_matrix.csv", op.full_matrix());
}

BlockCovarianceOperator load_operator(const fs::path& dir) {
  auto in = open_in(dir / "operator.json");
  json manifest;
  try {
    in >> manifest;
  } catch (const json::exception& e) {
    throw IoError((dir / "operator.json").string() + ": " + e.what());
  }
  if (manifest.value("kind", "") != "block_covariance_operator")
    throw IoError(dir.string() + ": not an operator dump");
  auto grid = grid_from_json(manifest.at("grid"));
  const auto dim = manifest.at("dim").get<std::size_t>();
  const auto lags = manifest.at("lags").get<std::size_t>();
  auto m = read_matrix_csv(dir / "operator_matrix.csv");
  return BlockCovarianceOperator::from_dense(std::move(grid), dim, lags, std::move(m));
}

void save_model(const fs::path& dir, const RegressionModel& model) {
  fs::create_directories(dir);
  json manifest;
  manifest["kind"] = "regression_model";
  manifest["n"] = model.n();
  manifest["m"] = model.m();
  manifest["dim"] = model.dim();
  manifest["grid"] = grid_to_json(model.grid());
  manifest["mean_converged"] = model.mean_converged();
  manifest["ridge"] = model.inverse().ridge();
  manifest["retained"] = model.inverse().retained();
  json spec = json::array();
  for (Eigen::Index k = 0; k < model.op().eigenvalues().size(); ++k)
    spec.push_back(model.op().eigenvalues()[k]);
  manifest["eigenvalues"] = spec;
  auto out = open_out(dir / "model.json");
  out << manifest.dump(2) << "\n";

  write_curve_csv(dir / "mean_curve.csv", model.mu_hat());
  save_operator(dir / "operator", model.op());
  Eigen::MatrixXd logs(static_cast<Eigen::Index>(model.n()),
                       static_cast<Eigen::Index>(model.dim() * model.grid().size()));
  for (std::size_t i = 0; i < model.n(); ++i) {
    const auto& v = model.log_regressor(i).values();
    for (std::size_t t = 0; t < v.size(); ++t)
      logs(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(t)) = v[t];
  }
  write_matrix_csv(dir / "log_regressors.csv", logs);
}

std::string selection_to_json(const SelectionResult& res) {
  json j;
  j["s1"] = res.s1;
  j["s2"] = res.s2;
  j["selected"] = res.selected;
  j["empty_intersection"] = res.empty_intersection;
  j["candidates"] = res.candidates;
  j["weights"] = res.weights;
  j["distances"] = res.distances;
  j["relative_distances"] = res.relative_distances;
  return j.dump(2);
}

ManifoldCurve resample_curve(const ManifoldCurve& curve, const TimeGrid& target) {
  const TimeGrid& src = curve.grid();
  const double t0 = src.node(0), t1 = src.node(src.size() - 1);
  if (target.node(0) < t0 - 1e-12 || target.node(target.size() - 1) > t1 + 1e-12)
    throw InvalidArgument("resample_curve: target grid leaves the source time span");
  const std::size_t d = curve.dim(), N = target.size();
  std::vector<double> vals(d * N);
  std::vector<double> p(d), q(d), v(d), r(d);
  std::size_t seg = 0;
  for (std::size_t i = 0; i < N; ++i) {
    const double t = std::clamp(target.node(i), t0, t1);
    while (seg + 2 < src.size() && src.node(seg + 1) < t) ++seg;
    const double a = src.node(seg), b = src.node(seg + 1);
    const double frac = (t - a) / (b - a);
    for (std::size_t j = 0; j < d; ++j) {
      p[j] = curve.value(j, seg);
      q[j] = curve.value(j, seg + 1);
    }
    if (!log_map_span({p.data(), d}, {q.data(), d}, {v.data(), d}))
      throw AntipodalPoint("resample_curve: adjacent nodes antipodal", seg);
    for (std::size_t j = 0; j < d; ++j) v[j] *= frac;
    exp_map_span({p.data(), d}, {v.data(), d}, {r.data(), d});
    for (std::size_t j = 0; j < d; ++j) vals[j * N + i] = r[j];
  }
  return ManifoldCurve(target, d, std::move(vals));
}

std::uint64_t hash_file(const fs::path& path) {
  auto in = open_in(path);
  std::uint64_t h = 1469598103934665603ULL;
  char buf[4096];
  while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
    const auto got = static_cast<std::size_t>(in.gcount());
    for (std::size_t i = 0; i < got; ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 1099511628211ULL;
    }
    if (!in) break;
  }
  return h;
}

std::uint64_t hash_directory(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw IoError("not a directory: " + dir.string());
  std::vector<fs::path> files;
  for (const auto& entry : fs::recursive_directory_iterator(dir))
    if (entry.is_regular_file()) files.push_back(entry.path());
  std::sort(files.begin(), files.end(),
            [&](const fs::path& a, const fs::path& b) {
              return a.lexically_relative(dir).generic_string() <
                     b.lexically_relative(dir).generic_string();
            });
  std::uint64_t h = 1469598103934665603ULL;
  auto mix = [&h](std::uint64_t v) {
    for (int i = 0; i < 8; ++i) {
      h ^= (v >> (8 * i)) & 0xFF;
      h *= 1099511628211ULL;
    }
  };
  for (const auto& f : files) {
    for (char c : f.lexically_relative(dir).generic_string()) {
      h ^= static_cast<unsigned char>(c);
      h *= 1099511628211ULL;
    }
    mix(hash_file(f));
  }
  return h;
}

}  // namespace geocurve::io
