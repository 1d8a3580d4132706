#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

// Subcommand drivers behind the geocurve binary. Each returns a process
// exit code: 0 success, 1 usage/config/ingestion error, 2 numerical failure
// (antipodal point, degenerate covariance), 3 failed report checks.

namespace geocurve::cli {

struct CommonArgs {
  std::string config_path;             // empty: built-in defaults
  std::vector<std::string> overrides;  // --set key.path=value
  std::optional<std::uint64_t> seed;   // --seed
  std::string out_dir;                 // --out, overrides io.output_dir
  std::string sample_dir;              // --sample, overrides io.input_dir
  std::vector<std::string> run_dirs;   // report positionals
};

int run_simulate(const CommonArgs& args);
int run_fit_predict(const CommonArgs& args);
int run_select(const CommonArgs& args);
int run_report(const CommonArgs& args);

}  // namespace geocurve::cli
