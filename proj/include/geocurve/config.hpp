#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "geocurve/regression.hpp"
#include "geocurve/selection.hpp"
#include "geocurve/simulation.hpp"

// Experiment configuration: one JSON document with simulation / model /
// predict / selection / io blocks. Parsing is strict: unknown keys anywhere
// are rejected with their dotted path, so typos never silently fall back to
// defaults. CLI --set overrides patch the document before parsing.

namespace geocurve {

struct ExperimentConfig {
  // simulation
  GeneratorConfig generator;
  std::size_t sim_nodes = 1000;
  double sim_t_end = 1.0;

  // model
  std::size_t m = 0;  // 0: estimate from the lag-covariance decay
  double lag_threshold = 0.2;
  FitConfig fit;

  // predict
  PredictConfig predict;
  std::size_t query_index = 0;  // window start for fit-predict

  // selection
  SelectionConfig selection;
  std::vector<std::size_t> prediction_times;  // select runs one row per time
  bool scenario1 = true, scenario2 = true;

  // io
  std::string input_dir;
  std::string output_dir = "out";
  bool plots = true;
};

ExperimentConfig default_config();

// Strict parse; origin names the source in error messages.
ExperimentConfig parse_config_json(const std::string& text, const std::string& origin);

// Reads the file, applies dotted-path overrides ("model.m=3",
// "simulation.u1_range=[0.85,1]"), then parses strictly. An empty path uses
// the built-in defaults (overrides still apply).
ExperimentConfig load_config(const std::filesystem::path& path,
                             const std::vector<std::string>& overrides = {});

// The effective configuration as a JSON document (manifest embedding).
std::string config_to_json(const ExperimentConfig& cfg);

}  // namespace geocurve
