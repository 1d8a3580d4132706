#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "geocurve/curve.hpp"

// Minimal deterministic SVG emission: line plots for weight / distance /
// trend figures and an orthographic projection scatter for sphere curves.
// No plotting runtime; output depends only on the inputs.

namespace geocurve::plot {

struct Series {
  std::string label;
  std::vector<double> x, y;
};

std::string line_plot(const std::string& title, std::span<const Series> series,
                      const std::string& xlabel = "", const std::string& ylabel = "");

// Curves on S^2 projected orthographically along +z onto the unit disk;
// points on the far hemisphere are drawn hollow.
std::string sphere_scatter(const std::string& title, std::span<const ManifoldCurve> curves,
                           std::span<const std::string> labels = {});

void write_svg(const std::filesystem::path& path, const std::string& svg);

}  // namespace geocurve::plot
