#include "geocurve/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "geocurve/errors.hpp"

namespace geocurve::plot {

namespace {

constexpr double kW = 720.0, kH = 480.0;
constexpr double kLeft = 70.0, kRight = 24.0, kTop = 42.0, kBottom = 52.0;

const char* kPalette[] = {"#1f6fb2", "#d1495b", "#3c8d53", "#8a5fb0",
                          "#c67f2d", "#3b8ea5", "#75506b", "#5b5b5b"};
constexpr std::size_t kPaletteSize = sizeof(kPalette) / sizeof(kPalette[0]);

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      default: out += c;
    }
  }
  return out;
}

struct Range {
  double lo = 0.0, hi = 1.0;
  void include(double v) {
    if (std::isfinite(v)) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
};

// Round tick spacing to 1/2/5 x 10^k covering the range with ~5 ticks.
std::vector<double> ticks(double lo, double hi) {
  if (!(hi > lo)) return {lo};
  const double span = hi - lo;
  const double raw = span / 5.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (double mult : {1.0, 2.0, 5.0, 10.0})
    if (raw <= mult * mag) {
      step = mult * mag;
      break;
    }
  std::vector<double> out;
  double t = std::ceil(lo / step) * step;
  for (; t <= hi + 0.5 * step; t += step) out.push_back(std::abs(t) < 1e-12 * step ? 0.0 : t);
  return out;
}

void frame(std::ostringstream& svg, const std::string& title, const std::string& xlabel,
           const std::string& ylabel, const Range& xr, const Range& yr) {
  svg << "<rect x='" << kLeft << "' y='" << kTop << "' width='" << (kW - kLeft - kRight)
      << "' height='" << (kH - kTop - kBottom)
      << "' fill='none' stroke='#444' stroke-width='1'/>\n";
  svg << "<text x='" << kW / 2 << "' y='24' text-anchor='middle' font-size='15'>"
      << escape(title) << "</text>\n";
  if (!xlabel.empty())
    svg << "<text x='" << kW / 2 << "' y='" << (kH - 12)
        << "' text-anchor='middle' font-size='12'>" << escape(xlabel) << "</text>\n";
  if (!ylabel.empty())
    svg << "<text x='16' y='" << kH / 2 << "' text-anchor='middle' font-size='12' "
        << "transform='rotate(-90 16 " << kH / 2 << ")'>" << escape(ylabel) << "</text>\n";
  auto xpix = [&](double v) {
    return kLeft + (v - xr.lo) / (xr.hi - xr.lo) * (kW - kLeft - kRight);
  };
  auto ypix = [&](double v) {
    return kH - kBottom - (v - yr.lo) / (yr.hi - yr.lo) * (kH - kTop - kBottom);
  };
  for (double t : ticks(xr.lo, xr.hi)) {
    const double px = xpix(t);
    svg << "<line x1='" << num(px) << "' y1='" << (kH - kBottom) << "' x2='" << num(px)
        << "' y2='" << (kH - kBottom + 5) << "' stroke='#444'/>\n";
    svg << "<text x='" << num(px) << "' y='" << (kH - kBottom + 18)
        << "' text-anchor='middle' font-size='11'>" << num(t) << "</text>\n";
  }
  for (double t : ticks(yr.lo, yr.hi)) {
    const double py = ypix(t);
    svg << "<line x1='" << (kLeft - 5) << "' y1='" << num(py) << "' x2='" << kLeft
        << "' y2='" << num(py) << "' stroke='#444'/>\n";
    svg << "<text x='" << (kLeft - 9) << "' y='" << num(py + 4)
        << "' text-anchor='end' font-size='11'>" << num(t) << "</text>\n";
  }
}

}  // namespace

std::string line_plot(const std::string& title, std::span<const Series> series,
                      const std::string& xlabel, const std::string& ylabel) {
  Range xr{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  Range yr = xr;
  for (const auto& s : series) {
    for (double v : s.x) xr.include(v);
    for (double v : s.y) yr.include(v);
  }
  if (!std::isfinite(xr.lo) || !(xr.hi > xr.lo)) {
    xr.lo = std::isfinite(xr.lo) ? xr.lo - 0.5 : 0.0;
    xr.hi = xr.lo + 1.0;
  }
  if (!std::isfinite(yr.lo) || !(yr.hi > yr.lo)) {
    yr.lo = std::isfinite(yr.lo) ? yr.lo - 0.5 : 0.0;
    yr.hi = yr.lo + 1.0;
  }

  std::ostringstream svg;
  svg << "<svg xmlns='http://www.w3.org/2000/svg' width='" << kW << "' height='" << kH
      << "' viewBox='0 0 " << kW << " " << kH << "' font-family='sans-serif'>\n";
  svg << "<rect width='" << kW << "' height='" << kH << "' fill='white'/>\n";
  frame(svg, title, xlabel, ylabel, xr, yr);
  auto xpix = [&](double v) {
    return kLeft + (v - xr.lo) / (xr.hi - xr.lo) * (kW - kLeft - kRight);
  };
  auto ypix = [&](double v) {
    return kH - kBottom - (v - yr.lo) / (yr.hi - yr.lo) * (kH - kTop - kBottom);
  };
  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    const char* color = kPalette[k % kPaletteSize];
    if (s.x.size() != s.y.size()) throw InvalidArgument("line_plot: x/y length mismatch");
    svg << "<polyline fill='none' stroke='" << color << "' stroke-width='1.5' points='";
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (i) svg << " ";
      svg << num(xpix(s.x[i])) << "," << num(ypix(s.y[i]));
    }
    svg << "'/>\n";
    if (s.x.size() <= 64)
      for (std::size_t i = 0; i < s.x.size(); ++i)
        svg << "<circle cx='" << num(xpix(s.x[i])) << "' cy='" << num(ypix(s.y[i]))
            << "' r='2.5' fill='" << color << "'/>\n";
    if (!s.label.empty()) {
      const double ly = kTop + 16.0 + 16.0 * static_cast<double>(k);
      svg << "<line x1='" << (kW - kRight - 120) << "' y1='" << num(ly - 4) << "' x2='"
          << (kW - kRight - 100) << "' y2='" << num(ly - 4) << "' stroke='" << color
          << "' stroke-width='2'/>\n";
      svg << "<text x='" << (kW - kRight - 94) << "' y='" << num(ly)
          << "' font-size='11'>" << escape(s.label) << "</text>\n";
    }
  }
  svg << "</svg>\n";
  return svg.str();
}

std::string sphere_scatter(const std::string& title, std::span<const ManifoldCurve> curves,
                           std::span<const std::string> labels) {
  const double size = 480.0, cx = size / 2, cy = size / 2 + 10, R = 190.0;
  std::ostringstream svg;
  svg << "<svg xmlns='http://www.w3.org/2000/svg' width='" << size << "' height='" << size
      << "' viewBox='0 0 " << size << " " << size << "' font-family='sans-serif'>\n";
  svg << "<rect width='" << size << "' height='" << size << "' fill='white'/>\n";
  svg << "<text x='" << cx << "' y='24' text-anchor='middle' font-size='15'>"
      << escape(title) << "</text>\n";
  svg << "<circle cx='" << cx << "' cy='" << cy << "' r='" << R
      << "' fill='none' stroke='#888'/>\n";
  // equator of the +z view
  svg << "<ellipse cx='" << cx << "' cy='" << cy << "' rx='" << R << "' ry='" << R / 4
      << "' fill='none' stroke='#ccc' stroke-dasharray='4 3'/>\n";
  for (std::size_t k = 0; k < curves.size(); ++k) {
    const auto& c = curves[k];
    if (c.dim() != 3) throw InvalidArgument("sphere_scatter: curves must have 3 components");
    const char* color = kPalette[k % kPaletteSize];
    for (std::size_t i = 0; i < c.nodes(); ++i) {
      const double x = cx + R * c.value(0, i);
      const double y = cy - R * c.value(1, i);
      const bool front = c.value(2, i) >= 0.0;
      if (front)
        svg << "<circle cx='" << num(x) << "' cy='" << num(y) << "' r='2' fill='" << color
            << "'/>\n";
      else
        svg << "<circle cx='" << num(x) << "' cy='" << num(y) << "' r='2' fill='none' "
            << "stroke='" << color << "' stroke-width='0.8'/>\n";
    }
    if (k < labels.size()) {
      const double ly = 40.0 + 16.0 * static_cast<double>(k);
      svg << "<circle cx='18' cy='" << num(ly - 4) << "' r='3' fill='" << color << "'/>\n";
      svg << "<text x='26' y='" << num(ly) << "' font-size='11'>" << escape(labels[k])
          << "</text>\n";
    }
  }
  svg << "</svg>\n";
  return svg.str();
}

void write_svg(const std::filesystem::path& path, const std::string& svg) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  out << svg;
  if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace geocurve::plot
