#pragma once

// Minimal standalone SVG line plots.

#include <filesystem>
#include <string>
#include <vector>

namespace fmkdv {

struct PlotSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  bool markers = false;
};

struct Band {  // shaded x-interval
  double x0 = 0.0;
  double x1 = 0.0;
  std::string color;
  std::string label;
};

struct PlotSpec {
  std::string title;
  std::string xlabel;
  std::string ylabel;
  bool log_x = false;
  bool log_y = false;
  std::vector<PlotSeries> series;
  std::vector<Band> bands;
};

std::string render_svg(const PlotSpec& spec);
void write_svg(const std::filesystem::path& path, const PlotSpec& spec);

}  // namespace fmkdv
