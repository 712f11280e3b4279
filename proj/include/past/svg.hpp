#pragma once

// Minimal SVG line plots: polylines, error bars, a legend and notes.

#include "past/metrics.hpp"

#include <span>
#include <string>
#include <vector>

namespace past::svg {

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  std::vector<double> err;  ///< empty: no error bars
  std::string color = "#1f77b4";
  bool dashed = false;
};

struct Plot {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<Series> series;
  std::vector<std::string> notes;  ///< printed under the legend
  int width = 720;
  int height = 480;
};

std::string render(const Plot& plot);
std::string roc_plot(std::span<const RocPoint> roc, const std::string& title);

/// Color for the i-th series.
std::string palette(std::size_t i);

}  // namespace past::svg
