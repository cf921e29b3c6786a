#pragma once

/// @file plots.hpp
/// @brief Scatter-plot artifacts for a report: one CSV (model_id,x,y) and one
/// self-contained SVG per plain correlation. The horizontal axis is the
/// predictor (e.g. contrastive accuracy), the vertical axis the target
/// (e.g. test accuracy). Partial correlations are not plotted.

#include <filesystem>
#include <string>
#include <vector>

#include "contre/report.hpp"

namespace contre {

struct ScatterPoint {
  std::string model_id;
  double x = 0.0;
  double y = 0.0;
};

struct Figure {
  std::string name;
  std::string x_label;
  std::string y_label;
  std::optional<double> rho;
  std::vector<ScatterPoint> points;
};

/// Figures for every plain correlation whose score vectors are available;
/// Fisher figures appear only when the report has Fisher ratios.
std::vector<Figure> figures_for(const CorrelationReport& report);

std::string figure_csv(const Figure& figure);
std::string figure_svg(const Figure& figure);

/// Writes `<name>.csv` and `<name>.svg` per figure; returns the paths written.
std::vector<std::filesystem::path> emit_plots(const CorrelationReport& report, const std::filesystem::path& dir);

}  // namespace contre
