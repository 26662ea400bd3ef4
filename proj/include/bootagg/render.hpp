#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bootagg/dataset.hpp"
#include "bootagg/raster.hpp"

namespace bootagg {

enum class RenderKind { point_estimate, regression_line, bar_chart };

enum class Statistic { mean, median };

// Configuration for the built-in renderers. Only the fields relevant to the
// chosen kind are consulted; validate() checks the kind-independent bounds and
// render time checks the dataset-dependent ones.
struct RenderSpec {
  RenderKind kind = RenderKind::point_estimate;

  // point_estimate
  std::string value_column;
  Statistic statistic = Statistic::mean;

  // regression_line
  std::string x_column;
  std::string y_column;
  int degree = 1;

  // bar_chart: category order is fixed by this list, never by the resample.
  std::string category_column;
  std::vector<std::string> categories;

  Rgb mark_color = kBlack;
  int mark_size = 3;  // disc extent is +/- (mark_size - 1) around the center

  // Background scatter of the full dataset (regression only).
  Rgb scatter_color{160, 160, 160};
  int scatter_size = 2;

  void validate() const;
};

double column_statistic(const Dataset& data, const std::string& column, Statistic stat);

// Least-squares polynomial fit, coefficients in ascending-power order.
// Throws if the system is singular (fewer distinct x values than degree + 1).
std::vector<double> fit_polynomial(const std::vector<double>& xs,
                                   const std::vector<double>& ys, int degree);

double eval_polynomial(const std::vector<double>& coeffs, double x);

// Filled disc without anti-aliasing, clipped to the image. A mark size of 1
// colors exactly the center pixel; size m covers dx*dx + dy*dy < m*m.
void draw_disc(RasterImage& img, PixelCoord center, int mark_size, Rgb color);

RasterImage render_point_estimate(const Dataset& resample, const Dataset& full,
                                  const PlotFrame& frame, const RenderSpec& spec);
RasterImage render_regression_line(const Dataset& resample, const Dataset& full,
                                   const PlotFrame& frame, const RenderSpec& spec);
RasterImage render_bar_chart(const Dataset& resample, const Dataset& full,
                             const PlotFrame& frame, const RenderSpec& spec);

// Dispatch on spec.kind.
RasterImage render_builtin(const Dataset& resample, const Dataset& full,
                           const PlotFrame& frame, const RenderSpec& spec);

}  // namespace bootagg
