#include "bootagg/render.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>

#include "bootagg/errors.hpp"

namespace bootagg {

void RenderSpec::validate() const {
  if (mark_size < 1) throw DomainError("mark size must be >= 1");
  if (scatter_size < 1) throw DomainError("scatter size must be >= 1");
  switch (kind) {
    case RenderKind::point_estimate:
      if (value_column.empty()) throw DomainError("point estimate needs a value column");
      break;
    case RenderKind::regression_line:
      if (x_column.empty() || y_column.empty())
        throw DomainError("regression needs x and y columns");
      if (degree < 0) throw DomainError("polynomial degree must be >= 0");
      break;
    case RenderKind::bar_chart:
      if (category_column.empty()) throw DomainError("bar chart needs a category column");
      if (categories.empty()) throw DomainError("bar chart needs a fixed category list");
      break;
  }
}

double column_statistic(const Dataset& data, const std::string& column, Statistic stat) {
  const std::vector<double>& vals = data.numeric_column(column);
  if (vals.empty()) throw DomainError("cannot compute a statistic of an empty column");
  if (stat == Statistic::mean) {
    double sum = 0.0;
    for (double v : vals) sum += v;
    return sum / static_cast<double>(vals.size());
  }
  std::vector<double> sorted = vals;
  std::sort(sorted.begin(), sorted.end());
  size_t n = sorted.size();
  if (n % 2 == 1) return sorted[n / 2];
  return 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
}

std::vector<double> fit_polynomial(const std::vector<double>& xs,
                                   const std::vector<double>& ys, int degree) {
  if (degree < 0) throw DomainError("polynomial degree must be >= 0");
  if (xs.size() != ys.size()) throw DomainError("x and y lengths differ");
  size_t distinct = std::set<double>(xs.begin(), xs.end()).size();
  const int terms = degree + 1;
  if (distinct < static_cast<size_t>(terms)) {
    char buf[128];
    std::snprintf(buf, sizeof(buf),
                  "singular fit: degree %d needs %d distinct x values, got %zu", degree,
                  terms, distinct);
    throw DomainError(buf);
  }

  // Normal equations A c = b with A[j][k] = sum x^(j+k), b[j] = sum y x^j.
  std::vector<double> moments(2 * terms - 1, 0.0);
  std::vector<double> b(terms, 0.0);
  for (size_t i = 0; i < xs.size(); ++i) {
    double p = 1.0;
    for (int j = 0; j < 2 * terms - 1; ++j) {
      moments[j] += p;
      if (j < terms) b[j] += ys[i] * p;
      p *= xs[i];
    }
  }
  std::vector<std::vector<double>> a(terms, std::vector<double>(terms));
  for (int j = 0; j < terms; ++j)
    for (int k = 0; k < terms; ++k) a[j][k] = moments[j + k];

  // Gaussian elimination with partial pivoting.
  for (int col = 0; col < terms; ++col) {
    int pivot = col;
    for (int r = col + 1; r < terms; ++r)
      if (std::fabs(a[r][col]) > std::fabs(a[pivot][col])) pivot = r;
    if (std::fabs(a[pivot][col]) < 1e-300) {
      char buf[128];
      std::snprintf(buf, sizeof(buf),
                    "singular fit: degree %d needs %d distinct x values, got %zu", degree,
                    terms, distinct);
      throw DomainError(buf);
    }
    std::swap(a[col], a[pivot]);
    std::swap(b[col], b[pivot]);
    for (int r = col + 1; r < terms; ++r) {
      double f = a[r][col] / a[col][col];
      for (int k = col; k < terms; ++k) a[r][k] -= f * a[col][k];
      b[r] -= f * b[col];
    }
  }
  std::vector<double> coeffs(terms, 0.0);
  for (int r = terms - 1; r >= 0; --r) {
    double s = b[r];
    for (int k = r + 1; k < terms; ++k) s -= a[r][k] * coeffs[k];
    coeffs[r] = s / a[r][r];
  }
  return coeffs;
}

double eval_polynomial(const std::vector<double>& coeffs, double x) {
  double y = 0.0;
  for (size_t i = coeffs.size(); i-- > 0;) y = y * x + coeffs[i];
  return y;
}

void draw_disc(RasterImage& img, PixelCoord center, int mark_size, Rgb color) {
  const std::int64_t r = mark_size - 1;
  const std::int64_t rr = static_cast<std::int64_t>(mark_size) * mark_size;
  for (std::int64_t dy = -r; dy <= r; ++dy) {
    for (std::int64_t dx = -r; dx <= r; ++dx) {
      if (dx * dx + dy * dy < rr)
        img.set_pixel_clipped(center.col + dx, center.row + dy, color);
    }
  }
}

namespace {

void draw_scatter(RasterImage& img, const PlotFrame& frame, const Dataset& data,
                  const RenderSpec& spec) {
  const std::vector<double>& xs = data.numeric_column(spec.x_column);
  const std::vector<double>& ys = data.numeric_column(spec.y_column);
  for (size_t i = 0; i < xs.size(); ++i)
    draw_disc(img, frame.data_to_pixel(xs[i], ys[i]), spec.scatter_size,
              spec.scatter_color);
}

}  // namespace

RasterImage render_point_estimate(const Dataset& resample, const Dataset& /*full*/,
                                  const PlotFrame& frame, const RenderSpec& spec) {
  frame.validate();
  spec.validate();
  double stat = column_statistic(resample, spec.value_column, spec.statistic);
  RasterImage img(frame.width, frame.height, frame.background);
  draw_disc(img, frame.data_to_pixel(stat, 0.0), spec.mark_size, spec.mark_color);
  return img;
}

RasterImage render_regression_line(const Dataset& resample, const Dataset& full,
                                   const PlotFrame& frame, const RenderSpec& spec) {
  frame.validate();
  spec.validate();
  RasterImage img(frame.width, frame.height, frame.background);
  draw_scatter(img, frame, full, spec);

  std::vector<double> coeffs = fit_polynomial(resample.numeric_column(spec.x_column),
                                              resample.numeric_column(spec.y_column),
                                              spec.degree);

  // One sample per pixel column, adjacent samples joined by a vertical run so
  // the curve has no gaps. The run spans (previous row, current row].
  bool have_prev = false;
  std::int64_t prev_row = 0;
  for (std::int64_t col = 0; col < frame.width; ++col) {
    double y = eval_polynomial(coeffs, frame.col_to_x(col));
    if (!std::isfinite(y)) {
      have_prev = false;
      continue;
    }
    std::int64_t row = frame.data_to_pixel(frame.col_to_x(col), y).row;
    std::int64_t lo = row, hi = row;
    if (have_prev && prev_row != row) {
      if (prev_row < row)
        lo = prev_row + 1;
      else
        hi = prev_row - 1;
    }
    for (std::int64_t r = std::max<std::int64_t>(lo, 0);
         r <= std::min<std::int64_t>(hi, frame.height - 1); ++r)
      img.set_pixel(col, r, spec.mark_color);
    prev_row = row;
    have_prev = true;
  }
  return img;
}

RasterImage render_bar_chart(const Dataset& resample, const Dataset& full,
                             const PlotFrame& frame, const RenderSpec& spec) {
  frame.validate();
  spec.validate();
  size_t cat_idx = resample.column_index(spec.category_column);
  size_t full_idx = full.column_index(spec.category_column);

  std::set<std::string> domain;
  for (const auto& row : full.rows()) domain.insert(row[full_idx]);
  for (const std::string& cat : spec.categories) {
    if (!domain.count(cat))
      throw DomainError("category \"" + cat + "\" not present in the dataset");
  }

  RasterImage img(frame.width, frame.height, frame.background);
  if (resample.row_count() == 0) return img;

  const std::int64_t w = frame.width;
  const std::int64_t h = frame.height;
  const std::int64_t k = static_cast<std::int64_t>(spec.categories.size());
  for (std::int64_t i = 0; i < k; ++i) {
    std::int64_t count = 0;
    for (const auto& row : resample.rows())
      if (row[cat_idx] == spec.categories[static_cast<size_t>(i)]) ++count;
    double freq =
        static_cast<double>(count) / static_cast<double>(resample.row_count());

    // Equal slots across the width, a tenth of the slot as margin on each side.
    std::int64_t slot_lo = std::llround(static_cast<double>(i) * w / k);
    std::int64_t slot_hi = std::llround(static_cast<double>(i + 1) * w / k);
    std::int64_t margin = (slot_hi - slot_lo) / 10;
    std::int64_t bar_h = std::llround(freq * static_cast<double>(h));
    if (bar_h > h) bar_h = h;
    for (std::int64_t col = slot_lo + margin; col < slot_hi - margin; ++col)
      for (std::int64_t row = h - bar_h; row < h; ++row)
        img.set_pixel(col, row, spec.mark_color);
  }
  return img;
}

RasterImage render_builtin(const Dataset& resample, const Dataset& full,
                           const PlotFrame& frame, const RenderSpec& spec) {
  switch (spec.kind) {
    case RenderKind::point_estimate:
      return render_point_estimate(resample, full, frame, spec);
    case RenderKind::regression_line:
      return render_regression_line(resample, full, frame, spec);
    case RenderKind::bar_chart:
      return render_bar_chart(resample, full, frame, spec);
  }
  throw DomainError("unknown render kind");
}

}  // namespace bootagg
