#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include "bootagg/errors.hpp"
#include "bootagg/rng.hpp"

namespace bootagg {

enum class ColumnType { numeric, text };

/// Immutable tabular dataset: ordered columns, ordered rows, cells stored as
/// the original text. A column is numeric iff every cell parses as a finite
/// decimal; mixed columns stay text. Numeric values are cached per column.
class Dataset {
public:
  Dataset() = default;
  Dataset(std::vector<std::string> column_names,
          std::vector<std::vector<std::string>> rows);

  /// Build from numeric columns; cells get a round-trippable text form and
  /// the numeric cache holds the exact input values.
  static Dataset from_numeric_columns(std::vector<std::string> column_names,
                                      const std::vector<std::vector<double>>& columns);

  const std::vector<std::string>& column_names() const { return column_names_; }
  std::size_t row_count() const { return rows_.size(); }
  std::size_t column_count() const { return column_names_.size(); }

  const std::string& cell(std::size_t row, std::size_t col) const {
    return rows_[row][col];
  }
  const std::vector<std::vector<std::string>>& rows() const { return rows_; }
  ColumnType column_type(std::size_t col) const { return column_types_[col]; }
  ColumnType column_type(const std::string& name) const {
    return column_types_[column_index(name)];
  }

  /// Index of a named column; throws DomainError if absent.
  std::size_t column_index(const std::string& name) const;

  /// Parsed values of a numeric column; throws DomainError on text columns.
  const std::vector<double>& numeric_column(std::size_t col) const;
  const std::vector<double>& numeric_column(const std::string& name) const {
    return numeric_column(column_index(name));
  }

  /// Dataset with the same columns whose rows are rows_[indices[i]].
  Dataset take_rows(const std::vector<std::size_t>& indices) const;

  void write_csv(std::ostream& out) const;

private:
  void infer_column_types();

  std::vector<std::string> column_names_;
  std::vector<std::vector<std::string>> rows_;
  std::vector<ColumnType> column_types_;
  mutable std::vector<std::vector<double>> numeric_cache_;
  mutable std::vector<bool> numeric_cache_ready_;
};

/// True if the cell text parses completely as a finite decimal number.
bool parse_numeric_cell(const std::string& text, double* value);

/// Parse comma-separated text with a header row (RFC-4180 quoting, UTF-8).
/// Throws ParseError with row/column location on malformed input.
Dataset load_dataset_csv(std::istream& in);
Dataset load_dataset_csv_file(const std::string& path);

/// One nonparametric bootstrap resample: row_count rows drawn uniformly with
/// replacement. Deterministic given the rng state.
Dataset bootstrap_resample(const Dataset& data, SeededRng& rng);

/// n independent resamples; resample i is a pure function of (root seed, i),
/// so parallel and sequential generation agree.
std::vector<Dataset> resample_stream(const Dataset& data, std::size_t n,
                                     const SeededRng& root);

/// The row indices that resample i would draw. Shared by bootstrap_resample
/// and resample_stream; exposed so callers can recompute a replicate's
/// statistics without materializing the dataset.
std::vector<std::size_t> resample_indices(std::size_t row_count, SeededRng& rng);

}  // namespace bootagg
