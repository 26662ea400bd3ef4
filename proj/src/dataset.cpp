#include "bootagg/dataset.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <ostream>
#include <sstream>

namespace bootagg {

bool parse_numeric_cell(const std::string& text, double* value) {
  std::size_t begin = 0;
  std::size_t end = text.size();
  while (begin < end && (text[begin] == ' ' || text[begin] == '\t')) ++begin;
  while (end > begin && (text[end - 1] == ' ' || text[end - 1] == '\t')) --end;
  if (begin == end) return false;
  const std::string token = text.substr(begin, end - begin);
  // strtod accepts hex floats; those are not decimals.
  if (token.find('x') != std::string::npos || token.find('X') != std::string::npos) return false;
  errno = 0;
  char* parse_end = nullptr;
  const double v = std::strtod(token.c_str(), &parse_end);
  if (parse_end != token.c_str() + token.size()) return false;
  if (errno == ERANGE || !std::isfinite(v)) return false;
  if (value) *value = v;
  return true;
}

Dataset::Dataset(std::vector<std::string> column_names,
                 std::vector<std::vector<std::string>> rows)
    : column_names_(std::move(column_names)), rows_(std::move(rows)) {
  for (std::size_t i = 0; i < rows_.size(); ++i) {
    if (rows_[i].size() != column_names_.size()) {
      throw ParseError("Dataset: data row " + std::to_string(i + 1) + " has " +
                       std::to_string(rows_[i].size()) + " cells, expected " +
                       std::to_string(column_names_.size()));
    }
  }
  infer_column_types();
}

void Dataset::infer_column_types() {
  const std::size_t cols = column_names_.size();
  column_types_.assign(cols, ColumnType::text);
  numeric_cache_.assign(cols, {});
  numeric_cache_ready_.assign(cols, false);
  for (std::size_t c = 0; c < cols; ++c) {
    if (rows_.empty()) continue;  // no evidence either way; stay text
    bool all_numeric = true;
    for (const auto& row : rows_) {
      if (!parse_numeric_cell(row[c], nullptr)) {
        all_numeric = false;
        break;
      }
    }
    if (all_numeric) column_types_[c] = ColumnType::numeric;
  }
}

Dataset Dataset::from_numeric_columns(std::vector<std::string> column_names,
                                      const std::vector<std::vector<double>>& columns) {
  if (columns.size() != column_names.size()) {
    throw DomainError("from_numeric_columns: name/column count mismatch");
  }
  const std::size_t n_rows = columns.empty() ? 0 : columns.front().size();
  for (const auto& col : columns) {
    if (col.size() != n_rows) throw DomainError("from_numeric_columns: ragged columns");
  }
  std::vector<std::vector<std::string>> rows(n_rows);
  char buf[64];
  for (std::size_t r = 0; r < n_rows; ++r) {
    rows[r].reserve(columns.size());
    for (const auto& col : columns) {
      std::snprintf(buf, sizeof(buf), "%.17g", col[r]);
      rows[r].emplace_back(buf);
    }
  }
  Dataset ds(std::move(column_names), std::move(rows));
  // Install the exact values; the text form is only for CSV export.
  for (std::size_t c = 0; c < columns.size(); ++c) {
    ds.column_types_[c] = ColumnType::numeric;
    ds.numeric_cache_[c] = columns[c];
    ds.numeric_cache_ready_[c] = true;
  }
  return ds;
}

std::size_t Dataset::column_index(const std::string& name) const {
  for (std::size_t c = 0; c < column_names_.size(); ++c) {
    if (column_names_[c] == name) return c;
  }
  throw DomainError("Dataset: no column named '" + name + "'");
}

const std::vector<double>& Dataset::numeric_column(std::size_t col) const {
  if (col >= column_names_.size()) throw DomainError("Dataset: column index out of range");
  if (column_types_[col] != ColumnType::numeric) {
    throw DomainError("Dataset: column '" + column_names_[col] + "' is not numeric");
  }
  if (!numeric_cache_ready_[col]) {
    std::vector<double> values;
    values.reserve(rows_.size());
    for (const auto& row : rows_) {
      double v = 0.0;
      parse_numeric_cell(row[col], &v);
      values.push_back(v);
    }
    numeric_cache_[col] = std::move(values);
    numeric_cache_ready_[col] = true;
  }
  return numeric_cache_[col];
}

Dataset Dataset::take_rows(const std::vector<std::size_t>& indices) const {
  std::vector<std::vector<std::string>> rows;
  rows.reserve(indices.size());
  for (std::size_t idx : indices) {
    rows.push_back(rows_[idx]);
  }
  Dataset out(column_names_, std::move(rows));
  // Row selection cannot change a column's type; carry the source types so a
  // resample of a numeric column stays numeric even if its text forms would
  // re-infer identically anyway.
  out.column_types_ = column_types_;
  return out;
}

namespace {

void write_csv_cell(std::ostream& out, const std::string& cell) {
  const bool needs_quotes = cell.find_first_of(",\"\r\n") != std::string::npos;
  if (!needs_quotes) {
    out << cell;
    return;
  }
  out << '"';
  for (char ch : cell) {
    if (ch == '"') out << '"';
    out << ch;
  }
  out << '"';
}

}  // namespace

void Dataset::write_csv(std::ostream& out) const {
  for (std::size_t c = 0; c < column_names_.size(); ++c) {
    if (c) out << ',';
    write_csv_cell(out, column_names_[c]);
  }
  out << '\n';
  for (const auto& row : rows_) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) out << ',';
      write_csv_cell(out, row[c]);
    }
    out << '\n';
  }
}

namespace {

// One CSV record; handles quoted fields, escaped quotes, and embedded
// newlines. Returns false at end of input with no record started.
bool read_csv_record(std::istream& in, std::vector<std::string>& fields,
                     std::size_t record_number) {
  fields.clear();
  int ch = in.get();
  if (ch == EOF) return false;

  std::string field;
  bool in_quotes = false;
  bool any_char = false;
  for (;; ch = in.get()) {
    if (ch == EOF) {
      if (in_quotes) {
        throw ParseError("CSV record " + std::to_string(record_number) +
                         ": unterminated quoted field");
      }
      fields.push_back(std::move(field));
      return true;
    }
    any_char = true;
    if (in_quotes) {
      if (ch == '"') {
        if (in.peek() == '"') {
          in.get();
          field.push_back('"');
        } else {
          in_quotes = false;
        }
      } else {
        field.push_back(static_cast<char>(ch));
      }
      continue;
    }
    switch (ch) {
      case '"':
        if (field.empty()) {
          in_quotes = true;
        } else {
          field.push_back('"');  // stray quote mid-field; keep it literal
        }
        break;
      case ',':
        fields.push_back(std::move(field));
        field.clear();
        break;
      case '\r':
        if (in.peek() == '\n') in.get();
        fields.push_back(std::move(field));
        return true;
      case '\n':
        fields.push_back(std::move(field));
        return true;
      default:
        field.push_back(static_cast<char>(ch));
        break;
    }
  }
  (void)any_char;
}

}  // namespace

Dataset load_dataset_csv(std::istream& in) {
  std::vector<std::string> header;
  if (!read_csv_record(in, header, 1)) {
    throw ParseError("CSV: missing header");
  }
  if (header.size() == 1 && header[0].empty()) {
    throw ParseError("CSV: missing header");
  }

  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> record;
  std::size_t record_number = 2;
  while (read_csv_record(in, record, record_number)) {
    if (record.size() == 1 && record[0].empty()) {
      // blank line (commonly a trailing newline); skip
      ++record_number;
      continue;
    }
    if (record.size() != header.size()) {
      throw ParseError("CSV: data row " + std::to_string(rows.size() + 1) + " has " +
                       std::to_string(record.size()) + " fields, expected " +
                       std::to_string(header.size()));
    }
    rows.push_back(record);
    ++record_number;
  }
  return Dataset(std::move(header), std::move(rows));
}

Dataset load_dataset_csv_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open dataset file: " + path);
  return load_dataset_csv(in);
}

std::vector<std::size_t> resample_indices(std::size_t row_count, SeededRng& rng) {
  if (row_count == 0) throw DomainError("bootstrap resample: dataset is empty");
  std::vector<std::size_t> indices(row_count);
  for (std::size_t i = 0; i < row_count; ++i) {
    indices[i] = static_cast<std::size_t>(rng.next_below(row_count));
  }
  return indices;
}

Dataset bootstrap_resample(const Dataset& data, SeededRng& rng) {
  return data.take_rows(resample_indices(data.row_count(), rng));
}

std::vector<Dataset> resample_stream(const Dataset& data, std::size_t n,
                                     const SeededRng& root) {
  if (n < 1) throw DomainError("resample_stream: n must be >= 1");
  if (data.row_count() == 0) throw DomainError("resample_stream: dataset is empty");
  std::vector<Dataset> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    SeededRng rng = root.substream(i);
    out.push_back(bootstrap_resample(data, rng));
  }
  return out;
}

}  // namespace bootagg
