#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <istream>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <variant>
#include <vector>

namespace psm {

enum class ColumnKind { Numeric, Categorical, Binary };

std::string_view to_string(ColumnKind kind);

struct NumericColumn {
  std::vector<double> values;
};

// Cells are stored as indices into `levels`.
struct CategoricalColumn {
  std::vector<std::string> levels;
  std::vector<std::uint32_t> codes;
};

struct BinaryColumn {
  std::vector<std::uint8_t> values;
};

class Column {
 public:
  using Data = std::variant<NumericColumn, CategoricalColumn, BinaryColumn>;

  Column(std::string name, Data data);

  const std::string& name() const { return name_; }
  ColumnKind kind() const;
  std::size_t size() const;
  const Data& data() const { return data_; }

  // Throw DataError if the column is of a different kind.
  const NumericColumn& as_numeric() const;
  const CategoricalColumn& as_categorical() const;
  const BinaryColumn& as_binary() const;

  // Numeric and binary columns as doubles.
  std::vector<double> to_doubles() const;

  Column take(std::span<const std::size_t> indices) const;

 private:
  std::string name_;
  Data data_;
};

// Immutable column-oriented table. Every row carries a stable 0-based id
// (its position among the data rows of the source file) that survives
// row filtering and subsetting.
class Dataset {
 public:
  Dataset() = default;
  Dataset(std::vector<Column> columns, std::vector<std::size_t> row_ids);

  std::size_t n_rows() const { return row_ids_.size(); }
  std::span<const std::size_t> row_ids() const { return row_ids_; }
  const std::vector<Column>& columns() const { return columns_; }

  bool has_column(std::string_view name) const;
  const Column& column(std::string_view name) const;

  // Position of a row id, if present.
  std::optional<std::size_t> index_of(std::size_t row_id) const;

  // Copy with `replacement` substituted for the same-named column
  // (appended when no such column exists).
  Dataset with_column(Column replacement) const;

  // Subset by row id, keeping the requested order. Unknown ids throw.
  Dataset select_rows(std::span<const std::size_t> row_ids) const;

 private:
  std::vector<Column> columns_;
  std::vector<std::size_t> row_ids_;
  std::unordered_map<std::size_t, std::size_t> row_index_;
};

struct ColumnSpec {
  std::string name;
  ColumnKind kind;
};

using Schema = std::vector<ColumnSpec>;

// smoker, ban, age, education, afam, hispanic, gender.
Schema smokeban_schema();

struct LoadReport {
  Dataset dataset;
  std::size_t rows_read = 0;
  std::size_t rows_dropped = 0;
  std::size_t empty_cells = 0;
  std::size_t unparseable_cells = 0;
};

// Columns not named in the schema (including an unnamed leading index
// column) are ignored. Rows with an empty or unparseable declared cell
// are dropped and counted. Categorical levels take first-appearance order.
LoadReport load_csv(std::istream& in, const Schema& schema);
LoadReport load_csv(const std::filesystem::path& path, const Schema& schema);

// Replace a two-level categorical column with a binary column:
// treated_level -> 1, the other level -> 0.
Dataset recode_treatment(const Dataset& d, std::string_view column,
                         std::string_view treated_level);

struct LevelCount {
  std::string level;
  std::size_t count = 0;
};

struct NumericSummary {
  std::size_t n = 0;
  double mean = 0.0;
  std::optional<double> sd;  // absent when n < 2
  double min = 0.0;
  double max = 0.0;
};

struct ColumnSummary {
  std::string name;
  ColumnKind kind;
  std::vector<LevelCount> counts;         // categorical and binary
  std::optional<NumericSummary> numeric;  // numeric with n >= 1
};

std::vector<ColumnSummary> summarize(const Dataset& d);

}  // namespace psm
