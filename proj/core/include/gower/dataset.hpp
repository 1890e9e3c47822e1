#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace gower {

enum class ColumnKind { kBinarySymmetric, kBinaryAsymmetric, kNominal, kOrdinal, kNumeric };

std::string_view kind_name(ColumnKind kind);
ColumnKind parse_kind(std::string_view text);
bool is_categorical(ColumnKind kind);

/// One column declaration. Categorical kinds carry their level labels; for
/// binary-asymmetric the second level is the "presence" state.
struct ColumnSchema {
  std::string name;
  ColumnKind kind = ColumnKind::kNumeric;
  std::vector<std::string> levels;

  /// Throws gower::Error when the declaration is malformed.
  void check() const;
  std::optional<std::size_t> level_index(std::string_view label) const;

  bool operator==(const ColumnSchema&) const = default;
};

using Schema = std::vector<ColumnSchema>;

/// Column-oriented storage. Categorical cells hold the level index as a
/// double (exact for any realistic level count); numeric cells hold the
/// value. Missing cells hold NaN in `values` and 1 in `missing`.
struct Column {
  std::vector<double> values;
  std::vector<std::uint8_t> missing;

  bool is_missing(std::size_t row) const { return missing[row] != 0; }
  std::size_t code(std::size_t row) const { return static_cast<std::size_t>(values[row]); }
};

/// Parses the schema file format: one `name = kind [levels: ...]` entry per
/// line; ordinal levels are separated by '<', other kinds by ','. Blank
/// lines and lines starting with '#' are ignored.
Schema parse_schema(std::string_view text);
std::string format_schema(const Schema& schema);

/// Typed table; immutable once built.
class DataTable {
 public:
  DataTable() = default;
  /// Validates shape and category codes. All-missing rows are not rejected
  /// here; load_table and validate() take care of them.
  DataTable(Schema schema, std::vector<Column> columns);

  const Schema& schema() const noexcept { return schema_; }
  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return schema_.size(); }
  const Column& column(std::size_t t) const { return columns_.at(t); }
  const ColumnSchema& column_schema(std::size_t t) const { return schema_.at(t); }
  std::optional<std::size_t> find_column(std::string_view name) const;
  std::size_t column_index(std::string_view name) const;  // throws when absent

  bool is_missing(std::size_t row, std::size_t t) const { return columns_[t].is_missing(row); }
  double value(std::size_t row, std::size_t t) const { return columns_[t].values[row]; }

  DataTable select_rows(std::span<const std::size_t> rows) const;
  DataTable select_columns(std::span<const std::string> names) const;

 private:
  Schema schema_;
  std::vector<Column> columns_;
  std::size_t rows_ = 0;
};

/// Parses CSV text under a schema. Header names must match the schema names
/// (any order; output follows schema order). Empty fields and "NA" are
/// missing. Rows with every cell missing are rejected.
DataTable load_table(std::string_view csv_text, const Schema& schema);

/// Writes the table back as CSV; numbers use shortest round-trip formatting.
std::string serialize_table(const DataTable& table);

/// Builds a column from raw values; NaN marks a missing cell.
Column make_column(std::vector<double> values);

/// max - min over non-missing cells of a numeric column.
double column_range(const DataTable& table, std::size_t t);
double column_range(std::span<const double> values, std::span<const std::uint8_t> missing);

struct KrOptions {
  // Use the declared level count for max(o) instead of the largest observed
  // position.
  bool declared_levels = false;
};

/// Kaufman-Rousseeuw position transform z = (o - 1) / (max(o) - 1) for an
/// ordinal column. Missing cells stay NaN.
std::vector<double> kr_transform(const DataTable& table, std::size_t t, KrOptions options = {});

/// Average ranks of an ordinal column over its non-missing cells; NaN for
/// missing cells.
std::vector<double> podani_ranks(const DataTable& table, std::size_t t);

struct ColumnReport {
  std::string name;
  double missing_rate = 0.0;
  bool zero_range = false;
  bool single_level = false;
};

struct ValidationReport {
  std::vector<ColumnReport> columns;
  std::vector<std::string> warnings;
  std::vector<std::string> errors;
  std::vector<std::size_t> all_missing_rows;  // 1-based

  bool clean() const { return warnings.empty() && errors.empty(); }
  bool fatal() const { return !errors.empty(); }
};

ValidationReport validate(const DataTable& table);

}  // namespace gower
