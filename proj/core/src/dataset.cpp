#include "gower/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>
#include <unordered_map>

#include "gower/error.hpp"
#include "gower/stats.hpp"

namespace gower {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

// Splits one CSV record starting at `pos`; handles double-quoted fields with
// embedded commas, quotes ("") and newlines. Advances `pos` past the record.
std::vector<std::string> next_record(std::string_view text, std::size_t& pos) {
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  bool was_quoted = false;
  while (pos < text.size()) {
    const char c = text[pos];
    if (quoted) {
      if (c == '"') {
        if (pos + 1 < text.size() && text[pos + 1] == '"') {
          field.push_back('"');
          ++pos;
        } else {
          quoted = false;
        }
      } else {
        field.push_back(c);
      }
      ++pos;
      continue;
    }
    if (c == '"') {
      quoted = true;
      was_quoted = true;
      ++pos;
    } else if (c == ',') {
      fields.push_back(was_quoted ? field : std::string(trim(field)));
      field.clear();
      was_quoted = false;
      ++pos;
    } else if (c == '\n') {
      ++pos;
      break;
    } else {
      field.push_back(c);
      ++pos;
    }
  }
  if (quoted) throw DataError("unterminated quoted field");
  fields.push_back(was_quoted ? field : std::string(trim(field)));
  return fields;
}

bool is_missing_token(std::string_view s) { return s.empty() || s == "NA"; }

std::optional<double> parse_number(std::string_view s) {
  double v = 0.0;
  const auto* begin = s.data();
  const auto* end = s.data() + s.size();
  if (!s.empty() && *begin == '+') ++begin;
  const auto [ptr, ec] = std::from_chars(begin, end, v);
  if (ec != std::errc() || ptr != end || !std::isfinite(v)) return std::nullopt;
  return v;
}

std::string format_number(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

std::string csv_escape(std::string_view s) {
  if (s.find_first_of(",\"\n") == std::string_view::npos && s != "NA") return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

void require_ordinal(const DataTable& table, std::size_t t, const char* what) {
  if (table.column_schema(t).kind != ColumnKind::kOrdinal)
    throw Error(std::string(what) + ": column '" + table.column_schema(t).name + "' is not ordinal");
}

}  // namespace

std::string_view kind_name(ColumnKind kind) {
  switch (kind) {
    case ColumnKind::kBinarySymmetric: return "binary-symmetric";
    case ColumnKind::kBinaryAsymmetric: return "binary-asymmetric";
    case ColumnKind::kNominal: return "nominal";
    case ColumnKind::kOrdinal: return "ordinal";
    case ColumnKind::kNumeric: return "numeric";
  }
  return "?";
}

ColumnKind parse_kind(std::string_view text) {
  for (auto k : {ColumnKind::kBinarySymmetric, ColumnKind::kBinaryAsymmetric, ColumnKind::kNominal,
                 ColumnKind::kOrdinal, ColumnKind::kNumeric})
    if (kind_name(k) == text) return k;
  throw Error("unknown column kind '" + std::string(text) + "'");
}

bool is_categorical(ColumnKind kind) { return kind != ColumnKind::kNumeric; }

void ColumnSchema::check() const {
  if (name.empty()) throw Error("column with empty name");
  if (kind == ColumnKind::kNumeric) {
    if (!levels.empty()) throw Error("numeric column '" + name + "' declares levels");
    return;
  }
  if (kind == ColumnKind::kBinarySymmetric || kind == ColumnKind::kBinaryAsymmetric) {
    if (levels.size() != 2)
      throw Error("binary column '" + name + "' must declare exactly 2 levels");
  } else if (levels.empty()) {
    throw Error("categorical column '" + name + "' declares no levels");
  }
  std::set<std::string_view> seen;
  for (const auto& l : levels) {
    if (l.empty()) throw Error("column '" + name + "' has an empty level label");
    if (!seen.insert(l).second)
      throw Error("column '" + name + "' repeats level '" + l + "'");
  }
}

std::optional<std::size_t> ColumnSchema::level_index(std::string_view label) const {
  const auto it = std::find(levels.begin(), levels.end(), label);
  if (it == levels.end()) return std::nullopt;
  return static_cast<std::size_t>(it - levels.begin());
}

Column make_column(std::vector<double> values) {
  Column c;
  c.missing.resize(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) c.missing[i] = std::isnan(values[i]) ? 1 : 0;
  c.values = std::move(values);
  return c;
}

DataTable::DataTable(Schema schema, std::vector<Column> columns)
    : schema_(std::move(schema)), columns_(std::move(columns)) {
  if (schema_.size() != columns_.size()) throw Error("schema/column count mismatch");
  std::set<std::string_view> names;
  for (const auto& s : schema_) {
    s.check();
    if (!names.insert(s.name).second) throw Error("duplicate column name '" + s.name + "'");
  }
  rows_ = columns_.empty() ? 0 : columns_.front().values.size();
  for (std::size_t t = 0; t < columns_.size(); ++t) {
    auto& col = columns_[t];
    if (col.values.size() != rows_ || col.missing.size() != rows_)
      throw Error("column '" + schema_[t].name + "' has inconsistent length");
    for (std::size_t i = 0; i < rows_; ++i) {
      if (col.missing[i]) {
        col.values[i] = kNaN;
        continue;
      }
      const double v = col.values[i];
      if (!std::isfinite(v)) throw DataError("non-finite value in '" + schema_[t].name + "'", i + 1);
      if (is_categorical(schema_[t].kind)) {
        if (v < 0 || v != std::floor(v) || v >= static_cast<double>(schema_[t].levels.size()))
          throw DataError("category code out of range in '" + schema_[t].name + "'", i + 1);
      }
    }
  }
}

std::optional<std::size_t> DataTable::find_column(std::string_view name) const {
  for (std::size_t t = 0; t < schema_.size(); ++t)
    if (schema_[t].name == name) return t;
  return std::nullopt;
}

std::size_t DataTable::column_index(std::string_view name) const {
  if (auto t = find_column(name)) return *t;
  throw Error("no column named '" + std::string(name) + "'");
}

DataTable DataTable::select_rows(std::span<const std::size_t> rows) const {
  std::vector<Column> cols(columns_.size());
  for (std::size_t t = 0; t < columns_.size(); ++t) {
    cols[t].values.reserve(rows.size());
    cols[t].missing.reserve(rows.size());
    for (auto r : rows) {
      cols[t].values.push_back(columns_[t].values.at(r));
      cols[t].missing.push_back(columns_[t].missing.at(r));
    }
  }
  return DataTable(schema_, std::move(cols));
}

DataTable DataTable::select_columns(std::span<const std::string> names) const {
  Schema schema;
  std::vector<Column> cols;
  for (const auto& n : names) {
    const auto t = column_index(n);
    schema.push_back(schema_[t]);
    cols.push_back(columns_[t]);
  }
  return DataTable(std::move(schema), std::move(cols));
}

DataTable load_table(std::string_view csv_text, const Schema& schema) {
  for (const auto& s : schema) s.check();
  std::size_t pos = 0;
  if (csv_text.substr(0, 3) == "\xEF\xBB\xBF") pos = 3;
  if (pos >= csv_text.size()) throw DataError("empty input: missing header row");

  const auto header = next_record(csv_text, pos);
  if (header.size() != schema.size())
    throw DataError("header has " + std::to_string(header.size()) + " columns, schema declares " +
                    std::to_string(schema.size()));
  std::unordered_map<std::string, std::size_t> schema_pos;
  for (std::size_t t = 0; t < schema.size(); ++t) schema_pos.emplace(schema[t].name, t);
  std::vector<std::size_t> field_to_col(header.size());
  std::set<std::size_t> used;
  for (std::size_t f = 0; f < header.size(); ++f) {
    const auto it = schema_pos.find(header[f]);
    if (it == schema_pos.end())
      throw DataError("header column '" + header[f] + "' not declared in schema");
    if (!used.insert(it->second).second)
      throw DataError("header repeats column '" + header[f] + "'");
    field_to_col[f] = it->second;
  }

  std::vector<Column> cols(schema.size());
  std::size_t row = 0;
  while (pos < csv_text.size()) {
    const auto fields = next_record(csv_text, pos);
    if (fields.size() == 1 && fields[0].empty() && pos >= csv_text.size()) break;  // trailing newline
    ++row;
    if (std::all_of(fields.begin(), fields.end(),
                    [](const std::string& f) { return is_missing_token(f); }))
      throw DataError("all values missing", row);
    if (fields.size() != header.size())
      throw DataError("expected " + std::to_string(header.size()) + " fields, found " +
                          std::to_string(fields.size()),
                      row);
    for (std::size_t f = 0; f < fields.size(); ++f) {
      const auto t = field_to_col[f];
      const auto& spec = schema[t];
      const std::string_view cell = fields[f];
      if (is_missing_token(cell)) {
        cols[t].values.push_back(kNaN);
        cols[t].missing.push_back(1);
        continue;
      }
      double v = 0.0;
      if (spec.kind == ColumnKind::kNumeric) {
        const auto parsed = parse_number(cell);
        if (!parsed)
          throw DataError("cannot parse '" + std::string(cell) + "' as a number in '" + spec.name + "'",
                          row);
        v = *parsed;
      } else {
        const auto idx = spec.level_index(cell);
        if (!idx)
          throw DataError("unknown category '" + std::string(cell) + "' in '" + spec.name + "'", row);
        v = static_cast<double>(*idx);
      }
      cols[t].values.push_back(v);
      cols[t].missing.push_back(0);
    }
  }
  return DataTable(schema, std::move(cols));
}

std::string serialize_table(const DataTable& table) {
  std::ostringstream out;
  for (std::size_t t = 0; t < table.cols(); ++t)
    out << (t ? "," : "") << csv_escape(table.column_schema(t).name);
  out << '\n';
  for (std::size_t i = 0; i < table.rows(); ++i) {
    for (std::size_t t = 0; t < table.cols(); ++t) {
      if (t) out << ',';
      if (table.is_missing(i, t)) continue;
      const auto& spec = table.column_schema(t);
      if (spec.kind == ColumnKind::kNumeric)
        out << format_number(table.value(i, t));
      else
        out << csv_escape(spec.levels[table.column(t).code(i)]);
    }
    out << '\n';
  }
  return out.str();
}

double column_range(std::span<const double> values, std::span<const std::uint8_t> missing) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  bool any = false;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (missing[i]) continue;
    any = true;
    lo = std::min(lo, values[i]);
    hi = std::max(hi, values[i]);
  }
  if (!any) throw Error("undefined range: all values missing");
  return hi - lo;
}

double column_range(const DataTable& table, std::size_t t) {
  const auto& spec = table.column_schema(t);
  if (spec.kind != ColumnKind::kNumeric && spec.kind != ColumnKind::kOrdinal)
    throw Error("column_range: column '" + spec.name + "' is not numeric or ordinal");
  const auto& col = table.column(t);
  return column_range(col.values, col.missing);
}

std::vector<double> kr_transform(const DataTable& table, std::size_t t, KrOptions options) {
  require_ordinal(table, t, "kr_transform");
  const auto& spec = table.column_schema(t);
  const auto& col = table.column(t);
  std::set<std::size_t> observed;
  for (std::size_t i = 0; i < table.rows(); ++i)
    if (!col.is_missing(i)) observed.insert(col.code(i));
  if (observed.size() < 2)
    throw Error("kr_transform: column '" + spec.name + "' has fewer than two observed levels");
  // positions are 1-based: o = code + 1
  const double max_position = options.declared_levels ? static_cast<double>(spec.levels.size())
                                                      : static_cast<double>(*observed.rbegin() + 1);
  std::vector<double> z(table.rows(), kNaN);
  for (std::size_t i = 0; i < table.rows(); ++i)
    if (!col.is_missing(i)) z[i] = static_cast<double>(col.code(i)) / (max_position - 1.0);
  return z;
}

std::vector<double> podani_ranks(const DataTable& table, std::size_t t) {
  require_ordinal(table, t, "podani_ranks");
  const auto& col = table.column(t);
  std::vector<double> present;
  for (std::size_t i = 0; i < table.rows(); ++i)
    if (!col.is_missing(i)) present.push_back(col.values[i]);
  if (present.empty())
    throw Error("podani_ranks: column '" + table.column_schema(t).name + "' is empty");
  const auto ranks = average_ranks(present);
  std::vector<double> out(table.rows(), kNaN);
  std::size_t k = 0;
  for (std::size_t i = 0; i < table.rows(); ++i)
    if (!col.is_missing(i)) out[i] = ranks[k++];
  return out;
}

ValidationReport validate(const DataTable& table) {
  ValidationReport report;
  const std::size_t n = table.rows();
  for (std::size_t t = 0; t < table.cols(); ++t) {
    const auto& spec = table.column_schema(t);
    const auto& col = table.column(t);
    ColumnReport cr;
    cr.name = spec.name;
    std::size_t missing = 0;
    std::set<double> distinct;
    for (std::size_t i = 0; i < n; ++i) {
      if (col.is_missing(i))
        ++missing;
      else
        distinct.insert(col.values[i]);
    }
    cr.missing_rate = n ? static_cast<double>(missing) / static_cast<double>(n) : 0.0;
    if (missing == n && n > 0) {
      report.warnings.push_back("column '" + spec.name + "' is entirely missing");
    } else if (spec.kind == ColumnKind::kNumeric) {
      cr.zero_range = distinct.size() == 1;
      if (cr.zero_range) report.warnings.push_back("column '" + spec.name + "' has zero range");
    } else {
      cr.single_level = distinct.size() == 1;
      if (cr.single_level)
        report.warnings.push_back("column '" + spec.name + "' has a single observed level");
    }
    report.columns.push_back(std::move(cr));
  }
  for (std::size_t i = 0; i < n; ++i) {
    bool all = table.cols() > 0;
    for (std::size_t t = 0; t < table.cols() && all; ++t) all = table.is_missing(i, t);
    if (all) {
      report.all_missing_rows.push_back(i + 1);
      report.errors.push_back("row " + std::to_string(i + 1) + ": all values missing");
    }
  }
  return report;
}

}  // namespace gower
