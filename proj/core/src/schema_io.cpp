#include <set>
#include <sstream>

#include "gower/dataset.hpp"
#include "gower/error.hpp"

namespace gower {
namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    const auto at = s.find(sep, start);
    parts.push_back(trim(s.substr(start, at == std::string_view::npos ? s.npos : at - start)));
    if (at == std::string_view::npos) break;
    start = at + 1;
  }
  return parts;
}

}  // namespace

Schema parse_schema(std::string_view text) {
  Schema schema;
  std::set<std::string> names;
  std::size_t line_no = 0;
  std::istringstream in{std::string(text)};
  std::string raw;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    const auto where = " (schema line " + std::to_string(line_no) + ")";

    const auto eq = line.find('=');
    if (eq == std::string::npos) throw Error("expected 'name = kind'" + where);
    ColumnSchema col;
    col.name = trim(std::string_view(line).substr(0, eq));
    std::string rest = trim(std::string_view(line).substr(eq + 1));

    const auto bracket = rest.find('[');
    std::string kind_text = trim(std::string_view(rest).substr(0, bracket));
    try {
      col.kind = parse_kind(kind_text);
    } catch (const Error& e) {
      throw Error(e.what() + where);
    }
    if (bracket != std::string::npos) {
      const auto close = rest.rfind(']');
      if (close == std::string::npos || close < bracket) throw Error("unterminated '['" + where);
      std::string body = trim(std::string_view(rest).substr(bracket + 1, close - bracket - 1));
      const std::string tag = "levels:";
      if (body.compare(0, tag.size(), tag) != 0) throw Error("expected 'levels:'" + where);
      body = trim(std::string_view(body).substr(tag.size()));
      const char sep = col.kind == ColumnKind::kOrdinal ? '<' : ',';
      col.levels = split(body, sep);
    }
    try {
      col.check();
    } catch (const Error& e) {
      throw Error(e.what() + where);
    }
    if (!names.insert(col.name).second) throw Error("duplicate column '" + col.name + "'" + where);
    schema.push_back(std::move(col));
  }
  if (schema.empty()) throw Error("schema declares no columns");
  return schema;
}

std::string format_schema(const Schema& schema) {
  std::ostringstream out;
  for (const auto& col : schema) {
    out << col.name << " = " << kind_name(col.kind);
    if (!col.levels.empty()) {
      out << " [levels: ";
      const char* sep = col.kind == ColumnKind::kOrdinal ? " < " : ", ";
      for (std::size_t i = 0; i < col.levels.size(); ++i) out << (i ? sep : "") << col.levels[i];
      out << ']';
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace gower
