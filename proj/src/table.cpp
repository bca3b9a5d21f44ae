#include "normtab/table.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <sstream>
#include <unordered_map>

#include "normtab/errors.hpp"

namespace normtab {

const char* to_string(ColumnType t) {
  switch (t) {
    case ColumnType::text: return "text";
    case ColumnType::integer: return "integer";
    case ColumnType::real: return "real";
    case ColumnType::date: return "date";
  }
  return "text";
}

std::optional<ColumnType> column_type_from_string(std::string_view s) {
  if (s == "text") return ColumnType::text;
  if (s == "integer") return ColumnType::integer;
  if (s == "real") return ColumnType::real;
  if (s == "date") return ColumnType::date;
  return std::nullopt;
}

std::optional<std::size_t> Table::column_index(std::string_view sql_name) const {
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (columns[i].sql_name == sql_name) return i;
  }
  return std::nullopt;
}

std::string sanitize_identifier(std::string_view raw) {
  std::string out;
  out.reserve(raw.size());
  for (char ch : raw) {
    unsigned char c = static_cast<unsigned char>(ch);
    if (std::isalnum(c)) {
      out.push_back(static_cast<char>(std::tolower(c)));
    } else if (!out.empty() && out.back() != '_') {
      out.push_back('_');
    }
  }
  while (!out.empty() && out.back() == '_') out.pop_back();
  if (!out.empty() && std::isdigit(static_cast<unsigned char>(out[0]))) {
    out.insert(0, "c_");
  }
  return out;
}

std::vector<ColumnMeta> make_columns(const std::vector<std::string>& raw_names,
                                     std::vector<std::string>* warnings) {
  std::vector<ColumnMeta> cols;
  cols.reserve(raw_names.size());
  std::set<std::string> used;
  for (const auto& raw : raw_names) {
    std::string base = sanitize_identifier(raw);
    if (base.empty()) {
      base = "col";
      if (warnings) {
        warnings->push_back("header '" + raw + "' sanitized to placeholder 'col'");
      }
    }
    std::string name = base;
    for (int suffix = 2; used.count(name); ++suffix) {
      name = base + "_" + std::to_string(suffix);
      if (suffix == 2 && warnings) {
        warnings->push_back("duplicate header '" + base + "' renamed '" + name + "'");
      }
    }
    used.insert(name);
    cols.push_back(ColumnMeta{raw, name, ColumnType::text});
  }
  return cols;
}

namespace {

bool legal_identifier(const std::string& s) {
  if (s.empty()) return false;
  unsigned char c0 = static_cast<unsigned char>(s[0]);
  if (!(std::islower(c0) || s[0] == '_')) return false;
  return std::all_of(s.begin(), s.end(), [](char ch) {
    unsigned char c = static_cast<unsigned char>(ch);
    return std::islower(c) || std::isdigit(c) || ch == '_';
  });
}

bool cell_admitted(const CellValue& v, ColumnType t) {
  if (v.is_null()) return true;
  switch (t) {
    case ColumnType::text: return true;
    case ColumnType::integer: return v.is_integer();
    case ColumnType::real: return v.is_real();
    case ColumnType::date: return v.is_date();
  }
  return false;
}

}  // namespace

std::vector<std::string> validate(const Table& t) {
  std::vector<std::string> out;
  if (t.columns.empty()) {
    out.push_back("table has no columns");
    return out;
  }
  std::unordered_map<std::string, std::size_t> seen;
  for (std::size_t i = 0; i < t.columns.size(); ++i) {
    const auto& c = t.columns[i];
    if (!legal_identifier(c.sql_name)) {
      out.push_back("column " + std::to_string(i) + " sql_name '" + c.sql_name +
                    "' is not a legal identifier");
    }
    auto [it, inserted] = seen.emplace(c.sql_name, i);
    if (!inserted) {
      out.push_back("columns " + std::to_string(it->second) + " and " +
                    std::to_string(i) + " share sql_name '" + c.sql_name + "'");
    }
  }
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    if (t.rows[r].size() != t.columns.size()) {
      out.push_back("row " + std::to_string(r) + " has " +
                    std::to_string(t.rows[r].size()) + " cells, expected " +
                    std::to_string(t.columns.size()));
      continue;
    }
    for (std::size_t c = 0; c < t.columns.size(); ++c) {
      if (!cell_admitted(t.rows[r][c], t.columns[c].declared_type)) {
        out.push_back("row " + std::to_string(r) + ", column " + std::to_string(c) +
                      " holds a value not admitted by declared type '" +
                      to_string(t.columns[c].declared_type) + "'");
      }
    }
  }
  return out;
}

Table transpose(const Table& t, std::vector<std::string>* warnings) {
  if (t.rows.empty()) throw EmptyTableError("transpose: table has no rows");

  std::vector<std::string> raw_names;
  raw_names.reserve(1 + t.row_count());
  std::string corner = t.columns.empty() ? "" : t.columns[0].raw_name;
  if (sanitize_identifier(corner).empty()) {
    corner = "attribute";
    if (warnings) warnings->push_back("transpose: synthesized header 'attribute' for the former header column");
  }
  raw_names.push_back(corner);
  for (const auto& row : t.rows) raw_names.push_back(row[0].render());

  Table out;
  out.title = t.title;
  out.source_id = t.source_id;
  out.columns = make_columns(raw_names, warnings);
  out.rows.reserve(t.col_count() - 1);
  for (std::size_t i = 1; i < t.col_count(); ++i) {
    std::vector<CellValue> row;
    row.reserve(1 + t.row_count());
    row.push_back(CellValue::text(t.columns[i].raw_name));
    for (std::size_t j = 0; j < t.row_count(); ++j) row.push_back(t.rows[j][i]);
    out.rows.push_back(std::move(row));
  }
  return out;
}

Table project_columns(const Table& t, const std::vector<std::string>& names) {
  if (names.empty()) throw Error("project_columns: empty column list");
  std::vector<std::size_t> indices;
  indices.reserve(names.size());
  for (const auto& name : names) {
    auto idx = t.column_index(name);
    if (!idx) throw UnknownColumnError("project_columns: unknown column '" + name + "'");
    indices.push_back(*idx);
  }
  Table out;
  out.title = t.title;
  out.source_id = t.source_id;
  for (auto i : indices) out.columns.push_back(t.columns[i]);
  out.rows.reserve(t.row_count());
  for (const auto& row : t.rows) {
    std::vector<CellValue> r;
    r.reserve(indices.size());
    for (auto i : indices) r.push_back(row[i]);
    out.rows.push_back(std::move(r));
  }
  return out;
}

Table merge_columns(const Table& left, const Table& right) {
  if (left.row_count() != right.row_count()) {
    throw RowCountMismatchError("merge_columns: left has " +
                                std::to_string(left.row_count()) + " rows, right has " +
                                std::to_string(right.row_count()));
  }
  Table out;
  out.title = left.title.empty() ? right.title : left.title;
  out.source_id = left.source_id.empty() ? right.source_id : left.source_id;
  out.columns = left.columns;
  std::set<std::string> used;
  for (const auto& c : out.columns) used.insert(c.sql_name);
  for (const auto& c : right.columns) {
    ColumnMeta m = c;
    for (int suffix = 2; used.count(m.sql_name); ++suffix) {
      m.sql_name = c.sql_name + "_" + std::to_string(suffix);
    }
    used.insert(m.sql_name);
    out.columns.push_back(std::move(m));
  }
  out.rows.reserve(left.row_count());
  for (std::size_t i = 0; i < left.row_count(); ++i) {
    std::vector<CellValue> row = left.rows[i];
    row.insert(row.end(), right.rows[i].begin(), right.rows[i].end());
    out.rows.push_back(std::move(row));
  }
  return out;
}

Table drop_last_row(const Table& t) {
  if (t.rows.empty()) throw EmptyTableError("drop_last_row: table has no rows");
  Table out = t;
  out.rows.pop_back();
  return out;
}

std::string escape_cell(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '\\': out += "\\\\"; break;
      case '|': out += "\\|"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

std::string unescape_cell(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '\\' && i + 1 < s.size()) {
      char next = s[++i];
      switch (next) {
        case 'n': out.push_back('\n'); break;
        case 'r': out.push_back('\r'); break;
        default: out.push_back(next);
      }
    } else {
      out.push_back(s[i]);
    }
  }
  return out;
}

std::string render_pipe_row(const std::vector<std::string>& cells) {
  std::string out = "|";
  for (const auto& c : cells) {
    out += ' ';
    out += escape_cell(c);
    out += " |";
  }
  return out;
}

bool is_pipe_row(std::string_view line) {
  auto pos = line.find_first_not_of(" \t");
  return pos != std::string_view::npos && line[pos] == '|';
}

bool is_separator_row(std::string_view line) {
  bool saw_dash = false;
  for (char c : line) {
    if (c == '-' || c == ':') {
      saw_dash = true;
    } else if (c != '|' && c != ' ' && c != '\t') {
      return false;
    }
  }
  return saw_dash;
}

std::vector<std::string> split_pipe_row(std::string_view line) {
  auto begin = line.find_first_not_of(" \t");
  auto end = line.find_last_not_of(" \t\r");
  if (begin == std::string_view::npos) return {};
  line = line.substr(begin, end - begin + 1);
  if (!line.empty() && line.front() == '|') line.remove_prefix(1);
  if (!line.empty() && line.back() == '|') {
    // only treat the trailing pipe as a border if it is not escaped
    std::size_t backslashes = 0;
    for (std::size_t i = line.size() - 1; i-- > 0 && line[i] == '\\';) ++backslashes;
    if (backslashes % 2 == 0) line.remove_suffix(1);
  }

  std::vector<std::string> raw_fields;
  std::string field;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '\\' && i + 1 < line.size()) {
      field.push_back(line[i]);
      field.push_back(line[i + 1]);
      ++i;
    } else if (line[i] == '|') {
      raw_fields.push_back(field);
      field.clear();
    } else {
      field.push_back(line[i]);
    }
  }
  raw_fields.push_back(field);

  std::vector<std::string> out;
  out.reserve(raw_fields.size());
  for (auto& f : raw_fields) {
    std::string_view v = f;
    if (!v.empty() && v.front() == ' ') v.remove_prefix(1);
    if (!v.empty() && v.back() == ' ') v.remove_suffix(1);
    out.push_back(unescape_cell(v));
  }
  return out;
}

namespace {

std::string render_header_and_rows(const Table& t, std::size_t limit) {
  std::vector<std::string> headers;
  headers.reserve(t.col_count());
  for (const auto& c : t.columns) headers.push_back(c.sql_name);
  std::vector<std::string> dashes(t.col_count(), "---");

  std::ostringstream out;
  out << render_pipe_row(headers) << '\n' << render_pipe_row(dashes) << '\n';
  std::size_t n = std::min(limit, t.row_count());
  for (std::size_t r = 0; r < n; ++r) {
    std::vector<std::string> cells;
    cells.reserve(t.col_count());
    for (const auto& v : t.rows[r]) cells.push_back(v.render());
    out << render_pipe_row(cells) << '\n';
  }
  return out.str();
}

}  // namespace

std::string sample_header_rows(const Table& t, std::size_t k) {
  return "Title: " + t.title + "\n" + render_header_and_rows(t, k);
}

std::string serialize_table(const Table& t) {
  return render_header_and_rows(t, t.row_count());
}

}  // namespace normtab
