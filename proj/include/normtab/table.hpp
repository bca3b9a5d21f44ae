#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "normtab/cell.hpp"

namespace normtab {

enum class ColumnType { text, integer, real, date };

const char* to_string(ColumnType t);
std::optional<ColumnType> column_type_from_string(std::string_view s);

/// Column metadata: the header as ingested plus a SQL-safe identifier.
struct ColumnMeta {
  std::string raw_name;
  std::string sql_name;
  ColumnType declared_type = ColumnType::text;

  bool operator==(const ColumnMeta&) const = default;
};

/// Rectangular grid of typed cells with column metadata and provenance.
struct Table {
  std::string title;
  std::string source_id;
  std::vector<ColumnMeta> columns;
  std::vector<std::vector<CellValue>> rows;

  std::size_t col_count() const { return columns.size(); }
  std::size_t row_count() const { return rows.size(); }
  std::optional<std::size_t> column_index(std::string_view sql_name) const;
  const CellValue& cell(std::size_t row, std::size_t col) const {
    return rows[row][col];
  }
};

/// Lowercase, non-alphanumerics to '_', repeats collapsed, trailing '_'
/// trimmed, 'c_' prefixed when the result starts with a digit. Empty input
/// sanitizes to "" (callers substitute a placeholder).
std::string sanitize_identifier(std::string_view raw);

/// Builds column metadata from raw header names: sanitized sql_names, made
/// unique by suffixing _2, _3, ... Collisions and placeholder substitutions
/// are appended to `warnings` when given.
std::vector<ColumnMeta> make_columns(const std::vector<std::string>& raw_names,
                                     std::vector<std::string>* warnings = nullptr);

/// Empty list iff all Table and ColumnMeta invariants hold.
std::vector<std::string> validate(const Table& t);

/// Flips rows and columns. The first column supplies the new headers; the
/// former header row becomes the first output column (named after the old
/// first column, or "attribute" when that name is degenerate).
Table transpose(const Table& t, std::vector<std::string>* warnings = nullptr);

/// Columns in the order given by `names`; rows preserved.
Table project_columns(const Table& t, const std::vector<std::string>& names);

/// Row-wise concatenation: row i of output = row i of left ++ row i of right.
Table merge_columns(const Table& left, const Table& right);

Table drop_last_row(const Table& t);

/// Pipe-delimited rendering of title line, header line, separator, and the
/// first min(k, rows) data rows.
std::string sample_header_rows(const Table& t, std::size_t k);

/// Full pipe-delimited rendering: header, separator, all rows.
std::string serialize_table(const Table& t);

// Pipe-row helpers shared with the gateway's table parser.
std::string escape_cell(std::string_view s);
std::string unescape_cell(std::string_view s);
std::string render_pipe_row(const std::vector<std::string>& cells);
std::vector<std::string> split_pipe_row(std::string_view line);
bool is_pipe_row(std::string_view line);
bool is_separator_row(std::string_view line);

}  // namespace normtab
