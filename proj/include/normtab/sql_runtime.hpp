#pragma once

#include <memory>
#include <string>
#include <vector>

#include "normtab/table.hpp"

namespace normtab {

struct QueryResult {
  std::vector<std::string> columns;
  std::vector<std::vector<CellValue>> rows;

  std::size_t row_count() const { return rows.size(); }
};

/// In-memory SQLite database holding loaded tables. One instance per worker;
/// not shared across threads.
class SqlDatabase {
 public:
  SqlDatabase();
  ~SqlDatabase();
  SqlDatabase(const SqlDatabase&) = delete;
  SqlDatabase& operator=(const SqlDatabase&) = delete;
  SqlDatabase(SqlDatabase&&) noexcept;
  SqlDatabase& operator=(SqlDatabase&&) noexcept;

  /// Creates the relation with columns typed from declared_type; Null cells
  /// stored as engine NULLs. An existing relation of the same name is
  /// replaced atomically.
  void load_table(const Table& t, const std::string& relation_name = "w");

  /// Executes one read-only statement. Writes and DDL are rejected before
  /// execution (ForbiddenStatement).
  QueryResult execute(const std::string& sql) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Single cell -> one string; one column -> list in row order; many columns
/// -> row tuples joined by ", "; empty result -> empty list.
std::vector<std::string> extract_answer(const QueryResult& r);

}  // namespace normtab
