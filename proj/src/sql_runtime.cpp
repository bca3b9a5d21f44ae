#include "normtab/sql_runtime.hpp"

#include <sqlite3.h>

#include <cctype>

#include "normtab/errors.hpp"

namespace normtab {

struct SqlDatabase::Impl {
  sqlite3* db = nullptr;
};

SqlDatabase::SqlDatabase() : impl_(std::make_unique<Impl>()) {
  if (sqlite3_open(":memory:", &impl_->db) != SQLITE_OK) {
    throw EngineError("cannot open in-memory database");
  }
}

SqlDatabase::~SqlDatabase() {
  if (impl_ && impl_->db) sqlite3_close(impl_->db);
}

SqlDatabase::SqlDatabase(SqlDatabase&&) noexcept = default;
SqlDatabase& SqlDatabase::operator=(SqlDatabase&&) noexcept = default;

namespace {

std::string quote_identifier(const std::string& name) {
  std::string out = "\"";
  for (char c : name) {
    if (c == '"') out += "\"\"";
    else out.push_back(c);
  }
  out += "\"";
  return out;
}

const char* sql_type(ColumnType t) {
  switch (t) {
    case ColumnType::integer: return "INTEGER";
    case ColumnType::real: return "REAL";
    case ColumnType::date: return "TEXT";
    case ColumnType::text: return "TEXT";
  }
  return "TEXT";
}

class Statement {
 public:
  Statement(sqlite3* db, const std::string& sql, bool classify_errors = false) {
    const char* tail = nullptr;
    int rc = sqlite3_prepare_v2(db, sql.c_str(), -1, &stmt_, &tail);
    if (rc != SQLITE_OK) {
      std::string msg = sqlite3_errmsg(db);
      if (!classify_errors) throw EngineError(msg);
      if (msg.find("syntax error") != std::string::npos ||
          msg.find("incomplete input") != std::string::npos) {
        throw SqlSyntaxError(msg);
      }
      throw SqlSemanticError(msg);
    }
    if (!stmt_) {
      if (classify_errors) throw SqlSyntaxError("empty statement");
      throw EngineError("empty statement");
    }
    tail_ = tail ? tail : "";
  }
  ~Statement() {
    if (stmt_) sqlite3_finalize(stmt_);
  }
  sqlite3_stmt* get() const { return stmt_; }
  const std::string& tail() const { return tail_; }

 private:
  sqlite3_stmt* stmt_ = nullptr;
  std::string tail_;
};

void exec_simple(sqlite3* db, const std::string& sql) {
  char* err = nullptr;
  if (sqlite3_exec(db, sql.c_str(), nullptr, nullptr, &err) != SQLITE_OK) {
    std::string msg = err ? err : "unknown error";
    sqlite3_free(err);
    throw EngineError(msg + " while executing: " + sql);
  }
}

}  // namespace

void SqlDatabase::load_table(const Table& t, const std::string& relation_name) {
  std::string create = "CREATE TABLE " + quote_identifier(relation_name) + " (";
  for (std::size_t c = 0; c < t.col_count(); ++c) {
    if (c) create += ", ";
    create += quote_identifier(t.columns[c].sql_name);
    create += ' ';
    create += sql_type(t.columns[c].declared_type);
  }
  create += ")";

  exec_simple(impl_->db, "BEGIN");
  try {
    exec_simple(impl_->db, "DROP TABLE IF EXISTS " + quote_identifier(relation_name));
    exec_simple(impl_->db, create);

    std::string insert = "INSERT INTO " + quote_identifier(relation_name) + " VALUES (";
    for (std::size_t c = 0; c < t.col_count(); ++c) {
      if (c) insert += ", ";
      insert += '?';
    }
    insert += ")";
    Statement stmt(impl_->db, insert);
    for (const auto& row : t.rows) {
      for (std::size_t c = 0; c < row.size(); ++c) {
        const CellValue& v = row[c];
        int idx = static_cast<int>(c) + 1;
        if (v.is_null()) {
          sqlite3_bind_null(stmt.get(), idx);
        } else if (v.is_integer()) {
          sqlite3_bind_int64(stmt.get(), idx, v.as_integer());
        } else if (v.is_real()) {
          sqlite3_bind_double(stmt.get(), idx, v.as_real());
        } else {
          std::string text = v.render();
          sqlite3_bind_text(stmt.get(), idx, text.c_str(),
                            static_cast<int>(text.size()), SQLITE_TRANSIENT);
        }
      }
      if (sqlite3_step(stmt.get()) != SQLITE_DONE) {
        throw EngineError(sqlite3_errmsg(impl_->db));
      }
      sqlite3_reset(stmt.get());
    }
    exec_simple(impl_->db, "COMMIT");
  } catch (...) {
    exec_simple(impl_->db, "ROLLBACK");
    throw;
  }
}

QueryResult SqlDatabase::execute(const std::string& sql) const {
  Statement stmt(impl_->db, sql, /*classify_errors=*/true);

  for (char c : stmt.tail()) {
    if (!std::isspace(static_cast<unsigned char>(c)) && c != ';') {
      throw ForbiddenStatementError("multiple statements are not allowed");
    }
  }
  if (!sqlite3_stmt_readonly(stmt.get())) {
    throw ForbiddenStatementError("statement is not read-only");
  }

  QueryResult result;
  int ncols = sqlite3_column_count(stmt.get());
  for (int c = 0; c < ncols; ++c) {
    const char* name = sqlite3_column_name(stmt.get(), c);
    result.columns.push_back(name ? name : "");
  }
  while (true) {
    int rc = sqlite3_step(stmt.get());
    if (rc == SQLITE_DONE) break;
    if (rc != SQLITE_ROW) throw SqlSemanticError(sqlite3_errmsg(impl_->db));
    std::vector<CellValue> row;
    row.reserve(static_cast<std::size_t>(ncols));
    for (int c = 0; c < ncols; ++c) {
      switch (sqlite3_column_type(stmt.get(), c)) {
        case SQLITE_INTEGER:
          row.push_back(CellValue::integer(sqlite3_column_int64(stmt.get(), c)));
          break;
        case SQLITE_FLOAT:
          row.push_back(CellValue::real(sqlite3_column_double(stmt.get(), c)));
          break;
        case SQLITE_NULL:
          row.push_back(CellValue::null());
          break;
        default: {
          const unsigned char* text = sqlite3_column_text(stmt.get(), c);
          int size = sqlite3_column_bytes(stmt.get(), c);
          row.push_back(CellValue::text(
              std::string(reinterpret_cast<const char*>(text), static_cast<std::size_t>(size))));
        }
      }
    }
    result.rows.push_back(std::move(row));
  }
  return result;
}

std::vector<std::string> extract_answer(const QueryResult& r) {
  std::vector<std::string> out;
  if (r.rows.empty()) return out;
  if (r.columns.size() <= 1) {
    for (const auto& row : r.rows) {
      out.push_back(row.empty() ? "" : row[0].render());
    }
    return out;
  }
  for (const auto& row : r.rows) {
    std::string joined;
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) joined += ", ";
      joined += row[c].render();
    }
    out.push_back(std::move(joined));
  }
  return out;
}

}  // namespace normtab
