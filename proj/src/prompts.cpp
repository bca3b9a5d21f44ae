#include <algorithm>
#include <cctype>
#include <map>
#include <sstream>

#include "normtab/errors.hpp"
#include "normtab/gateway.hpp"
#include "normtab/table.hpp"

namespace normtab {

namespace {

Table mini_table(std::string title, std::vector<std::string> header,
                 std::vector<std::vector<std::string>> rows) {
  Table t;
  t.title = std::move(title);
  t.columns = make_columns(header);
  for (auto& row : rows) {
    std::vector<CellValue> cells;
    cells.reserve(row.size());
    for (auto& c : row) cells.push_back(CellValue::text(std::move(c)));
    t.rows.push_back(std::move(cells));
  }
  return t;
}

struct ColumnSelectDemo {
  Table table;
  std::string answer;
};

const std::vector<ColumnSelectDemo>& column_select_demos() {
  static const std::vector<ColumnSelectDemo> demos = [] {
    std::vector<ColumnSelectDemo> d;
    d.push_back({mini_table("1995 home games",
                            {"date", "opponent", "attendance"},
                            {{"September 10, 1995", "eagles", "12,345"},
                             {"October 1, 1995", "jets", "9,876"}}),
                 "date, attendance"});
    d.push_back({mini_table("league table",
                            {"club", "played", "points"},
                            {{"arsenal", "38", "89"}, {"chelsea", "38", "83"}}),
                 "none"});
    d.push_back({mini_table("cup results",
                            {"round", "result", "venue"},
                            {{"1", "won 2-1", "home"}, {"2", "lost 0-3", "away"}}),
                 "result"});
    d.push_back({mini_table("season summary",
                            {"season", "wins", "losses"},
                            {{"2010/11", "20", "14"}, {"2011/12", "25", "9"}}),
                 "season"});
    d.push_back({mini_table("prize money",
                            {"year", "winner", "prize"},
                            {{"1999", "hingis", "$1,000,000"}, {"2000", "davenport", "n/a"}}),
                 "prize"});
    d.push_back({mini_table("film releases",
                            {"title", "released", "gross"},
                            {{"alien", "5/25/1979", "104,931,801"},
                             {"aliens", "7/18/1986", "131,060,248"}}),
                 "released, gross"});
    return d;
  }();
  return demos;
}

std::string join_names(const std::vector<std::string>& names) {
  std::string out;
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (i) out += ", ";
    out += names[i];
  }
  return out;
}

}  // namespace

std::string render_column_select_prompt(const Table& t, std::size_t k_rows) {
  std::ostringstream p;
  p << "You prepare web tables for SQL analysis. Decide which columns need "
       "normalization: dates not in YYYY-MM-DD form, numbers carrying thousands "
       "separators, currency symbols, units or footnotes, N/A or blank markers, "
       "year ranges like 2010/11, and composite cells packing several values into "
       "one field.\n"
       "Answer with a comma-separated list of column names, or none.\n\n";
  std::size_t i = 1;
  for (const auto& demo : column_select_demos()) {
    p << "Example " << i++ << ":\n"
      << sample_header_rows(demo.table, 3) << "Columns: " << demo.answer << "\n\n";
  }
  p << "Table:\n" << sample_header_rows(t, k_rows) << "Columns:";
  return p.str();
}

std::string render_transpose_prompt(const Table& t) {
  std::ostringstream p;
  p << "Decide whether this table is transposed: its first column serves as the "
       "header while the first row lists entities. Answer yes when rows and "
       "columns must be flipped to get a conventional table, no otherwise.\n\n";
  Table demo = mini_table("club statistics",
                          {"statistic", "2019", "2020", "2021"},
                          {{"wins", "10", "12", "9"},
                           {"losses", "4", "2", "7"},
                           {"goals scored", "31", "40", "28"}});
  p << "Example:\n" << sample_header_rows(demo, 3) << "Transpose: yes\n\n";
  p << "Table:\n" << sample_header_rows(t, 5) << "Transpose:";
  return p.str();
}

std::string render_normalize_prompt(const Table& sub) {
  std::ostringstream p;
  p << "Normalize this table so every cell holds one atomic value:\n"
       "- split composite cells into separate columns placed right after their "
       "source column, adding new columns as needed; never delete an existing "
       "column\n"
       "- write dates as YYYY-MM-DD\n"
       "- write numbers bare, removing thousands separators, currency symbols, "
       "units and footnote markers\n"
       "- replace N/A, blank and dash markers with NULL by leaving the cell "
       "empty\n"
       "- split year ranges like 2010/11 or 2015-2018 into <column>_start and "
       "<column>_end\n"
       "Keep every row in its original order.\n\n";
  Table dirty = mini_table("matches",
                           {"date", "result", "attendance"},
                           {{"May 3, 2011", "won 2-1", "41,592"},
                            {"May 10, 2011", "lost 0-3", "n/a"}});
  Table clean = mini_table("matches",
                           {"date", "result_type", "result_score", "attendance"},
                           {{"2011-05-03", "won", "2-1", "41592"},
                            {"2011-05-10", "lost", "0-3", ""}});
  p << "Example input:\n" << serialize_table(dirty)
    << "Example output:\n" << serialize_table(clean) << "\n";
  p << "Return only the table in the same pipe format: one header line, then "
       "exactly " << sub.row_count() << " rows.\n\n";
  p << "Title: " << sub.title << "\n" << serialize_table(sub) << "Normalized:";
  return p.str();
}

std::string render_normalize_retry_prompt(const std::string& previous_prompt,
                                          const std::string& reason) {
  return previous_prompt +
         "\n\nYour previous reply was rejected: " + reason +
         "\nReturn only the pipe-format table, nothing else.";
}

namespace {

std::string sql_task_header() {
  return "You write one SQLite query against a table named w. Use only columns "
         "from the header. Return only SQL.\n\n";
}

std::string sql_demos() {
  std::ostringstream p;
  Table cities = mini_table("city populations",
                            {"city", "country", "population"},
                            {{"oslo", "norway", "709037"},
                             {"bergen", "norway", "291940"},
                             {"stavanger", "norway", "144877"}});
  p << "Example:\n" << sample_header_rows(cities, 3)
    << "Question: which city has the largest population?\n"
    << "SQL: SELECT city FROM w ORDER BY population DESC LIMIT 1\n\n";
  Table races = mini_table("1961 season",
                           {"race", "winner", "points"},
                           {{"monaco", "moss", "9"},
                            {"zandvoort", "von trips", "9"},
                            {"spa", "hill", "8"}});
  p << "Example:\n" << sample_header_rows(races, 3)
    << "Question: how many races did moss win?\n"
    << "SQL: SELECT COUNT(*) FROM w WHERE winner = 'moss'\n\n";
  return p.str();
}

std::string fact_demos() {
  std::ostringstream p;
  Table cities = mini_table("city populations",
                            {"city", "country", "population"},
                            {{"oslo", "norway", "709037"},
                             {"bergen", "norway", "291940"},
                             {"stavanger", "norway", "144877"}});
  p << "Example:\n" << sample_header_rows(cities, 3)
    << "Statement: oslo has a larger population than bergen\n"
    << "SQL: SELECT COUNT(*) FROM w WHERE city = 'oslo' AND population > (SELECT "
       "population FROM w WHERE city = 'bergen')\n\n";
  p << "Example:\n" << sample_header_rows(cities, 3)
    << "Statement: all three cities are in norway\n"
    << "SQL: SELECT COUNT(*) = 3 FROM w WHERE country = 'norway'\n\n";
  return p.str();
}

}  // namespace

std::string render_sql_prompt(const Table& t, const std::string& question,
                              std::size_t k_rows) {
  std::ostringstream p;
  p << sql_task_header() << sql_demos();
  p << sample_header_rows(t, k_rows) << "Question: " << question << "\nSQL:";
  return p.str();
}

std::string render_fact_sql_prompt(const Table& t, const std::string& statement,
                                   std::size_t k_rows) {
  std::ostringstream p;
  p << "You verify a statement about a table named w with one SQLite query. "
       "Write a query whose result is a non-zero value or a non-empty row set "
       "exactly when the statement is true, and zero or empty otherwise. Return "
       "only SQL.\n\n"
    << fact_demos();
  p << sample_header_rows(t, k_rows) << "Statement: " << statement << "\nSQL:";
  return p.str();
}

std::string render_sql_repair_prompt(const std::string& previous_prompt,
                                     const std::string& sql,
                                     const std::string& error) {
  return previous_prompt + " " + sql +
         "\n\nThat query failed with: " + error +
         "\nReturn a corrected SQLite query, and only the query.\nSQL:";
}

std::string render_prematch_prompt(const std::vector<std::string>& predicted,
                                   const std::vector<std::string>& gold) {
  std::ostringstream p;
  p << "Decide whether two answers to the same question denote the same "
       "value(s), ignoring formatting differences. Reply yes or no.\n\n"
       "Example:\nA: 1,000\nB: 1000\nSame: yes\n\n"
       "Example:\nA: paris\nB: london\nSame: no\n\n"
    << "A: " << join_names(predicted) << "\nB: " << join_names(gold) << "\nSame:";
  return p.str();
}

// ---- parsers ---------------------------------------------------------------

namespace {

std::string trim_copy(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return std::string(s);
}

std::string lower_copy(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

}  // namespace

std::vector<std::string> parse_column_list(const std::string& raw_response,
                                           const Table& t,
                                           std::vector<std::string>* warnings) {
  std::string text = raw_response;
  // drop a leading label like "Columns:"
  auto colon = text.find(':');
  if (colon != std::string::npos && colon < 20) {
    std::string label = lower_copy(text.substr(0, colon));
    if (label.find("column") != std::string::npos) text = text.substr(colon + 1);
  }

  std::vector<std::string> tokens;
  std::string token;
  for (char c : text) {
    if (c == ',' || c == '\n' || c == ';') {
      tokens.push_back(token);
      token.clear();
    } else {
      token.push_back(c);
    }
  }
  tokens.push_back(token);

  std::vector<bool> selected(t.col_count(), false);
  for (auto& tok : tokens) {
    std::string cleaned = trim_copy(tok);
    while (!cleaned.empty() &&
           (cleaned.front() == '`' || cleaned.front() == '"' || cleaned.front() == '\'')) {
      cleaned.erase(cleaned.begin());
    }
    while (!cleaned.empty() &&
           (cleaned.back() == '`' || cleaned.back() == '"' || cleaned.back() == '\'' ||
            cleaned.back() == '.')) {
      cleaned.pop_back();
    }
    if (cleaned.empty()) continue;
    std::string lower = lower_copy(cleaned);
    if (lower == "none" || lower == "no columns") continue;

    bool matched = false;
    for (std::size_t c = 0; c < t.col_count(); ++c) {
      if (lower == lower_copy(t.columns[c].raw_name) ||
          lower == t.columns[c].sql_name ||
          sanitize_identifier(cleaned) == t.columns[c].sql_name) {
        selected[c] = true;
        matched = true;
        break;
      }
    }
    if (!matched && warnings) {
      warnings->push_back("column selection: unknown column '" + cleaned + "' ignored");
    }
  }

  std::vector<std::string> out;
  for (std::size_t c = 0; c < t.col_count(); ++c) {
    if (selected[c]) out.push_back(t.columns[c].sql_name);
  }
  return out;
}

Table parse_table_text(const std::string& raw_response, std::size_t expected_cols,
                       std::size_t expected_rows) {
  std::vector<std::string> lines;
  {
    std::string line;
    std::istringstream in(raw_response);
    while (std::getline(in, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      lines.push_back(line);
    }
  }

  std::vector<std::string> table_lines;
  bool started = false;
  for (const auto& line : lines) {
    if (is_pipe_row(line)) {
      table_lines.push_back(line);
      started = true;
    } else if (started) {
      break;  // prose after the table ends it
    }
  }
  if (table_lines.empty()) {
    throw UnparseableError("no pipe-format table found in response");
  }

  auto header = split_pipe_row(table_lines[0]);
  if (header.size() < expected_cols) {
    throw ColumnShrunkError("response has " + std::to_string(header.size()) +
                            " columns, expected at least " +
                            std::to_string(expected_cols));
  }

  Table t;
  t.columns = make_columns(header);
  std::size_t start = 1;
  if (table_lines.size() > 1 && is_separator_row(table_lines[1])) start = 2;
  for (std::size_t i = start; i < table_lines.size(); ++i) {
    auto cells = split_pipe_row(table_lines[i]);
    if (cells.size() > header.size()) {
      throw UnparseableError("row " + std::to_string(i - start) + " has " +
                             std::to_string(cells.size()) + " cells under " +
                             std::to_string(header.size()) + " headers");
    }
    std::vector<CellValue> row;
    row.reserve(header.size());
    for (std::size_t c = 0; c < header.size(); ++c) {
      if (c < cells.size() && !cells[c].empty()) {
        row.push_back(CellValue::text(cells[c]));
      } else {
        row.push_back(CellValue::null());
      }
    }
    t.rows.push_back(std::move(row));
  }
  if (t.row_count() != expected_rows) {
    throw RowCountMismatchError("response has " + std::to_string(t.row_count()) +
                                " rows, expected " + std::to_string(expected_rows));
  }
  return t;
}

std::optional<bool> parse_yes_no(const std::string& raw_response) {
  std::string lower = lower_copy(raw_response);
  // word-boundary search for the earliest yes/no/true/false
  std::size_t best_pos = std::string::npos;
  bool best_value = false;
  auto consider = [&](std::string_view word, bool value) {
    std::size_t pos = 0;
    while ((pos = lower.find(word, pos)) != std::string::npos) {
      bool left_ok = pos == 0 || !std::isalpha(static_cast<unsigned char>(lower[pos - 1]));
      std::size_t after = pos + word.size();
      bool right_ok =
          after >= lower.size() || !std::isalpha(static_cast<unsigned char>(lower[after]));
      if (left_ok && right_ok) {
        if (pos < best_pos) {
          best_pos = pos;
          best_value = value;
        }
        return;
      }
      ++pos;
    }
  };
  consider("yes", true);
  consider("no", false);
  consider("true", true);
  consider("false", false);
  if (best_pos == std::string::npos) return std::nullopt;
  return best_value;
}

std::optional<std::string> extract_sql(const std::string& raw_response) {
  auto fence = raw_response.find("```");
  if (fence != std::string::npos) {
    auto body_start = fence + 3;
    auto line_end = raw_response.find('\n', body_start);
    if (line_end != std::string::npos) {
      std::string tag = lower_copy(
          trim_copy(raw_response.substr(body_start, line_end - body_start)));
      if (tag.empty() || tag == "sql" || tag == "sqlite") body_start = line_end + 1;
    }
    auto close = raw_response.find("```", body_start);
    if (close != std::string::npos) {
      std::string sql = trim_copy(raw_response.substr(body_start, close - body_start));
      if (!sql.empty()) return sql;
    }
  }

  std::istringstream in(raw_response);
  std::string line;
  std::string sql;
  bool collecting = false;
  while (std::getline(in, line)) {
    std::string trimmed = trim_copy(line);
    if (!collecting) {
      std::string lower = lower_copy(trimmed);
      if (lower.rfind("sql:", 0) == 0) {
        trimmed = trim_copy(trimmed.substr(4));
        lower = lower_copy(trimmed);
      }
      if (lower.rfind("select", 0) == 0 || lower.rfind("with", 0) == 0) {
        collecting = true;
        sql = trimmed;
      }
    } else {
      if (trimmed.empty() || trimmed.rfind("```", 0) == 0) break;
      sql += "\n" + trimmed;
    }
    if (collecting && !sql.empty() && sql.back() == ';') break;
  }
  if (sql.empty()) return std::nullopt;
  return sql;
}

}  // namespace normtab
