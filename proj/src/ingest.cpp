#include "normtab/ingest.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "normtab/errors.hpp"
#include "normtab/norm_rules.hpp"

namespace normtab {

using nlohmann::json;

const char* to_string(QaTask t) {
  return t == QaTask::qa ? "qa" : "fact";
}

namespace {

// Replaces ill-formed UTF-8 sequences with U+FFFD.
std::string sanitize_utf8(std::string_view bytes, std::size_t* replaced) {
  std::string out;
  out.reserve(bytes.size());
  std::size_t i = 0;
  auto bad = [&]() {
    out += "\xEF\xBF\xBD";
    if (replaced) ++*replaced;
  };
  while (i < bytes.size()) {
    unsigned char c = static_cast<unsigned char>(bytes[i]);
    std::size_t len = c < 0x80 ? 1 : (c >> 5) == 0x6 ? 2 : (c >> 4) == 0xE ? 3 : (c >> 3) == 0x1E ? 4 : 0;
    if (len == 0 || i + len > bytes.size()) {
      bad();
      ++i;
      continue;
    }
    bool ok = true;
    for (std::size_t k = 1; k < len; ++k) {
      if ((static_cast<unsigned char>(bytes[i + k]) >> 6) != 0x2) ok = false;
    }
    if (!ok) {
      bad();
      ++i;
      continue;
    }
    out.append(bytes.substr(i, len));
    i += len;
  }
  return out;
}

// One pass over RFC-4180-style text: quoted fields may contain the
// delimiter, doubled quotes, and newlines.
std::vector<std::vector<std::string>> parse_csv_records(std::string_view text,
                                                        char delimiter) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string field;
  bool in_quotes = false;
  bool field_started = false;
  bool record_started = false;

  auto end_field = [&]() {
    record.push_back(std::move(field));
    field.clear();
    field_started = false;
  };
  auto end_record = [&]() {
    end_field();
    records.push_back(std::move(record));
    record.clear();
    record_started = false;
  };

  for (std::size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        field.push_back(c);
      }
      continue;
    }
    if (c == '"' && !field_started) {
      in_quotes = true;
      field_started = true;
      record_started = true;
    } else if (c == delimiter) {
      end_field();
      record_started = true;
    } else if (c == '\n') {
      if (record_started || field_started || !field.empty()) end_record();
    } else if (c == '\r') {
      // swallowed; \r\n handled by the \n branch
    } else {
      field.push_back(c);
      field_started = true;
      record_started = true;
    }
  }
  if (record_started || field_started || !field.empty()) end_record();
  return records;
}

}  // namespace

IngestResult parse_delimited(std::string_view bytes, char delimiter,
                             bool has_title_line) {
  if (bytes.empty()) throw EmptyInputError("parse_delimited: empty input");

  IngestResult result;
  std::size_t replaced = 0;
  std::string text = sanitize_utf8(bytes, &replaced);
  if (replaced > 0) {
    result.warnings.push_back(std::to_string(replaced) +
                              " invalid UTF-8 sequence(s) replaced");
  }

  auto records = parse_csv_records(text, delimiter);
  std::size_t first = 0;
  if (has_title_line) {
    if (records.empty()) throw NoHeaderError("parse_delimited: no header after title");
    std::string title;
    for (std::size_t i = 0; i < records[0].size(); ++i) {
      if (i) title += delimiter;
      title += records[0][i];
    }
    result.table.title = title;
    first = 1;
  }
  if (first >= records.size()) {
    throw NoHeaderError("parse_delimited: no header line");
  }
  const auto& header = records[first];
  if (header.empty() || (header.size() == 1 && header[0].empty())) {
    throw NoHeaderError("parse_delimited: empty header line");
  }
  result.table.columns = make_columns(header, &result.warnings);

  std::size_t width = header.size();
  for (std::size_t r = first + 1; r < records.size(); ++r) {
    auto& rec = records[r];
    std::vector<CellValue> row;
    row.reserve(width);
    if (rec.size() != width) {
      result.warnings.push_back("row " + std::to_string(r - first - 1) + " has " +
                                std::to_string(rec.size()) + " fields, expected " +
                                std::to_string(width) +
                                (rec.size() < width ? " (padded)" : " (truncated)"));
    }
    for (std::size_t c = 0; c < width; ++c) {
      if (c < rec.size()) {
        row.push_back(CellValue::text(std::move(rec[c])));
      } else {
        row.push_back(CellValue::null());
      }
    }
    result.table.rows.push_back(std::move(row));
  }
  return result;
}

Table parse_json_table(std::string_view bytes) {
  json doc;
  try {
    doc = json::parse(bytes);
  } catch (const json::exception& e) {
    throw SchemaError(std::string("parse_json_table: invalid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw SchemaError("parse_json_table: root must be an object");
  if (!doc.contains("header")) throw SchemaError("parse_json_table: missing key 'header'");
  if (!doc.contains("rows")) throw SchemaError("parse_json_table: missing key 'rows'");
  if (!doc["header"].is_array() || doc["header"].empty()) {
    throw SchemaError("parse_json_table: 'header' must be a non-empty array");
  }
  if (!doc["rows"].is_array()) throw SchemaError("parse_json_table: 'rows' must be an array");

  Table t;
  if (doc.contains("title")) {
    if (!doc["title"].is_string()) throw SchemaError("parse_json_table: 'title' must be a string");
    t.title = doc["title"].get<std::string>();
  }
  std::vector<std::string> header;
  for (const auto& h : doc["header"]) {
    if (!h.is_string()) throw SchemaError("parse_json_table: 'header' entries must be strings");
    header.push_back(h.get<std::string>());
  }
  t.columns = make_columns(header);

  std::size_t idx = 0;
  for (const auto& row : doc["rows"]) {
    if (!row.is_array()) throw SchemaError("parse_json_table: 'rows' entries must be arrays");
    if (row.size() != header.size()) {
      throw RaggedRowsError("parse_json_table: row " + std::to_string(idx) + " has " +
                            std::to_string(row.size()) + " cells, expected " +
                            std::to_string(header.size()));
    }
    std::vector<CellValue> cells;
    cells.reserve(row.size());
    for (const auto& cell : row) {
      if (!cell.is_string()) {
        throw SchemaError("parse_json_table: cells must be strings (row " +
                          std::to_string(idx) + ")");
      }
      cells.push_back(CellValue::text(cell.get<std::string>()));
    }
    t.rows.push_back(std::move(cells));
    ++idx;
  }
  return t;
}

std::vector<QaExample> load_qa_manifest(std::string_view bytes, QaTask task) {
  std::vector<QaExample> out;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= bytes.size()) {
    auto end = bytes.find('\n', start);
    if (end == std::string_view::npos) end = bytes.size();
    std::string_view line = bytes.substr(start, end - start);
    start = end + 1;
    ++line_no;
    if (line.empty() || line == "\r") continue;

    json rec;
    try {
      rec = json::parse(line);
    } catch (const json::exception& e) {
      throw SchemaError("manifest line " + std::to_string(line_no) + ": invalid JSON: " +
                        e.what());
    }
    auto require_string = [&](const char* key) -> std::string {
      if (!rec.contains(key) || !rec[key].is_string()) {
        throw SchemaError("manifest line " + std::to_string(line_no) +
                          ": missing string field '" + key + "'");
      }
      return rec[key].get<std::string>();
    };

    QaExample ex;
    ex.id = require_string("id");
    ex.table_id = require_string("table_id");
    ex.utterance = require_string("utterance");
    ex.task = task;
    if (!rec.contains("gold")) {
      throw SchemaError("manifest line " + std::to_string(line_no) +
                        ": missing field 'gold'");
    }
    const json& gold = rec["gold"];
    if (task == QaTask::qa) {
      if (!gold.is_array() || gold.empty()) {
        throw SchemaError("manifest line " + std::to_string(line_no) +
                          ": qa gold must be a non-empty array");
      }
      for (const auto& g : gold) {
        if (!g.is_string()) {
          throw SchemaError("manifest line " + std::to_string(line_no) +
                            ": qa gold entries must be strings");
        }
        ex.gold_answers.push_back(g.get<std::string>());
      }
    } else {
      if (gold.is_string() && (gold == "1" || gold == "0")) {
        ex.gold_label = gold == "1";
      } else if (gold.is_number_integer() && (gold == 1 || gold == 0)) {
        ex.gold_label = gold == 1;
      } else if (gold.is_boolean()) {
        ex.gold_label = gold.get<bool>();
      } else {
        throw SchemaError("manifest line " + std::to_string(line_no) +
                          ": fact gold must be \"1\" or \"0\"");
      }
    }
    out.push_back(std::move(ex));
  }
  return out;
}

namespace {

bool needs_csv_quoting(const std::string& s, char delimiter) {
  if (s.empty()) return false;
  if (s.front() == ' ' || s.back() == ' ') return true;
  return s.find_first_of(std::string{delimiter, '"', '\n', '\r'}) != std::string::npos;
}

void append_csv_field(std::string& out, const std::string& field, char delimiter) {
  if (!needs_csv_quoting(field, delimiter)) {
    out += field;
    return;
  }
  out.push_back('"');
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
}

}  // namespace

std::string render_csv(const Table& t) {
  std::string out;
  for (std::size_t c = 0; c < t.col_count(); ++c) {
    if (c) out.push_back(',');
    append_csv_field(out, t.columns[c].sql_name, ',');
  }
  out.push_back('\n');
  for (const auto& row : t.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) out.push_back(',');
      append_csv_field(out, row[c].render(), ',');
    }
    out.push_back('\n');
  }
  return out;
}

void write_table(const Table& t, const std::string& path) {
  write_file(path, render_csv(t));
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write file: " + path);
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw Error("write failed: " + path);
}

Table load_table_file(const std::string& path, bool retype) {
  std::string bytes = read_file(path);
  std::filesystem::path p(path);
  Table t;
  if (p.extension() == ".json") {
    t = parse_json_table(bytes);
  } else {
    t = parse_delimited(bytes, ',', false).table;
  }
  t.source_id = p.stem().string();
  if (retype) {
    for (auto& row : t.rows) {
      for (auto& cell : row) {
        if (cell.is_text()) cell = infer_cell(cell.as_text());
      }
    }
    retype_columns(t);
  }
  return t;
}

}  // namespace normtab
