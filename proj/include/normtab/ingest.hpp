#pragma once

#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "normtab/table.hpp"

namespace normtab {

enum class QaTask { qa, fact };

const char* to_string(QaTask t);

/// One question or fact-verification example from a manifest.
struct QaExample {
  std::string id;
  std::string table_id;
  std::string utterance;
  QaTask task = QaTask::qa;
  std::vector<std::string> gold_answers;  // task == qa
  bool gold_label = false;                // task == fact
};

struct IngestResult {
  Table table;
  std::vector<std::string> warnings;
};

/// RFC-4180-style delimited text; all cells ingested as Text. Ragged rows
/// padded with Null (short) or truncated (long), reported in warnings.
IngestResult parse_delimited(std::string_view bytes, char delimiter = ',',
                             bool has_title_line = false);

/// {"title": optional, "header": [...], "rows": [[...], ...]} with string cells.
Table parse_json_table(std::string_view bytes);

/// Line-delimited JSON records {id, table_id, utterance, gold}. Order
/// preserved; any bad line rejects the whole load.
std::vector<QaExample> load_qa_manifest(std::string_view bytes, QaTask task);

/// CSV with sanitized headers; Date cells ISO; Null as empty field.
void write_table(const Table& t, const std::string& path);

std::string render_csv(const Table& t);

// small file helpers shared across modules
std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view content);

/// Loads a table from a .csv or .json file, setting source_id from the stem.
/// When `retype` is set, cells are re-inferred (ints, reals, ISO dates, empty
/// fields to Null) — the loading mode for already-normalized tables.
Table load_table_file(const std::string& path, bool retype = false);

}  // namespace normtab
