#pragma once

#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "normtab/config.hpp"
#include "normtab/gateway.hpp"
#include "normtab/norm_rules.hpp"

namespace normtab {

/// One scored question or fact outcome.
struct EvalRecord {
  std::string example_id;
  std::string table_id;
  std::vector<std::string> predicted;
  std::variant<std::vector<std::string>, bool> gold;
  std::string sql_text;
  bool verdict = false;
  std::optional<std::string> failure_kind;
};

struct MatchOptions {
  bool prematch = false;        // LLM-assisted equivalence check when strict EM fails
  Gateway* gateway = nullptr;   // required when prematch is set
  DateOrder date_order = DateOrder::month_first;
  DecodeParams prematch_params{0.0, 1.0, 1, 10, 2};
};

/// Normalized multiset comparison: lowercase, trimmed, quote-stripped,
/// numeric equivalence within 1e-6 relative, date equivalence via the date
/// normalizer. Optional LLM pre-matching decides remaining mismatches.
bool exact_match(const std::vector<std::string>& predicted,
                 const std::vector<std::string>& gold,
                 const MatchOptions& options = {});

struct Metrics {
  double accuracy = 0;
  std::size_t n = 0;
  std::map<std::string, std::size_t> failures_by_kind;

  std::string to_json() const;
  std::string to_text() const;
};

Metrics evaluate(const std::vector<EvalRecord>& records);

enum class TableCategory { improved, unchanged, decreased };  // A / B / C

const char* to_string(TableCategory c);

struct CategoryShares {
  std::map<std::string, TableCategory> per_table;
  double improved = 0;
  double unchanged = 0;
  double decreased = 0;
};

/// Compares per-table accuracy between two runs covering identical example
/// ids. Shares are over tables and sum to 1.
CategoryShares categorize_tables(const std::vector<EvalRecord>& before,
                                 const std::vector<EvalRecord>& after);

/// CSV for per-record error analysis.
std::string records_to_csv(const std::vector<EvalRecord>& records);

// ---- normalization audit ---------------------------------------------------

/// One hand-labeled audit fixture (parsed from the audit JSON file).
struct AuditFixture {
  std::string id;
  Table table;
  std::optional<std::vector<std::string>> dirty_columns;
  std::optional<bool> transpose;
  std::optional<bool> aggregate_last_row;
  // expected per-cell outputs, keyed (sql_name, row) -> rendered text
  std::vector<std::tuple<std::string, std::size_t, std::string>> date_number_cells;
  std::vector<std::tuple<std::string, std::size_t, std::string>> missing_cells;
  std::vector<std::tuple<std::string, std::size_t, std::string>> cleaning_cells;
  std::optional<std::vector<std::string>> split_into;  // expected new columns
};

std::vector<AuditFixture> load_audit_fixtures(const std::string& json_text);

struct AuditRow {
  std::string category;
  std::size_t correct = 0;
  std::size_t total = 0;

  double accuracy() const {
    return total == 0 ? 0 : static_cast<double>(correct) / static_cast<double>(total);
  }
};

struct AuditReport {
  std::vector<AuditRow> rows;

  std::string to_text() const;
  std::string to_json() const;
};

/// Runs the offline normalization path over the fixtures and scores each
/// operation category against its hand labels.
AuditReport audit_normalization(const std::vector<AuditFixture>& fixtures,
                                const Config& config = {});

}  // namespace normtab
