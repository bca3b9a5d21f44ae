#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "normtab/table.hpp"

namespace normtab {

enum class DateOrder { month_first, day_first };

/// Recognized textual dates mapped to a valid calendar date; anything
/// unrecognized (or not a real calendar day) is NoParse, never a guess.
std::optional<Date> normalize_date(std::string_view s,
                                   DateOrder order = DateOrder::month_first);

struct NumberParse {
  CellValue value;      // Integer or Real
  std::string stripped; // currency symbols, units, footnote markers removed
};

/// Thousands separators removed; leading currency symbols and trailing
/// units/footnotes stripped into `stripped`. NoParse unless exactly one
/// numeric token remains.
std::optional<NumberParse> normalize_number(std::string_view s);

/// Case-insensitive {"n/a","na","-","—",""} after trim.
bool is_missing_marker(std::string_view s);

struct YearRange {
  std::int64_t start = 0;
  std::int64_t end = 0;
};

/// "Y1-Y2" / "Y1/Y2" with 4-digit Y1; 2-digit Y2 expands in Y1's century,
/// rolling over one century when needed. end >= start always.
std::optional<YearRange> split_range(std::string_view s);

/// How to split one composite column into atomic parts.
struct SplitSpec {
  enum class Kind { delimiter, prefix_suffix };
  enum class Suffix { score, number };

  Kind kind = Kind::prefix_suffix;
  std::string delimiter;            // Kind::delimiter
  Suffix suffix_shape = Suffix::score;
  std::size_t parts = 2;
  // appended to the parent sql_name per part; "" keeps the parent name
  std::vector<std::string> name_suffixes;
};

/// Column-level inference: a spec matched by at least `min_share` of the
/// non-missing cells, or nullopt.
std::optional<SplitSpec> infer_split_spec(const std::vector<std::string>& cells,
                                          double min_share);

/// Deterministic split; non-matching cells yield the original string plus
/// Nulls. Output size == spec.parts.
std::vector<CellValue> split_composite(std::string_view s, const SplitSpec& spec);

enum class ColumnIssue {
  non_iso_date,
  formatted_number,
  na_or_blank,
  value_range,
  composite,
  extraneous_text,
};

const char* to_string(ColumnIssue issue);

struct ColumnDiagnosis {
  std::string sql_name;
  std::set<ColumnIssue> issues;

  bool needs_normalization() const { return !issues.empty(); }
};

/// Flags an issue when >= `threshold` of the column's non-missing cells
/// trigger the detector (missing markers are measured over all cells).
std::vector<ColumnDiagnosis> diagnose_columns(const Table& t,
                                              double threshold = 0.3,
                                              DateOrder order = DateOrder::month_first);

/// true iff any cell of the last row, lowercased and trimmed, begins with
/// total/sum/average/overall/all.
bool detect_aggregate_row(const Table& t);

enum class Orientation { row_oriented, column_oriented, uncertain };

const char* to_string(Orientation o);

Orientation detect_orientation(const Table& t,
                               DateOrder order = DateOrder::month_first);

/// Parses text into the most specific cell value whose rendering round-trips
/// back to the input (so retyping never changes written output). Empty text
/// becomes Null; tokens in `null_tokens` (e.g. "NULL") become Null.
CellValue infer_cell(std::string_view text,
                     const std::set<std::string>& null_tokens = {});

/// Sets each column's declared_type to the homogeneous cell type, text
/// otherwise.
void retype_columns(Table& t);

struct RulesOptions {
  DateOrder date_order = DateOrder::month_first;
  double split_apply_threshold = 0.6;
  bool map_null_tokens = true;  // literal "NULL"/"null" cells become Null
};

struct RulesNormalizeResult {
  Table table;
  std::vector<std::string> notes;  // stripped units, split decisions, ...
};

/// Offline normalizer: applies the deterministic value rules to the named
/// columns (all columns when `columns` is empty), splitting ranges and
/// composites into new columns inserted after their parent.
RulesNormalizeResult normalize_table_rules(const Table& t,
                                           const std::vector<std::string>& columns,
                                           const RulesOptions& opt = {});

}  // namespace normtab
