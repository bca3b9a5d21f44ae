#include "normtab/evaluator.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "normtab/errors.hpp"
#include "normtab/ingest.hpp"

namespace normtab {

using nlohmann::json;

namespace {

std::string normalize_answer(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  if (s.size() >= 2 && ((s.front() == '"' && s.back() == '"') ||
                        (s.front() == '\'' && s.back() == '\''))) {
    s = s.substr(1, s.size() - 2);
  }
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::optional<double> as_number(const std::string& s, DateOrder) {
  auto n = normalize_number(s);
  if (!n || !n->stripped.empty()) return std::nullopt;
  return n->value.is_integer() ? static_cast<double>(n->value.as_integer())
                               : n->value.as_real();
}

bool equivalent(const std::string& a, const std::string& b, DateOrder order) {
  std::string na = normalize_answer(a);
  std::string nb = normalize_answer(b);
  if (na == nb) return true;
  auto va = as_number(na, order);
  auto vb = as_number(nb, order);
  if (va && vb) {
    double scale = std::max({1.0, std::abs(*va), std::abs(*vb)});
    return std::abs(*va - *vb) <= 1e-6 * scale;
  }
  auto da = normalize_date(na, order);
  auto db = normalize_date(nb, order);
  if (da && db) return *da == *db;
  return false;
}

}  // namespace

bool exact_match(const std::vector<std::string>& predicted,
                 const std::vector<std::string>& gold, const MatchOptions& options) {
  bool matched = false;
  if (predicted.size() == gold.size()) {
    std::vector<bool> used(gold.size(), false);
    matched = true;
    for (const auto& p : predicted) {
      bool found = false;
      for (std::size_t i = 0; i < gold.size(); ++i) {
        if (!used[i] && equivalent(p, gold[i], options.date_order)) {
          used[i] = true;
          found = true;
          break;
        }
      }
      if (!found) {
        matched = false;
        break;
      }
    }
  }
  if (matched || !options.prematch || options.gateway == nullptr ||
      predicted.empty()) {
    return matched;
  }
  std::string response = options.gateway->complete(
      PromptRole::prematch, render_prematch_prompt(predicted, gold),
      options.prematch_params);
  return parse_yes_no(response).value_or(false);
}

std::string Metrics::to_json() const {
  json j;
  j["accuracy"] = accuracy;
  j["n"] = n;
  j["failures_by_kind"] = failures_by_kind;
  return j.dump(2) + "\n";
}

std::string Metrics::to_text() const {
  std::ostringstream out;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", accuracy);
  out << "accuracy  " << buf << "\n";
  out << "n         " << n << "\n";
  for (const auto& [kind, count] : failures_by_kind) {
    out << "failure   " << kind << " = " << count << "\n";
  }
  return out.str();
}

Metrics evaluate(const std::vector<EvalRecord>& records) {
  if (records.empty()) throw EmptyInputError("evaluate: no records");
  Metrics m;
  m.n = records.size();
  std::size_t correct = 0;
  for (const auto& r : records) {
    if (r.verdict) ++correct;
    if (r.failure_kind) ++m.failures_by_kind[*r.failure_kind];
  }
  m.accuracy = static_cast<double>(correct) / static_cast<double>(m.n);
  return m;
}

const char* to_string(TableCategory c) {
  switch (c) {
    case TableCategory::improved: return "A";
    case TableCategory::unchanged: return "B";
    case TableCategory::decreased: return "C";
  }
  return "?";
}

CategoryShares categorize_tables(const std::vector<EvalRecord>& before,
                                 const std::vector<EvalRecord>& after) {
  std::map<std::string, std::map<std::string, bool>> b, a;
  for (const auto& r : before) b[r.table_id][r.example_id] = r.verdict;
  for (const auto& r : after) a[r.table_id][r.example_id] = r.verdict;

  if (b.size() != a.size()) {
    throw MismatchedRunsError("runs cover different table sets");
  }
  CategoryShares shares;
  std::size_t na = 0, nb = 0, nc = 0;
  for (const auto& [table_id, before_map] : b) {
    auto it = a.find(table_id);
    if (it == a.end()) {
      throw MismatchedRunsError("table '" + table_id + "' missing from the after run");
    }
    const auto& after_map = it->second;
    if (before_map.size() != after_map.size()) {
      throw MismatchedRunsError("table '" + table_id + "' covers different examples");
    }
    std::size_t before_ok = 0, after_ok = 0;
    for (const auto& [example_id, verdict] : before_map) {
      auto jt = after_map.find(example_id);
      if (jt == after_map.end()) {
        throw MismatchedRunsError("example '" + example_id + "' missing from the after run");
      }
      if (verdict) ++before_ok;
      if (jt->second) ++after_ok;
    }
    TableCategory cat;
    if (after_ok > before_ok) {
      cat = TableCategory::improved;
      ++na;
    } else if (after_ok == before_ok) {
      cat = TableCategory::unchanged;
      ++nb;
    } else {
      cat = TableCategory::decreased;
      ++nc;
    }
    shares.per_table[table_id] = cat;
  }
  double total = static_cast<double>(b.size());
  shares.improved = static_cast<double>(na) / total;
  shares.unchanged = static_cast<double>(nb) / total;
  shares.decreased = static_cast<double>(nc) / total;
  return shares;
}

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += "\"\"";
    else out.push_back(c);
  }
  out += "\"";
  return out;
}

std::string join_pipe(const std::vector<std::string>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += "|";
    out += v[i];
  }
  return out;
}

}  // namespace

std::string records_to_csv(const std::vector<EvalRecord>& records) {
  std::string out = "example_id,table_id,verdict,predicted,gold,sql,failure_kind\n";
  for (const auto& r : records) {
    std::string gold;
    if (std::holds_alternative<bool>(r.gold)) {
      gold = std::get<bool>(r.gold) ? "1" : "0";
    } else {
      gold = join_pipe(std::get<std::vector<std::string>>(r.gold));
    }
    out += csv_field(r.example_id) + "," + csv_field(r.table_id) + "," +
           (r.verdict ? "1" : "0") + "," + csv_field(join_pipe(r.predicted)) + "," +
           csv_field(gold) + "," + csv_field(r.sql_text) + "," +
           csv_field(r.failure_kind.value_or("")) + "\n";
  }
  return out;
}

// ---- audit -------------------------------------------------------------

std::vector<AuditFixture> load_audit_fixtures(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::exception& e) {
    throw SchemaError(std::string("audit fixtures: invalid JSON: ") + e.what());
  }
  if (!doc.contains("fixtures") || !doc["fixtures"].is_array()) {
    throw SchemaError("audit fixtures: missing 'fixtures' array");
  }
  std::vector<AuditFixture> out;
  for (const auto& f : doc["fixtures"]) {
    AuditFixture fx;
    fx.id = f.value("id", "fixture_" + std::to_string(out.size()));
    if (!f.contains("table")) throw SchemaError("audit fixture '" + fx.id + "': missing table");
    fx.table = parse_json_table(f["table"].dump());
    fx.table.source_id = fx.id;
    const json labels = f.value("labels", json::object());
    if (labels.contains("dirty_columns")) {
      fx.dirty_columns = labels["dirty_columns"].get<std::vector<std::string>>();
    }
    if (labels.contains("transpose")) fx.transpose = labels["transpose"].get<bool>();
    if (labels.contains("aggregate_last_row")) {
      fx.aggregate_last_row = labels["aggregate_last_row"].get<bool>();
    }
    if (labels.contains("split_into")) {
      fx.split_into = labels["split_into"].get<std::vector<std::string>>();
    }
    auto load_cells = [&](const char* key,
                          std::vector<std::tuple<std::string, std::size_t, std::string>>& dst) {
      if (!labels.contains(key)) return;
      for (const auto& entry : labels[key]) {
        if (!entry.is_array() || entry.size() != 3) {
          throw SchemaError("audit fixture '" + fx.id + "': bad '" + key + "' entry");
        }
        dst.emplace_back(entry[0].get<std::string>(), entry[1].get<std::size_t>(),
                         entry[2].get<std::string>());
      }
    };
    load_cells("date_number", fx.date_number_cells);
    load_cells("missing", fx.missing_cells);
    load_cells("cleaning", fx.cleaning_cells);
    out.push_back(std::move(fx));
  }
  return out;
}

std::string AuditReport::to_text() const {
  std::size_t width = 0;
  for (const auto& r : rows) width = std::max(width, r.category.size());
  std::ostringstream out;
  out << std::left;
  for (const auto& r : rows) {
    char pct[32];
    std::snprintf(pct, sizeof pct, "%5.1f%%", 100.0 * r.accuracy());
    out << r.category;
    out << std::string(width - r.category.size() + 2, ' ');
    out << pct << "  (" << r.correct << "/" << r.total << ")\n";
  }
  return out.str();
}

std::string AuditReport::to_json() const {
  json j = json::array();
  for (const auto& r : rows) {
    j.push_back({{"category", r.category},
                 {"correct", r.correct},
                 {"total", r.total},
                 {"accuracy", r.accuracy()}});
  }
  return j.dump(2) + "\n";
}

AuditReport audit_normalization(const std::vector<AuditFixture>& fixtures,
                                const Config& config) {
  AuditRow col_select{"Columns Selection"};
  AuditRow transpose_row{"Transpose Detection"};
  AuditRow last_row{"Last Row Aggregation"};
  AuditRow split_col{"Split Column"};
  AuditRow date_number{"Date and Number"};
  AuditRow na_value{"N/A value"};
  AuditRow cleaning{"Value Cleaning"};

  for (const auto& fx : fixtures) {
    const Table& t = fx.table;

    if (fx.dirty_columns) {
      std::set<std::string> expected(fx.dirty_columns->begin(), fx.dirty_columns->end());
      std::set<std::string> predicted;
      for (const auto& d :
           diagnose_columns(t, config.diagnosis_threshold, config.date_order)) {
        if (d.needs_normalization()) predicted.insert(d.sql_name);
      }
      ++col_select.total;
      if (predicted == expected) ++col_select.correct;
    }
    if (fx.transpose) {
      bool predicted =
          detect_orientation(t, config.date_order) == Orientation::column_oriented;
      ++transpose_row.total;
      if (predicted == *fx.transpose) ++transpose_row.correct;
    }
    if (fx.aggregate_last_row) {
      ++last_row.total;
      if (detect_aggregate_row(t) == *fx.aggregate_last_row) ++last_row.correct;
    }

    bool needs_rules = fx.split_into || !fx.date_number_cells.empty() ||
                       !fx.missing_cells.empty() || !fx.cleaning_cells.empty();
    if (!needs_rules) continue;

    RulesOptions opt;
    opt.date_order = config.date_order;
    opt.split_apply_threshold = config.split_apply_threshold;
    std::vector<std::string> dirty = fx.dirty_columns.value_or(std::vector<std::string>{});
    Table normalized = normalize_table_rules(t, dirty, opt).table;

    auto score_cells =
        [&](const std::vector<std::tuple<std::string, std::size_t, std::string>>& cells,
            AuditRow& row) {
          if (cells.empty()) return;
          ++row.total;
          for (const auto& [col, r, expected] : cells) {
            auto idx = normalized.column_index(col);
            if (!idx || r >= normalized.row_count() ||
                normalized.rows[r][*idx].render() != expected) {
              return;  // any miss fails the fixture for this category
            }
          }
          ++row.correct;
        };
    score_cells(fx.date_number_cells, date_number);
    score_cells(fx.missing_cells, na_value);
    score_cells(fx.cleaning_cells, cleaning);

    if (fx.split_into) {
      ++split_col.total;
      bool all_present = true;
      for (const auto& name : *fx.split_into) {
        if (!normalized.column_index(name)) all_present = false;
      }
      if (all_present) ++split_col.correct;
    }
  }

  AuditReport report;
  report.rows = {col_select, transpose_row, last_row, split_col,
                 date_number, na_value,     cleaning};
  return report;
}

}  // namespace normtab
