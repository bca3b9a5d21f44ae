#include "normtab/pipeline.hpp"

#include <algorithm>
#include <set>

#include <nlohmann/json.hpp>

#include "normtab/errors.hpp"

namespace normtab {

using nlohmann::json;

const char* to_string(Strategy s) {
  switch (s) {
    case Strategy::basic: return "basic";
    case Strategy::targeted: return "targeted";
    case Strategy::rules_only: return "rules_only";
  }
  return "?";
}

std::optional<Strategy> strategy_from_string(std::string_view s) {
  if (s == "basic") return Strategy::basic;
  if (s == "targeted") return Strategy::targeted;
  if (s == "rules_only" || s == "rules") return Strategy::rules_only;
  return std::nullopt;
}

std::string NormalizationReport::to_json() const {
  json j;
  j["table_id"] = table_id;
  j["plan"] = {{"strategy", normtab::to_string(plan.strategy)},
               {"dirty_columns", plan.dirty_columns},
               {"transpose", plan.transpose},
               {"drop_aggregate_row", plan.drop_aggregate_row}};
  j["cells_total"] = cells_total;
  j["cells_sent"] = cells_sent;
  j["reduction"] = reduction;
  j["fallbacks"] = json::array();
  for (const auto& [stage, reason] : fallbacks) {
    j["fallbacks"].push_back(json::array({stage, reason}));
  }
  j["warnings"] = warnings;
  return j.dump(2) + "\n";
}

NormalizationReport NormalizationReport::from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw SchemaError(std::string("report: invalid JSON: ") + e.what());
  }
  NormalizationReport r;
  r.table_id = j.value("table_id", "");
  if (j.contains("plan")) {
    const json& p = j["plan"];
    if (auto s = strategy_from_string(p.value("strategy", "targeted"))) {
      r.plan.strategy = *s;
    }
    if (p.contains("dirty_columns")) {
      for (const auto& c : p["dirty_columns"]) {
        r.plan.dirty_columns.push_back(c.get<std::string>());
      }
    }
    r.plan.transpose = p.value("transpose", false);
    r.plan.drop_aggregate_row = p.value("drop_aggregate_row", false);
  }
  r.cells_total = j.value("cells_total", std::size_t{0});
  r.cells_sent = j.value("cells_sent", std::size_t{0});
  r.reduction = j.value("reduction", 0.0);
  if (j.contains("fallbacks")) {
    for (const auto& f : j["fallbacks"]) {
      if (f.is_array() && f.size() == 2) {
        r.fallbacks.emplace_back(f[0].get<std::string>(), f[1].get<std::string>());
      }
    }
  }
  if (j.contains("warnings")) {
    for (const auto& w : j["warnings"]) r.warnings.push_back(w.get<std::string>());
  }
  return r;
}

Pipeline::Pipeline(Gateway* gateway, Config config)
    : gateway_(gateway), config_(std::move(config)) {}

namespace {

// Render-preserving retyping for columns that never saw the LLM.
void infer_clean_cells(Table& t, const std::set<std::string>& dirty) {
  for (std::size_t c = 0; c < t.col_count(); ++c) {
    if (dirty.count(t.columns[c].sql_name)) continue;
    for (auto& row : t.rows) {
      if (row[c].is_text()) row[c] = infer_cell(row[c].as_text());
    }
  }
}

bool is_child_name(const std::string& candidate, const std::string& parent) {
  return candidate.size() > parent.size() + 1 &&
         candidate.compare(0, parent.size(), parent) == 0 &&
         candidate[parent.size()] == '_';
}

// Maps columns of the model's normalized subtable back onto the subtable
// columns they came from. Matching is by echoed header first (exact or
// <parent>_suffix); a response with exactly the expected column count falls
// back to positional mapping, since models rewrite header spellings.
std::vector<std::vector<std::size_t>> map_response_columns(
    const std::vector<std::string>& sub_names, const Table& normalized) {
  std::vector<std::vector<std::size_t>> groups(sub_names.size());
  std::vector<std::size_t> pending;
  std::size_t current = sub_names.size();  // none yet
  std::size_t next_anchor = 0;

  for (std::size_t j = 0; j < normalized.col_count(); ++j) {
    const std::string& name = normalized.columns[j].sql_name;
    std::size_t anchor = sub_names.size();
    for (std::size_t k = next_anchor; k < sub_names.size(); ++k) {
      if (name == sub_names[k] || is_child_name(name, sub_names[k])) {
        anchor = k;
        break;
      }
    }
    if (anchor != sub_names.size()) {
      current = anchor;
      next_anchor = anchor + 1;
      if (!pending.empty()) {
        groups[current].insert(groups[current].end(), pending.begin(), pending.end());
        pending.clear();
      }
      groups[current].push_back(j);
    } else if (current != sub_names.size()) {
      groups[current].push_back(j);
    } else {
      pending.push_back(j);
    }
  }

  bool complete = pending.empty() &&
                  std::all_of(groups.begin(), groups.end(),
                              [](const auto& g) { return !g.empty(); });
  if (!complete) {
    if (normalized.col_count() == sub_names.size()) {
      for (std::size_t j = 0; j < sub_names.size(); ++j) groups[j] = {j};
    } else {
      throw UnparseableError("cannot map response columns onto the subtable");
    }
  }
  return groups;
}

Table reassemble(const Table& original, const std::vector<std::string>& dirty,
                 const Table& normalized_sub) {
  std::vector<std::vector<std::size_t>> groups =
      map_response_columns(dirty, normalized_sub);

  Table out;
  out.title = original.title;
  out.source_id = original.source_id;
  out.rows.assign(original.row_count(), {});

  std::set<std::string> used;
  auto add_column = [&](ColumnMeta meta) {
    std::string base = meta.sql_name;
    for (int suffix = 2; used.count(meta.sql_name); ++suffix) {
      meta.sql_name = base + "_" + std::to_string(suffix);
    }
    used.insert(meta.sql_name);
    out.columns.push_back(std::move(meta));
  };

  std::map<std::string, std::size_t> dirty_index;
  for (std::size_t k = 0; k < dirty.size(); ++k) dirty_index[dirty[k]] = k;

  for (std::size_t c = 0; c < original.col_count(); ++c) {
    const std::string& name = original.columns[c].sql_name;
    auto it = dirty_index.find(name);
    if (it == dirty_index.end()) {
      add_column(original.columns[c]);
      for (std::size_t r = 0; r < original.row_count(); ++r) {
        out.rows[r].push_back(original.rows[r][c]);
      }
      continue;
    }
    for (std::size_t j : groups[it->second]) {
      ColumnMeta meta = normalized_sub.columns[j];
      // a lone replacement column keeps the parent's name
      if (groups[it->second].size() == 1) {
        meta.raw_name = original.columns[c].raw_name;
        meta.sql_name = name;
      }
      add_column(std::move(meta));
      for (std::size_t r = 0; r < original.row_count(); ++r) {
        out.rows[r].push_back(normalized_sub.rows[r][j]);
      }
    }
  }
  return out;
}

std::string join(const std::vector<std::string>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ", ";
    out += v[i];
  }
  return out;
}

}  // namespace

Table Pipeline::normalize_subtable(const Table& sub, NormalizationReport& report) {
  const std::set<std::string> null_tokens = {"NULL", "null", "None"};
  auto retype = [&](Table& t) {
    for (auto& row : t.rows) {
      for (auto& cell : row) {
        if (cell.is_text()) cell = infer_cell(cell.as_text(), null_tokens);
      }
    }
    retype_columns(t);
  };

  std::string prompt = render_normalize_prompt(sub);
  std::string failure;
  for (int attempt = 0; attempt < 2; ++attempt) {
    try {
      std::string active_prompt =
          attempt == 0 ? prompt : render_normalize_retry_prompt(prompt, failure);
      std::string response =
          gateway_->complete(PromptRole::normalize, active_prompt, config_.normalize);
      Table parsed = parse_table_text(response, sub.col_count(), sub.row_count());
      retype(parsed);
      // the response must map back onto the subtable and respect the value rules
      std::vector<std::string> sub_names;
      for (const auto& c : sub.columns) sub_names.push_back(c.sql_name);
      Table candidate = reassemble(sub, sub_names, parsed);
      NormalizationPlan sub_plan;
      sub_plan.dirty_columns = sub_names;
      sub_plan.strategy = Strategy::targeted;
      auto violations = verify_normalization(sub, candidate, sub_plan, config_.date_order);
      if (!violations.empty()) {
        throw UnparseableError("normalized output rejected: " + join(violations));
      }
      return candidate;
    } catch (const Error& e) {
      failure = e.what();
      report.warnings.push_back("normalize attempt " + std::to_string(attempt + 1) +
                                " failed: " + failure);
    }
  }

  report.fallbacks.emplace_back(join(
      [&] {
        std::vector<std::string> names;
        for (const auto& c : sub.columns) names.push_back(c.sql_name);
        return names;
      }()),
      "llm normalization failed twice; deterministic rules applied");
  RulesOptions opt;
  opt.date_order = config_.date_order;
  opt.split_apply_threshold = config_.split_apply_threshold;
  auto rules = normalize_table_rules(sub, {}, opt);
  for (const auto& note : rules.notes) report.warnings.push_back("rules: " + note);
  return rules.table;
}

void Pipeline::structural_pass(Table& table, NormalizationReport& report) {
  Orientation orientation = detect_orientation(table, config_.date_order);
  bool do_transpose = orientation == Orientation::column_oriented;
  if (orientation == Orientation::uncertain && gateway_ != nullptr) {
    try {
      std::string response = gateway_->complete(PromptRole::transpose_detect,
                                                render_transpose_prompt(table),
                                                config_.transpose_detect);
      if (auto verdict = parse_yes_no(response)) {
        do_transpose = *verdict;
      } else {
        report.warnings.push_back("transpose detection: unparseable reply, keeping orientation");
      }
    } catch (const Error& e) {
      report.warnings.push_back(std::string("transpose detection unavailable: ") + e.what());
    }
  }
  if (do_transpose && table.row_count() > 0) {
    table = transpose(table, &report.warnings);
    report.plan.transpose = true;
    report.warnings.push_back("table transposed (" + std::string(to_string(orientation)) +
                              ")");
  }
  if (detect_aggregate_row(table)) {
    table = drop_last_row(table);
    report.plan.drop_aggregate_row = true;
    report.warnings.push_back("aggregate last row dropped");
  }
}

std::pair<Table, NormalizationReport> Pipeline::run(const Table& t, Strategy strategy) {
  switch (strategy) {
    case Strategy::basic: return normalize_basic(t);
    case Strategy::targeted: return normalize_targeted(t);
    case Strategy::rules_only: return normalize_rules(t);
  }
  throw Error("unknown strategy");
}

std::pair<Table, NormalizationReport> Pipeline::normalize_basic(const Table& t) {
  if (!gateway_) throw Error("normalize_basic requires a gateway");
  NormalizationReport report;
  report.table_id = t.source_id;
  report.plan.strategy = Strategy::basic;
  for (const auto& c : t.columns) report.plan.dirty_columns.push_back(c.sql_name);
  report.cells_total = t.row_count() * t.col_count();
  report.cells_sent = report.cells_total;
  report.reduction = 0;

  Table normalized = normalize_subtable(t, report);
  NormalizationPlan value_plan = report.plan;
  value_plan.transpose = false;
  value_plan.drop_aggregate_row = false;
  auto violations = verify_normalization(t, normalized, value_plan, config_.date_order);
  if (!violations.empty()) {
    throw NormalizationFailedError("verification failed after fallback: " +
                                   join(violations));
  }
  structural_pass(normalized, report);
  return {std::move(normalized), std::move(report)};
}

std::pair<Table, NormalizationReport> Pipeline::normalize_targeted(const Table& t) {
  if (!gateway_) throw Error("normalize_targeted requires a gateway");
  NormalizationReport report;
  report.table_id = t.source_id;
  report.plan.strategy = Strategy::targeted;
  report.cells_total = t.row_count() * t.col_count();

  std::vector<std::string> llm_selected;
  try {
    std::string response = gateway_->complete(
        PromptRole::column_select, render_column_select_prompt(t, config_.sample_rows),
        config_.column_select);
    llm_selected = parse_column_list(response, t, &report.warnings);
  } catch (const Error& e) {
    auto basic = normalize_basic(t);
    basic.second.warnings.insert(basic.second.warnings.begin(),
                                 std::string("column selection failed (") + e.what() +
                                     "); degraded to basic normalization");
    return basic;
  }

  std::set<std::string> dirty_set(llm_selected.begin(), llm_selected.end());
  std::vector<std::string> rules_flagged;
  for (const auto& diag : diagnose_columns(t, config_.diagnosis_threshold, config_.date_order)) {
    if (diag.needs_normalization()) {
      rules_flagged.push_back(diag.sql_name);
      dirty_set.insert(diag.sql_name);
    }
  }
  report.warnings.push_back("column selection: llm=[" + join(llm_selected) +
                            "] rules=[" + join(rules_flagged) + "]");

  std::vector<std::string> dirty;
  for (const auto& c : t.columns) {
    if (dirty_set.count(c.sql_name)) dirty.push_back(c.sql_name);
  }
  report.plan.dirty_columns = dirty;
  report.cells_sent = t.row_count() * dirty.size();

  Table normalized;
  if (dirty.empty()) {
    normalized = t;
    infer_clean_cells(normalized, {});
    retype_columns(normalized);
    report.warnings.push_back("no columns need normalization");
  } else {
    Table sub = project_columns(t, dirty);
    Table normalized_sub = normalize_subtable(sub, report);
    normalized = reassemble(t, dirty, normalized_sub);
    infer_clean_cells(normalized, std::set<std::string>(dirty.begin(), dirty.end()));
    retype_columns(normalized);

    NormalizationPlan value_plan = report.plan;
    value_plan.transpose = false;
    value_plan.drop_aggregate_row = false;
    auto violations = verify_normalization(t, normalized, value_plan, config_.date_order);
    if (!violations.empty()) {
      throw NormalizationFailedError("verification failed after fallback: " +
                                     join(violations));
    }
  }

  structural_pass(normalized, report);
  if (report.cells_total > 0) {
    report.reduction = static_cast<double>(report.cells_total - report.cells_sent) /
                       static_cast<double>(report.cells_total);
  }
  return {std::move(normalized), std::move(report)};
}

std::pair<Table, NormalizationReport> Pipeline::normalize_rules(const Table& t) {
  NormalizationReport report;
  report.table_id = t.source_id;
  report.plan.strategy = Strategy::rules_only;
  report.cells_total = t.row_count() * t.col_count();
  report.cells_sent = 0;
  if (report.cells_total > 0) report.reduction = 1.0;

  std::vector<std::string> dirty;
  for (const auto& diag : diagnose_columns(t, config_.diagnosis_threshold, config_.date_order)) {
    if (diag.needs_normalization()) dirty.push_back(diag.sql_name);
  }
  report.plan.dirty_columns = dirty;

  Table normalized;
  if (dirty.empty()) {
    normalized = t;
  } else {
    RulesOptions opt;
    opt.date_order = config_.date_order;
    opt.split_apply_threshold = config_.split_apply_threshold;
    auto rules = normalize_table_rules(t, dirty, opt);
    for (const auto& note : rules.notes) report.warnings.push_back("rules: " + note);
    normalized = std::move(rules.table);
  }
  infer_clean_cells(normalized, std::set<std::string>(dirty.begin(), dirty.end()));
  retype_columns(normalized);

  NormalizationPlan value_plan = report.plan;
  value_plan.transpose = false;
  value_plan.drop_aggregate_row = false;
  auto violations = verify_normalization(t, normalized, value_plan, config_.date_order);
  if (!violations.empty()) {
    throw NormalizationFailedError("rules normalization failed verification: " +
                                   join(violations));
  }

  // heuristic-only structural pass (no gateway consulted)
  Gateway* saved = gateway_;
  gateway_ = nullptr;
  structural_pass(normalized, report);
  gateway_ = saved;
  return {std::move(normalized), std::move(report)};
}

std::vector<std::string> verify_normalization(const Table& original,
                                              const Table& normalized,
                                              const NormalizationPlan& plan,
                                              DateOrder order) {
  std::vector<std::string> violations;
  Table work = normalized;
  Table orig = original;
  bool last_column_may_drop = false;

  if (plan.transpose) {
    if (work.row_count() == 0) {
      violations.push_back("transposed table has no rows");
      return violations;
    }
    work = transpose(work);
    if (plan.drop_aggregate_row) last_column_may_drop = true;
  } else if (plan.drop_aggregate_row && orig.row_count() > 0) {
    orig = drop_last_row(orig);
  }

  if (work.row_count() != orig.row_count()) {
    violations.push_back("row count " + std::to_string(work.row_count()) +
                         " differs from expected " + std::to_string(orig.row_count()));
    return violations;
  }

  std::set<std::string> dirty(plan.dirty_columns.begin(), plan.dirty_columns.end());
  std::set<std::string> original_names;
  for (const auto& c : orig.columns) original_names.insert(c.sql_name);

  for (std::size_t i = 0; i < orig.col_count(); ++i) {
    const std::string& name = orig.columns[i].sql_name;
    auto exact = work.column_index(name);
    if (!exact && i == 0 && plan.transpose && work.col_count() > 0) {
      exact = 0;  // the corner header may have been renamed by transposition
    }

    std::vector<std::size_t> targets;
    if (exact) targets.push_back(*exact);
    if (dirty.count(name)) {
      for (std::size_t j = 0; j < work.col_count(); ++j) {
        const std::string& wn = work.columns[j].sql_name;
        if (is_child_name(wn, name) && !original_names.count(wn)) targets.push_back(j);
      }
    }
    if (targets.empty()) {
      if (last_column_may_drop && i == orig.col_count() - 1) continue;
      violations.push_back("column '" + name + "' deleted");
      continue;
    }

    if (!dirty.count(name)) {
      std::size_t j = targets[0];
      for (std::size_t r = 0; r < orig.row_count(); ++r) {
        std::string expected = orig.rows[r][i].render();
        std::string actual = work.rows[r][j].render();
        if (plan.transpose && i == 0) {
          // these cells crossed the header boundary and were sanitized
          expected = sanitize_identifier(expected);
        }
        if (expected != actual) {
          violations.push_back("clean column '" + name + "' altered at row " +
                               std::to_string(r) + " ('" + expected + "' -> '" +
                               actual + "')");
          break;
        }
      }
    } else {
      for (std::size_t j : targets) {
        for (std::size_t r = 0; r < work.row_count(); ++r) {
          const CellValue& v = work.rows[r][j];
          if (!v.is_text()) continue;
          const std::string& text = v.as_text();
          if (is_missing_marker(text) && !text.empty()) {
            violations.push_back("column '" + work.columns[j].sql_name +
                                 "' row " + std::to_string(r) +
                                 ": missing marker '" + text + "' not normalized");
            continue;
          }
          if (auto d = normalize_date(text, order); d && d->iso() != text) {
            violations.push_back("column '" + work.columns[j].sql_name + "' row " +
                                 std::to_string(r) + ": date '" + text + "' not ISO");
          }
          if (auto n = normalize_number(text); n && n->value.render() != text) {
            violations.push_back("column '" + work.columns[j].sql_name + "' row " +
                                 std::to_string(r) + ": number '" + text + "' not bare");
          }
        }
      }
    }
  }
  return violations;
}

ReductionSummary cell_reduction(const std::vector<NormalizationReport>& reports) {
  if (reports.empty()) throw EmptyInputError("cell_reduction: no reports");
  double total = 0, sent = 0;
  for (const auto& r : reports) {
    total += static_cast<double>(r.cells_total);
    sent += static_cast<double>(r.cells_sent);
  }
  ReductionSummary s;
  s.mean_cells_basic = total / static_cast<double>(reports.size());
  s.mean_cells_targeted = sent / static_cast<double>(reports.size());
  if (s.mean_cells_basic > 0) {
    s.mean_reduction = (s.mean_cells_basic - s.mean_cells_targeted) / s.mean_cells_basic;
  }
  return s;
}

}  // namespace normtab
