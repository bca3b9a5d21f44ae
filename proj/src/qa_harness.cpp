#include "normtab/qa_harness.hpp"

#include "normtab/errors.hpp"

namespace normtab {

QaHarness::QaHarness(Gateway& gateway, Config config)
    : gateway_(gateway), config_(std::move(config)) {}

QaHarness::Execution QaHarness::run_sql(const Table& t, SqlDatabase& db,
                                        const std::string& prompt) {
  (void)t;
  Execution exec;
  std::string active_prompt = prompt;
  std::string sql;
  for (int attempt = 0; attempt < 2; ++attempt) {
    exec.attempts = attempt + 1;
    std::string response =
        gateway_.complete(PromptRole::text_to_sql, active_prompt, config_.text_to_sql);
    auto extracted = extract_sql(response);
    if (!extracted) {
      exec.failure = "no SQL found in response";
      return exec;
    }
    sql = *extracted;
    exec.sql = sql;
    try {
      exec.result = db.execute(sql);
      exec.ok = true;
      return exec;
    } catch (const SqlSyntaxError& e) {
      exec.failure = e.what();
      active_prompt = render_sql_repair_prompt(prompt, sql, e.what());
    } catch (const SqlSemanticError& e) {
      exec.failure = e.what();
      active_prompt = render_sql_repair_prompt(prompt, sql, e.what());
    } catch (const ForbiddenStatementError& e) {
      exec.failure = e.what();
      return exec;
    }
  }
  return exec;
}

QaOutcome QaHarness::answer_question(const Table& normalized, const std::string& question) {
  SqlDatabase db;
  db.load_table(normalized);
  return answer_question(normalized, db, question);
}

QaOutcome QaHarness::answer_question(const Table& normalized, SqlDatabase& db,
                                     const std::string& question) {
  Execution exec = run_sql(normalized, db,
                           render_sql_prompt(normalized, question, config_.sample_rows));
  QaOutcome out;
  out.sql_text = exec.sql;
  out.attempts = exec.attempts;
  if (!exec.ok) {
    out.failure = exec.failure.empty() ? "no executable SQL" : exec.failure;
    return out;
  }
  out.answers = extract_answer(exec.result);
  if (out.answers.empty()) {
    out.failure = "empty result";
    return out;
  }
  out.answered = true;
  return out;
}

FactOutcome QaHarness::verify_fact(const Table& normalized, const std::string& statement) {
  SqlDatabase db;
  db.load_table(normalized);
  return verify_fact(normalized, db, statement);
}

namespace {

bool truthy(const QueryResult& r) {
  if (r.rows.empty()) return false;
  const auto& first_row = r.rows[0];
  if (first_row.empty()) return false;
  const CellValue& v = first_row[0];
  if (v.is_null()) return false;
  if (v.is_integer()) return v.as_integer() != 0;
  if (v.is_real()) return v.as_real() != 0;
  if (v.is_text()) {
    const std::string& s = v.as_text();
    return s == "1" || s == "true" || s == "yes" || s == "True";
  }
  return true;  // a date is a concrete value
}

}  // namespace

FactOutcome QaHarness::verify_fact(const Table& normalized, SqlDatabase& db,
                                   const std::string& statement) {
  Execution exec = run_sql(
      normalized, db, render_fact_sql_prompt(normalized, statement, config_.sample_rows));
  FactOutcome out;
  out.sql_text = exec.sql;
  out.attempts = exec.attempts;
  if (!exec.ok) {
    // execution failure defaults to false, recorded as a failure
    out.label = false;
    out.failure = exec.failure.empty() ? "no executable SQL" : exec.failure;
    return out;
  }
  out.executed = true;
  out.label = truthy(exec.result);
  return out;
}

}  // namespace normtab
