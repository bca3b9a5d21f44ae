#pragma once

#include <string>
#include <vector>

#include "normtab/config.hpp"
#include "normtab/gateway.hpp"
#include "normtab/sql_runtime.hpp"
#include "normtab/table.hpp"

namespace normtab {

struct QaOutcome {
  std::vector<std::string> answers;
  std::string sql_text;
  int attempts = 0;
  bool answered = false;
  std::string failure;  // empty when answered
};

struct FactOutcome {
  bool label = false;
  std::string sql_text;
  int attempts = 0;
  bool executed = false;
  std::string failure;
};

/// Few-shot text-to-SQL over normalized tables. Prompts carry only the title,
/// header and three example rows; one repair retry with the engine's error
/// message on syntax/semantic failures.
class QaHarness {
 public:
  QaHarness(Gateway& gateway, Config config);

  QaOutcome answer_question(const Table& normalized, const std::string& question);
  QaOutcome answer_question(const Table& normalized, SqlDatabase& db,
                            const std::string& question);

  FactOutcome verify_fact(const Table& normalized, const std::string& statement);
  FactOutcome verify_fact(const Table& normalized, SqlDatabase& db,
                          const std::string& statement);

 private:
  struct Execution {
    std::string sql;
    QueryResult result;
    int attempts = 0;
    bool ok = false;
    std::string failure;
  };
  Execution run_sql(const Table& t, SqlDatabase& db, const std::string& prompt);

  Gateway& gateway_;
  Config config_;
};

}  // namespace normtab
