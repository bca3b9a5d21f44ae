#pragma once

#include <string>
#include <utility>
#include <vector>

#include "normtab/config.hpp"
#include "normtab/gateway.hpp"
#include "normtab/norm_rules.hpp"
#include "normtab/table.hpp"

namespace normtab {

enum class Strategy { basic, targeted, rules_only };

const char* to_string(Strategy s);
std::optional<Strategy> strategy_from_string(std::string_view s);

/// The decisions made for one table.
struct NormalizationPlan {
  std::vector<std::string> dirty_columns;
  bool transpose = false;
  bool drop_aggregate_row = false;
  Strategy strategy = Strategy::targeted;
};

struct NormalizationReport {
  std::string table_id;
  NormalizationPlan plan;
  std::size_t cells_total = 0;
  std::size_t cells_sent = 0;
  double reduction = 0;  // (total - sent) / total
  std::vector<std::pair<std::string, std::string>> fallbacks;  // (stage, reason)
  std::vector<std::string> warnings;

  std::string to_json() const;
  static NormalizationReport from_json(const std::string& text);
};

/// Runs NormTab-Basic / NormTab-Targeted / the offline rules path over one
/// table. A gateway is required for basic and targeted.
class Pipeline {
 public:
  Pipeline(Gateway* gateway, Config config);

  std::pair<Table, NormalizationReport> run(const Table& t, Strategy strategy);
  std::pair<Table, NormalizationReport> normalize_basic(const Table& t);
  std::pair<Table, NormalizationReport> normalize_targeted(const Table& t);
  std::pair<Table, NormalizationReport> normalize_rules(const Table& t);

 private:
  struct Attempt;
  Table normalize_subtable(const Table& sub, NormalizationReport& report);
  void structural_pass(Table& table, NormalizationReport& report);

  Gateway* gateway_;
  Config config_;
};

/// Checks the value-normalization contract: row counts line up (aggregate
/// drop accounted), clean columns byte-identical on their rendered text, no
/// original column deleted, date-like text ISO, number-like text bare.
/// Structural transforms are undone via the transpose involution before
/// comparing.
std::vector<std::string> verify_normalization(const Table& original,
                                              const Table& normalized,
                                              const NormalizationPlan& plan,
                                              DateOrder order = DateOrder::month_first);

struct ReductionSummary {
  double mean_cells_basic = 0;
  double mean_cells_targeted = 0;
  double mean_reduction = 0;  // computed from the two means
};

ReductionSummary cell_reduction(const std::vector<NormalizationReport>& reports);

}  // namespace normtab
