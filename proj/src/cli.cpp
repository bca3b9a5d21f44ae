#include "normtab/cli.hpp"

#include <atomic>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <thread>

#include <CLI11.hpp>

#include "normtab/config.hpp"
#include "normtab/errors.hpp"
#include "normtab/evaluator.hpp"
#include "normtab/gateway.hpp"
#include "normtab/ingest.hpp"
#include "normtab/pipeline.hpp"
#include "normtab/qa_harness.hpp"
#include "normtab/sql_runtime.hpp"

namespace normtab {

namespace fs = std::filesystem;

namespace {

struct GlobalOptions {
  std::string config_path;
  std::string replay_path;
  std::string record_path;
  bool live = false;
};

Config load_config(const GlobalOptions& g) {
  Config cfg;
  if (!g.config_path.empty()) {
    cfg = Config::load(g.config_path);
  } else {
    cfg.apply_env_overrides();
  }
  return cfg;
}

std::optional<Gateway> make_gateway(const GlobalOptions& g, const Config& cfg) {
  std::optional<Gateway> gateway;
  if (!g.replay_path.empty()) {
    gateway = Gateway::replay(ReplayStore::load(g.replay_path));
  } else if (g.live) {
    GatewayOptions opts;
    opts.max_concurrency = cfg.max_concurrency;
    opts.requests_per_second = cfg.requests_per_second;
    gateway = Gateway::live(std::make_unique<HttpChatProvider>(cfg.provider_config()), opts);
  }
  if (gateway && !g.record_path.empty()) gateway->record_to(g.record_path);
  return gateway;
}

std::string resolve_table_path(const std::string& dir, const std::string& table_id) {
  for (const char* ext : {".csv", ".json"}) {
    fs::path p = fs::path(dir) / (table_id + ext);
    if (fs::exists(p)) return p.string();
  }
  throw Error("no table file for '" + table_id + "' under " + dir);
}

std::string failure_kind_of(const std::string& failure) {
  if (failure.empty()) return "unanswered";
  if (failure.find("no SQL") != std::string::npos) return "no_sql";
  if (failure == "empty result") return "empty_result";
  if (failure.find("not allowed") != std::string::npos ||
      failure.find("read-only") != std::string::npos) {
    return "forbidden_sql";
  }
  return "sql_error";
}

int cmd_normalize(const GlobalOptions& g, const std::string& in_path,
                  const std::string& out_path, const std::string& strategy_name,
                  std::string report_path, bool title_line) {
  Config cfg = load_config(g);
  auto strategy = strategy_from_string(strategy_name);
  if (!strategy) {
    std::cerr << "unknown strategy '" << strategy_name << "'\n";
    return 2;
  }
  Table t;
  if (fs::path(in_path).extension() == ".json") {
    t = parse_json_table(read_file(in_path));
    t.source_id = fs::path(in_path).stem().string();
  } else {
    auto ingest = parse_delimited(read_file(in_path), ',', title_line);
    t = std::move(ingest.table);
    t.source_id = fs::path(in_path).stem().string();
    for (const auto& w : ingest.warnings) std::cerr << "ingest: " << w << "\n";
  }

  auto gateway = make_gateway(g, cfg);
  if (*strategy != Strategy::rules_only && !gateway) {
    std::cerr << "strategy '" << strategy_name
              << "' needs a provider: pass --replay <store> or --live\n";
    return 1;
  }
  Pipeline pipeline(gateway ? &*gateway : nullptr, cfg);
  auto [normalized, report] = pipeline.run(t, *strategy);

  write_table(normalized, out_path);
  if (report_path.empty()) report_path = out_path + ".report.json";
  write_file(report_path, report.to_json());
  std::cout << "wrote " << out_path << " and " << report_path << "\n";
  return 0;
}

int cmd_ask(const GlobalOptions& g, const std::string& table_path,
            const std::string& question, bool show_sql) {
  Config cfg = load_config(g);
  auto gateway = make_gateway(g, cfg);
  if (!gateway) {
    std::cerr << "ask needs a provider: pass --replay <store> or --live\n";
    return 1;
  }
  Table t = load_table_file(table_path, /*retype=*/true);
  QaHarness harness(*gateway, cfg);
  QaOutcome out = harness.answer_question(t, question);
  if (show_sql) std::cerr << "sql: " << out.sql_text << "\n";
  if (!out.answered) {
    std::cerr << "unanswered (" << out.failure << ", attempts " << out.attempts << ")\n";
    return 0;
  }
  for (const auto& a : out.answers) std::cout << a << "\n";
  return 0;
}

int cmd_verify(const GlobalOptions& g, const std::string& table_path,
               const std::string& statement, bool show_sql) {
  Config cfg = load_config(g);
  auto gateway = make_gateway(g, cfg);
  if (!gateway) {
    std::cerr << "verify needs a provider: pass --replay <store> or --live\n";
    return 1;
  }
  Table t = load_table_file(table_path, /*retype=*/true);
  QaHarness harness(*gateway, cfg);
  FactOutcome out = harness.verify_fact(t, statement);
  if (show_sql) std::cerr << "sql: " << out.sql_text << "\n";
  if (!out.failure.empty()) std::cerr << "execution failed: " << out.failure << "\n";
  std::cout << (out.label ? "true" : "false") << "\n";
  return 0;
}

int cmd_eval(const GlobalOptions& g, const std::string& tables_dir,
             const std::string& manifest_path, const std::string& task_name,
             const std::string& out_report, const std::string& records_csv,
             bool prematch, int workers) {
  Config cfg = load_config(g);
  auto gateway = make_gateway(g, cfg);
  if (!gateway) {
    std::cerr << "eval needs a provider: pass --replay <store> or --live\n";
    return 1;
  }
  QaTask task;
  if (task_name == "qa") {
    task = QaTask::qa;
  } else if (task_name == "fact") {
    task = QaTask::fact;
  } else {
    std::cerr << "unknown task '" << task_name << "'\n";
    return 2;
  }

  auto examples = load_qa_manifest(read_file(manifest_path), task);
  if (examples.empty()) {
    std::cerr << "manifest is empty\n";
    return 1;
  }

  // group example indices by table, keeping manifest order within each group
  std::vector<std::string> table_order;
  std::map<std::string, std::vector<std::size_t>> by_table;
  for (std::size_t i = 0; i < examples.size(); ++i) {
    auto [it, inserted] = by_table.try_emplace(examples[i].table_id);
    if (inserted) table_order.push_back(examples[i].table_id);
    it->second.push_back(i);
  }

  std::vector<EvalRecord> records(examples.size());
  QaHarness harness(*gateway, cfg);
  std::atomic<std::size_t> next{0};
  std::atomic<bool> hard_failure{false};
  std::string hard_failure_message;
  std::mutex failure_mu;

  auto work = [&]() {
    while (!hard_failure.load()) {
      std::size_t slot = next.fetch_add(1);
      if (slot >= table_order.size()) return;
      const std::string& table_id = table_order[slot];
      Table t;
      SqlDatabase db;
      bool table_ok = true;
      std::string table_error;
      try {
        t = load_table_file(resolve_table_path(tables_dir, table_id), /*retype=*/true);
        db.load_table(t);
      } catch (const std::exception& e) {
        table_ok = false;
        table_error = e.what();
      }
      for (std::size_t idx : by_table[table_id]) {
        const QaExample& ex = examples[idx];
        EvalRecord rec;
        rec.example_id = ex.id;
        rec.table_id = ex.table_id;
        if (ex.task == QaTask::qa) {
          rec.gold = ex.gold_answers;
        } else {
          rec.gold = ex.gold_label;
        }
        if (!table_ok) {
          rec.failure_kind = "table_missing";
          records[idx] = std::move(rec);
          continue;
        }
        try {
          if (ex.task == QaTask::qa) {
            QaOutcome out = harness.answer_question(t, db, ex.utterance);
            rec.predicted = out.answers;
            rec.sql_text = out.sql_text;
            if (!out.answered) {
              rec.failure_kind = failure_kind_of(out.failure);
              rec.verdict = false;
            } else {
              MatchOptions mopts;
              mopts.prematch = prematch;
              mopts.gateway = prematch ? &*gateway : nullptr;
              mopts.date_order = cfg.date_order;
              mopts.prematch_params = cfg.prematch;
              rec.verdict = exact_match(out.answers, ex.gold_answers, mopts);
            }
          } else {
            FactOutcome out = harness.verify_fact(t, db, ex.utterance);
            rec.predicted = {out.label ? "1" : "0"};
            rec.sql_text = out.sql_text;
            if (!out.failure.empty()) rec.failure_kind = failure_kind_of(out.failure);
            rec.verdict = out.label == ex.gold_label;
          }
        } catch (const ReplayMissError& e) {
          std::lock_guard lock(failure_mu);
          hard_failure = true;
          hard_failure_message = e.what();
          return;
        } catch (const std::exception& e) {
          rec.failure_kind = "exception";
          rec.sql_text = e.what();
          rec.verdict = false;
        }
        records[idx] = std::move(rec);
      }
    }
  };

  int n_workers = std::max(1, workers);
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(n_workers));
  for (int i = 0; i < n_workers; ++i) pool.emplace_back(work);
  for (auto& th : pool) th.join();
  if (hard_failure) {
    std::cerr << "replay miss: " << hard_failure_message << "\n";
    return 1;
  }

  Metrics metrics = evaluate(records);
  std::cout << metrics.to_text();
  if (!out_report.empty()) write_file(out_report, metrics.to_json());
  if (!records_csv.empty()) write_file(records_csv, records_to_csv(records));
  return 0;
}

int cmd_audit(const std::string& fixtures_path, const std::string& out_report,
              const GlobalOptions& g) {
  Config cfg = load_config(g);
  auto fixtures = load_audit_fixtures(read_file(fixtures_path));
  AuditReport report = audit_normalization(fixtures, cfg);
  std::cout << report.to_text();
  if (!out_report.empty()) write_file(out_report, report.to_json());
  return 0;
}

int cmd_report(const std::string& from_dir, bool table7) {
  (void)table7;  // one layout; the flag names it
  std::map<std::string, std::vector<NormalizationReport>> groups;
  for (const auto& entry : fs::recursive_directory_iterator(from_dir)) {
    if (!entry.is_regular_file() || entry.path().extension() != ".json") continue;
    NormalizationReport report;
    try {
      report = NormalizationReport::from_json(read_file(entry.path().string()));
    } catch (const std::exception&) {
      continue;  // not a normalization report
    }
    if (report.cells_total == 0) continue;
    fs::path rel = fs::relative(entry.path(), from_dir);
    std::string group = rel.has_parent_path() && rel.parent_path() != fs::path()
                            ? rel.parent_path().begin()->string()
                            : std::string("all");
    groups[group].push_back(std::move(report));
  }
  if (groups.empty()) {
    std::cerr << "no normalization reports under " << from_dir << "\n";
    return 1;
  }
  std::printf("%-12s %12s %15s %10s\n", "dataset", "cells_basic", "cells_targeted",
              "reduction");
  for (const auto& [name, reports] : groups) {
    ReductionSummary s = cell_reduction(reports);
    std::printf("%-12s %12.2f %15.2f %9.2f%%\n", name.c_str(), s.mean_cells_basic,
                s.mean_cells_targeted, 100.0 * s.mean_reduction);
  }
  return 0;
}

}  // namespace

int run_cli(int argc, char** argv) {
  CLI::App app{"normtab: web-table normalization and table QA over SQL"};
  app.require_subcommand(1);

  GlobalOptions g;
  app.add_option("--config", g.config_path, "key = value config file");
  app.add_option("--replay", g.replay_path, "replay store (JSONL transcripts)");
  app.add_option("--record", g.record_path, "append transcripts to this JSONL file");
  app.add_flag("--live", g.live, "use the configured HTTP provider");

  auto* normalize = app.add_subcommand("normalize", "normalize one table");
  std::string in_path, out_path, report_path;
  std::string strategy = "targeted";
  bool title_line = false;
  normalize->add_option("--in", in_path, "input table (.csv or .json)")->required();
  normalize->add_option("--out", out_path, "output CSV path")->required();
  normalize->add_option("--strategy", strategy, "basic | targeted | rules");
  normalize->add_option("--report", report_path, "report JSON path");
  normalize->add_flag("--title-line", title_line, "first CSV line is the title");

  auto* ask = app.add_subcommand("ask", "answer a question over a normalized table");
  std::string table_path, question;
  bool show_sql = false;
  ask->add_option("--table", table_path, "normalized table file")->required();
  ask->add_option("--question", question, "natural-language question")->required();
  ask->add_flag("--sql", show_sql, "print the generated SQL to stderr");

  auto* verify = app.add_subcommand("verify", "verify a statement against a table");
  std::string v_table_path, statement;
  bool v_show_sql = false;
  verify->add_option("--table", v_table_path, "normalized table file")->required();
  verify->add_option("--statement", statement, "statement to verify")->required();
  verify->add_flag("--sql", v_show_sql, "print the generated SQL to stderr");

  auto* eval = app.add_subcommand("eval", "run a manifest of questions or facts");
  std::string tables_dir, manifest_path, task_name = "qa", out_report, records_csv;
  bool prematch = false;
  int workers = 4;
  eval->add_option("--tables-dir", tables_dir, "directory of normalized tables")->required();
  eval->add_option("--manifest", manifest_path, "JSONL manifest")->required();
  eval->add_option("--task", task_name, "qa | fact");
  eval->add_option("--out-report", out_report, "metrics JSON path");
  eval->add_option("--records-csv", records_csv, "per-record CSV path");
  eval->add_flag("--prematch", prematch, "LLM pre-matching for near-miss answers");
  eval->add_option("--workers", workers, "worker threads");

  auto* audit = app.add_subcommand("audit", "score the offline normalizer on labeled fixtures");
  std::string fixtures_path, audit_report;
  audit->add_option("--fixtures", fixtures_path, "audit fixtures JSON")->required();
  audit->add_option("--out-report", audit_report, "audit JSON path");

  auto* report = app.add_subcommand("report", "summarize normalization reports");
  std::string from_dir;
  bool table7 = false;
  report->add_option("--from", from_dir, "directory of report JSON files")->required();
  report->add_flag("--table7-style", table7, "mean cells basic/targeted + reduction");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (normalize->parsed()) {
      return cmd_normalize(g, in_path, out_path, strategy, report_path, title_line);
    }
    if (ask->parsed()) return cmd_ask(g, table_path, question, show_sql);
    if (verify->parsed()) return cmd_verify(g, v_table_path, statement, v_show_sql);
    if (eval->parsed()) {
      return cmd_eval(g, tables_dir, manifest_path, task_name, out_report, records_csv,
                      prematch, workers);
    }
    if (audit->parsed()) return cmd_audit(fixtures_path, audit_report, g);
    if (report->parsed()) return cmd_report(from_dir, table7);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace normtab
