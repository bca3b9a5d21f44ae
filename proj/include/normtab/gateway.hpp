#pragma once

#include <atomic>
#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "normtab/table.hpp"

namespace normtab {

enum class PromptRole { column_select, transpose_detect, normalize, text_to_sql, prematch };

const char* to_string(PromptRole role);
std::optional<PromptRole> prompt_role_from_string(std::string_view s);

/// Decode settings for one completion call.
struct DecodeParams {
  double temperature = 0.3;
  double top_p = 1.0;
  int sample_n = 1;
  int max_tokens = 100;
  int num_shots = 0;

  /// Throws on out-of-range values (0<=temperature<=2, 0<top_p<=1, ...).
  void check() const;
};

/// One LLM exchange, stored verbatim so replay is bit-exact.
struct CompletionTranscript {
  PromptRole role = PromptRole::normalize;
  std::string rendered_prompt;
  DecodeParams params;
  std::string raw_response;
  std::string model_id;
  std::string timestamp;

  std::string to_json_line() const;
  static CompletionTranscript from_json_line(const std::string& line);
};

std::string sha256_hex(std::string_view data);

/// Abstract chat-completion backend.
class ChatProvider {
 public:
  virtual ~ChatProvider() = default;
  virtual std::string complete(PromptRole role, const std::string& prompt,
                               const DecodeParams& params) = 0;
  virtual std::string model_id() const = 0;
};

struct HttpProviderConfig {
  std::string base_url = "https://api.openai.com/v1";
  std::string model = "gpt-3.5-turbo-0125";
  std::string api_key;
  int max_attempts = 3;
  int backoff_base_ms = 250;
  int timeout_seconds = 120;
};

/// OpenAI-compatible chat-completions client with bounded exponential-backoff
/// retries on 429/5xx/transport failures.
class HttpChatProvider : public ChatProvider {
 public:
  explicit HttpChatProvider(HttpProviderConfig config);
  std::string complete(PromptRole role, const std::string& prompt,
                       const DecodeParams& params) override;
  std::string model_id() const override { return config_.model; }

 private:
  HttpProviderConfig config_;
  std::string host_;
  std::string path_prefix_;
};

/// Read-only archive of transcripts keyed by (role, SHA-256 of prompt).
class ReplayStore {
 public:
  ReplayStore() = default;
  static ReplayStore load(const std::string& path);

  void add(const CompletionTranscript& t);
  std::optional<std::string> find(PromptRole role, const std::string& prompt) const;
  std::size_t size() const { return entries_.size(); }

 private:
  std::map<std::string, std::string> entries_;  // "role:hash" -> raw_response
};

struct GatewayOptions {
  int max_concurrency = 4;
  double requests_per_second = 0;  // 0 = unlimited
};

struct RoleCounters {
  std::map<PromptRole, std::size_t> calls;

  std::size_t of(PromptRole role) const {
    auto it = calls.find(role);
    return it == calls.end() ? 0 : it->second;
  }
};

/// Uniform access to a provider (live) or a replay store (offline), with
/// per-role call counting and optional transcript recording.
class Gateway {
 public:
  static Gateway live(std::unique_ptr<ChatProvider> provider, GatewayOptions options = {});
  static Gateway replay(ReplayStore store);

  Gateway(Gateway&&) noexcept = default;
  Gateway& operator=(Gateway&&) noexcept = default;

  std::string complete(PromptRole role, const std::string& prompt,
                       const DecodeParams& params);

  /// Appends every exchange to the given JSONL file.
  void record_to(const std::string& path);

  RoleCounters counters() const;
  bool is_replay() const { return provider_ == nullptr; }

 private:
  Gateway() = default;

  std::unique_ptr<ChatProvider> provider_;
  ReplayStore store_;
  GatewayOptions options_;
  std::string record_path_;

  struct Shared;
  std::shared_ptr<Shared> shared_;
};

// ---- prompt templates ----------------------------------------------------

std::string render_column_select_prompt(const Table& t, std::size_t k_rows);
std::string render_transpose_prompt(const Table& t);
std::string render_normalize_prompt(const Table& sub);
std::string render_normalize_retry_prompt(const std::string& previous_prompt,
                                          const std::string& reason);
std::string render_sql_prompt(const Table& t, const std::string& question,
                              std::size_t k_rows = 3);
std::string render_fact_sql_prompt(const Table& t, const std::string& statement,
                                   std::size_t k_rows = 3);
std::string render_sql_repair_prompt(const std::string& previous_prompt,
                                     const std::string& sql,
                                     const std::string& error);
std::string render_prematch_prompt(const std::vector<std::string>& predicted,
                                   const std::vector<std::string>& gold);

// ---- response parsers ----------------------------------------------------

/// Matches response tokens case-insensitively against raw and sanitized
/// column names; unknown names dropped with a warning; duplicates removed;
/// output follows the table's column order. Empty means "nothing to clean".
std::vector<std::string> parse_column_list(const std::string& raw_response,
                                           const Table& t,
                                           std::vector<std::string>* warnings = nullptr);

/// Parses a pipe-format table out of a model response. Prose before the
/// first pipe line is ignored. Throws RowCountMismatch, ColumnShrunk, or
/// Unparseable.
Table parse_table_text(const std::string& raw_response, std::size_t expected_cols,
                       std::size_t expected_rows);

/// yes/no decision, matched against the first recognizable token.
std::optional<bool> parse_yes_no(const std::string& raw_response);

/// First fenced SQL block if present, else the first SELECT/WITH statement.
std::optional<std::string> extract_sql(const std::string& raw_response);

}  // namespace normtab
