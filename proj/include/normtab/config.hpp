#pragma once

#include <string>

#include "normtab/gateway.hpp"
#include "normtab/norm_rules.hpp"

namespace normtab {

/// Every tunable in one place. Decode defaults per role follow the reference
/// hyper-parameters (column selection 0.3/1/1/100 with 6 shots, transpose
/// detection 0.3/1/1/100 with 1 shot, normalization 0.7/1/1/4500 with 1 shot).
struct Config {
  std::string provider_base_url = "https://api.openai.com/v1";
  std::string provider_model = "gpt-3.5-turbo-0125";
  std::string api_key;

  DecodeParams column_select{0.3, 1.0, 1, 100, 6};
  DecodeParams transpose_detect{0.3, 1.0, 1, 100, 1};
  DecodeParams normalize{0.7, 1.0, 1, 4500, 1};
  DecodeParams text_to_sql{0.3, 1.0, 1, 300, 2};
  DecodeParams prematch{0.0, 1.0, 1, 10, 2};

  DateOrder date_order = DateOrder::month_first;
  double diagnosis_threshold = 0.3;
  double split_apply_threshold = 0.6;
  std::size_t sample_rows = 3;

  int max_attempts = 3;
  int backoff_base_ms = 250;
  int max_concurrency = 4;
  double requests_per_second = 0;

  /// Parses a key = value document ('#' comments allowed). Unknown keys are
  /// rejected. Applies NORMTAB_API_KEY / NORMTAB_BASE_URL / NORMTAB_MODEL
  /// environment overrides afterwards.
  static Config load(const std::string& path);
  static Config from_text(const std::string& text);
  void apply_env_overrides();

  HttpProviderConfig provider_config() const {
    return HttpProviderConfig{provider_base_url, provider_model, api_key,
                              max_attempts, backoff_base_ms, 120};
  }
};

}  // namespace normtab
