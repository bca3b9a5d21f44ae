#include "normtab/config.hpp"

#include <cstdlib>
#include <map>
#include <sstream>

#include "normtab/errors.hpp"
#include "normtab/ingest.hpp"

namespace normtab {

namespace {

std::string trim_copy(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r");
  auto e = s.find_last_not_of(" \t\r");
  if (b == std::string::npos) return "";
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& v) {
  try {
    return std::stod(v);
  } catch (...) {
    throw SchemaError("config: " + key + " expects a number, got '" + v + "'");
  }
}

int to_int(const std::string& key, const std::string& v) {
  try {
    return std::stoi(v);
  } catch (...) {
    throw SchemaError("config: " + key + " expects an integer, got '" + v + "'");
  }
}

bool decode_key(DecodeParams& p, const std::string& field, const std::string& key,
                const std::string& value) {
  if (field == "temperature") {
    p.temperature = to_double(key, value);
  } else if (field == "top_p") {
    p.top_p = to_double(key, value);
  } else if (field == "sample_n") {
    p.sample_n = to_int(key, value);
  } else if (field == "max_tokens") {
    p.max_tokens = to_int(key, value);
  } else if (field == "num_shots") {
    p.num_shots = to_int(key, value);
  } else {
    return false;
  }
  return true;
}

}  // namespace

Config Config::from_text(const std::string& text) {
  Config cfg;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim_copy(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw SchemaError("config line " + std::to_string(line_no) +
                        ": expected key = value");
    }
    std::string key = trim_copy(line.substr(0, eq));
    std::string value = trim_copy(line.substr(eq + 1));

    if (key == "provider.base_url") {
      cfg.provider_base_url = value;
    } else if (key == "provider.model") {
      cfg.provider_model = value;
    } else if (key == "provider.max_attempts") {
      cfg.max_attempts = to_int(key, value);
    } else if (key == "provider.backoff_base_ms") {
      cfg.backoff_base_ms = to_int(key, value);
    } else if (key == "provider.max_concurrency") {
      cfg.max_concurrency = to_int(key, value);
    } else if (key == "provider.requests_per_second") {
      cfg.requests_per_second = to_double(key, value);
    } else if (key == "pipeline.date_order") {
      if (value == "month_first") {
        cfg.date_order = DateOrder::month_first;
      } else if (value == "day_first") {
        cfg.date_order = DateOrder::day_first;
      } else {
        throw SchemaError("config: pipeline.date_order must be month_first or day_first");
      }
    } else if (key == "pipeline.diagnosis_threshold") {
      cfg.diagnosis_threshold = to_double(key, value);
    } else if (key == "pipeline.split_apply_threshold") {
      cfg.split_apply_threshold = to_double(key, value);
    } else if (key == "pipeline.sample_rows") {
      cfg.sample_rows = static_cast<std::size_t>(to_int(key, value));
    } else if (key.rfind("decode.", 0) == 0) {
      auto rest = key.substr(7);
      auto dot = rest.find('.');
      if (dot == std::string::npos) {
        throw SchemaError("config: bad decode key '" + key + "'");
      }
      std::string role = rest.substr(0, dot);
      std::string field = rest.substr(dot + 1);
      DecodeParams* p = nullptr;
      if (role == "column_select") p = &cfg.column_select;
      else if (role == "transpose_detect") p = &cfg.transpose_detect;
      else if (role == "normalize") p = &cfg.normalize;
      else if (role == "text_to_sql") p = &cfg.text_to_sql;
      else if (role == "prematch") p = &cfg.prematch;
      if (!p || !decode_key(*p, field, key, value)) {
        throw SchemaError("config: unknown key '" + key + "'");
      }
    } else {
      throw SchemaError("config: unknown key '" + key + "'");
    }
  }
  return cfg;
}

Config Config::load(const std::string& path) {
  Config cfg = from_text(read_file(path));
  cfg.apply_env_overrides();
  return cfg;
}

void Config::apply_env_overrides() {
  if (const char* key = std::getenv("NORMTAB_API_KEY")) api_key = key;
  if (const char* url = std::getenv("NORMTAB_BASE_URL")) provider_base_url = url;
  if (const char* model = std::getenv("NORMTAB_MODEL")) provider_model = model;
}

}  // namespace normtab
