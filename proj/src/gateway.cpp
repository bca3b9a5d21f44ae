#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include "normtab/gateway.hpp"

#include <openssl/evp.h>

#include <chrono>
#include <condition_variable>
#include <ctime>
#include <fstream>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "normtab/errors.hpp"

namespace normtab {

using nlohmann::json;

const char* to_string(PromptRole role) {
  switch (role) {
    case PromptRole::column_select: return "column_select";
    case PromptRole::transpose_detect: return "transpose_detect";
    case PromptRole::normalize: return "normalize";
    case PromptRole::text_to_sql: return "text_to_sql";
    case PromptRole::prematch: return "prematch";
  }
  return "?";
}

std::optional<PromptRole> prompt_role_from_string(std::string_view s) {
  if (s == "column_select") return PromptRole::column_select;
  if (s == "transpose_detect") return PromptRole::transpose_detect;
  if (s == "normalize") return PromptRole::normalize;
  if (s == "text_to_sql") return PromptRole::text_to_sql;
  if (s == "prematch") return PromptRole::prematch;
  return std::nullopt;
}

void DecodeParams::check() const {
  if (temperature < 0 || temperature > 2) throw Error("temperature out of [0,2]");
  if (top_p <= 0 || top_p > 1) throw Error("top_p out of (0,1]");
  if (sample_n < 1) throw Error("sample_n must be >= 1");
  if (max_tokens < 1) throw Error("max_tokens must be >= 1");
  if (num_shots < 0) throw Error("num_shots must be >= 0");
}

std::string sha256_hex(std::string_view data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1) {
    throw Error("sha256 failed");
  }
  static const char* hex = "0123456789abcdef";
  std::string out;
  out.reserve(len * 2);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[md[i] >> 4]);
    out.push_back(hex[md[i] & 0xF]);
  }
  return out;
}

std::string CompletionTranscript::to_json_line() const {
  json j;
  j["role"] = to_string(role);
  j["rendered_prompt"] = rendered_prompt;
  j["params"] = {{"temperature", params.temperature},
                 {"top_p", params.top_p},
                 {"sample_n", params.sample_n},
                 {"max_tokens", params.max_tokens},
                 {"num_shots", params.num_shots}};
  j["raw_response"] = raw_response;
  j["model_id"] = model_id;
  j["timestamp"] = timestamp;
  return j.dump();
}

CompletionTranscript CompletionTranscript::from_json_line(const std::string& line) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::exception& e) {
    throw SchemaError(std::string("transcript: invalid JSON: ") + e.what());
  }
  CompletionTranscript t;
  auto role = prompt_role_from_string(j.value("role", ""));
  if (!role) throw SchemaError("transcript: unknown role");
  t.role = *role;
  t.rendered_prompt = j.value("rendered_prompt", "");
  t.raw_response = j.value("raw_response", "");
  t.model_id = j.value("model_id", "");
  t.timestamp = j.value("timestamp", "");
  if (j.contains("params")) {
    const json& p = j["params"];
    t.params.temperature = p.value("temperature", 0.3);
    t.params.top_p = p.value("top_p", 1.0);
    t.params.sample_n = p.value("sample_n", 1);
    t.params.max_tokens = p.value("max_tokens", 100);
    t.params.num_shots = p.value("num_shots", 0);
  }
  return t;
}

// ---- HttpChatProvider ------------------------------------------------------

HttpChatProvider::HttpChatProvider(HttpProviderConfig config)
    : config_(std::move(config)) {
  const std::string& url = config_.base_url;
  auto scheme_end = url.find("://");
  std::size_t host_start = scheme_end == std::string::npos ? 0 : scheme_end + 3;
  auto path_start = url.find('/', host_start);
  if (path_start == std::string::npos) {
    host_ = url;
    path_prefix_ = "";
  } else {
    host_ = url.substr(0, path_start);
    path_prefix_ = url.substr(path_start);
    while (!path_prefix_.empty() && path_prefix_.back() == '/') path_prefix_.pop_back();
  }
}

std::string HttpChatProvider::complete(PromptRole, const std::string& prompt,
                                       const DecodeParams& params) {
  json body = {
      {"model", config_.model},
      {"messages", json::array({json{{"role", "user"}, {"content", prompt}}})},
      {"temperature", params.temperature},
      {"top_p", params.top_p},
      {"n", params.sample_n},
      {"max_tokens", params.max_tokens},
  };
  const std::string payload = body.dump();
  const std::string endpoint = path_prefix_ + "/chat/completions";

  httplib::Client client(host_);
  client.set_connection_timeout(config_.timeout_seconds);
  client.set_read_timeout(config_.timeout_seconds);
  httplib::Headers headers;
  if (!config_.api_key.empty()) {
    headers.emplace("Authorization", "Bearer " + config_.api_key);
  }

  std::string last_error;
  for (int attempt = 0; attempt < config_.max_attempts; ++attempt) {
    if (attempt > 0) {
      std::this_thread::sleep_for(
          std::chrono::milliseconds(config_.backoff_base_ms << (attempt - 1)));
    }
    auto res = client.Post(endpoint, headers, payload, "application/json");
    if (!res) {
      last_error = "transport error: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status == 429 || res->status >= 500) {
      last_error = "HTTP " + std::to_string(res->status);
      continue;
    }
    if (res->status != 200) {
      throw ProviderError("HTTP " + std::to_string(res->status) + ": " + res->body);
    }
    try {
      json reply = json::parse(res->body);
      return reply.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const json::exception& e) {
      throw ProviderError(std::string("cannot decode provider response: ") + e.what());
    }
  }
  throw ProviderError("provider unavailable after " +
                      std::to_string(config_.max_attempts) + " attempts (" +
                      last_error + ")");
}

// ---- ReplayStore -----------------------------------------------------------

namespace {

std::string replay_key(PromptRole role, const std::string& prompt) {
  return std::string(to_string(role)) + ":" + sha256_hex(prompt);
}

}  // namespace

ReplayStore ReplayStore::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open replay store: " + path);
  ReplayStore store;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    store.add(CompletionTranscript::from_json_line(line));
  }
  return store;
}

void ReplayStore::add(const CompletionTranscript& t) {
  std::string key = replay_key(t.role, t.rendered_prompt);
  auto [it, inserted] = entries_.emplace(key, t.raw_response);
  if (!inserted && it->second != t.raw_response) {
    throw Error("replay store holds conflicting responses for one prompt (role " +
                std::string(to_string(t.role)) + ")");
  }
}

std::optional<std::string> ReplayStore::find(PromptRole role,
                                             const std::string& prompt) const {
  auto it = entries_.find(replay_key(role, prompt));
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

// ---- Gateway ---------------------------------------------------------------

struct Gateway::Shared {
  std::mutex mu;
  std::condition_variable cv;
  int in_flight = 0;
  double tokens = 0;
  std::chrono::steady_clock::time_point last_refill = std::chrono::steady_clock::now();
  std::map<PromptRole, std::size_t> counts;
  std::mutex record_mu;
};

Gateway Gateway::live(std::unique_ptr<ChatProvider> provider, GatewayOptions options) {
  Gateway g;
  g.provider_ = std::move(provider);
  g.options_ = options;
  g.shared_ = std::make_shared<Shared>();
  g.shared_->tokens = options.requests_per_second;
  return g;
}

Gateway Gateway::replay(ReplayStore store) {
  Gateway g;
  g.store_ = std::move(store);
  g.shared_ = std::make_shared<Shared>();
  return g;
}

void Gateway::record_to(const std::string& path) { record_path_ = path; }

RoleCounters Gateway::counters() const {
  RoleCounters c;
  std::lock_guard lock(shared_->mu);
  c.calls = shared_->counts;
  return c;
}

namespace {

std::string utc_timestamp() {
  auto now = std::chrono::system_clock::now();
  std::time_t tt = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&tt, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

std::string Gateway::complete(PromptRole role, const std::string& prompt,
                              const DecodeParams& params) {
  params.check();
  {
    std::lock_guard lock(shared_->mu);
    ++shared_->counts[role];
  }

  std::string response;
  std::string model;
  if (!provider_) {
    auto found = store_.find(role, prompt);
    if (!found) {
      throw ReplayMissError(std::string("no recorded response for role ") +
                            to_string(role) + " (prompt hash " +
                            sha256_hex(prompt).substr(0, 12) + ")");
    }
    response = *found;
    model = "replay";
  } else {
    // bounded concurrency + token-bucket rate limit
    {
      std::unique_lock lock(shared_->mu);
      shared_->cv.wait(lock, [&] { return shared_->in_flight < options_.max_concurrency; });
      ++shared_->in_flight;
      if (options_.requests_per_second > 0) {
        while (true) {
          auto now = std::chrono::steady_clock::now();
          double elapsed = std::chrono::duration<double>(now - shared_->last_refill).count();
          shared_->tokens = std::min(options_.requests_per_second,
                                     shared_->tokens + elapsed * options_.requests_per_second);
          shared_->last_refill = now;
          if (shared_->tokens >= 1.0) {
            shared_->tokens -= 1.0;
            break;
          }
          lock.unlock();
          std::this_thread::sleep_for(std::chrono::milliseconds(10));
          lock.lock();
        }
      }
    }
    try {
      response = provider_->complete(role, prompt, params);
    } catch (...) {
      std::lock_guard lock(shared_->mu);
      --shared_->in_flight;
      shared_->cv.notify_one();
      throw;
    }
    model = provider_->model_id();
    {
      std::lock_guard lock(shared_->mu);
      --shared_->in_flight;
      shared_->cv.notify_one();
    }
  }

  if (!record_path_.empty()) {
    CompletionTranscript t;
    t.role = role;
    t.rendered_prompt = prompt;
    t.params = params;
    t.raw_response = response;
    t.model_id = model;
    t.timestamp = utc_timestamp();
    std::lock_guard lock(shared_->record_mu);
    std::ofstream out(record_path_, std::ios::app);
    if (!out) throw Error("cannot append transcript to " + record_path_);
    out << t.to_json_line() << '\n';
  }
  return response;
}

}  // namespace normtab
