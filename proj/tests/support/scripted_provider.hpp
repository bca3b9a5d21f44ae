#pragma once

#include <deque>
#include <string>

#include "normtab/gateway.hpp"

namespace normtab::test {

/// Fake LLM fed by a FIFO of canned responses. Used both by unit tests and
/// by the fixture recorder, which wraps it in a recording Gateway so the
/// committed replay stores match the real prompt templates exactly.
class ScriptedProvider : public ChatProvider {
 public:
  void push(std::string response) { responses_.push_back(std::move(response)); }
  std::size_t remaining() const { return responses_.size(); }

  std::string complete(PromptRole role, const std::string& prompt,
                       const DecodeParams& params) override;
  std::string model_id() const override { return "scripted"; }

  const std::vector<std::pair<PromptRole, std::string>>& seen() const { return seen_; }

 private:
  std::deque<std::string> responses_;
  std::vector<std::pair<PromptRole, std::string>> seen_;
};

/// Small helpers shared across test binaries.
Table make_table(std::string title, std::vector<std::string> header,
                 std::vector<std::vector<std::string>> rows);

std::string fixtures_dir();
std::string cli_path();

/// Runs a command, captures stdout, returns (exit_code, output).
std::pair<int, std::string> run_command(const std::string& command);

}  // namespace normtab::test
