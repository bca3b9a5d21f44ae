#include "support/scripted_provider.hpp"

#include <array>
#include <cstdio>
#include <stdexcept>

namespace normtab::test {

std::string ScriptedProvider::complete(PromptRole role, const std::string& prompt,
                                       const DecodeParams&) {
  seen_.emplace_back(role, prompt);
  if (responses_.empty()) {
    throw std::runtime_error("ScriptedProvider: no response queued for role " +
                             std::string(to_string(role)));
  }
  std::string r = std::move(responses_.front());
  responses_.pop_front();
  return r;
}

Table make_table(std::string title, std::vector<std::string> header,
                 std::vector<std::vector<std::string>> rows) {
  Table t;
  t.title = std::move(title);
  t.columns = make_columns(header);
  for (auto& row : rows) {
    std::vector<CellValue> cells;
    cells.reserve(row.size());
    for (auto& c : row) {
      if (c.empty()) {
        cells.push_back(CellValue::null());
      } else {
        cells.push_back(CellValue::text(std::move(c)));
      }
    }
    t.rows.push_back(std::move(cells));
  }
  return t;
}

std::string fixtures_dir() {
#ifdef NORMTAB_FIXTURES_DIR
  return NORMTAB_FIXTURES_DIR;
#else
  return "tests/fixtures";
#endif
}

std::string cli_path() {
#ifdef NORMTAB_CLI_PATH
  return NORMTAB_CLI_PATH;
#else
  return "./normtab";
#endif
}

std::pair<int, std::string> run_command(const std::string& command) {
  std::array<char, 4096> buffer;
  std::string output;
  FILE* pipe = popen(command.c_str(), "r");
  if (!pipe) throw std::runtime_error("popen failed: " + command);
  while (std::size_t n = std::fread(buffer.data(), 1, buffer.size(), pipe)) {
    output.append(buffer.data(), n);
  }
  int status = pclose(pipe);
  int exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return {exit_code, output};
}

}  // namespace normtab::test
