#include "normtab/norm_rules.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <map>
#include <set>
#include <unordered_map>

namespace normtab {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::string to_lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

bool all_digits(std::string_view s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](unsigned char c) {
    return std::isdigit(c) != 0;
  });
}

int month_from_name(std::string_view token) {
  static const std::unordered_map<std::string, int> kMonths = {
      {"january", 1},  {"jan", 1},  {"february", 2}, {"feb", 2},
      {"march", 3},    {"mar", 3},  {"april", 4},    {"apr", 4},
      {"may", 5},      {"june", 6}, {"jun", 6},      {"july", 7},
      {"jul", 7},      {"august", 8}, {"aug", 8},    {"september", 9},
      {"sept", 9},     {"sep", 9},  {"october", 10}, {"oct", 10},
      {"november", 11}, {"nov", 11}, {"december", 12}, {"dec", 12},
  };
  std::string key = to_lower(token);
  while (!key.empty() && key.back() == '.') key.pop_back();
  auto it = kMonths.find(key);
  return it == kMonths.end() ? 0 : it->second;
}

// "10", "10th", "3rd" -> 10, 3; 0 when not a day token
int day_from_token(std::string_view token) {
  std::string t = to_lower(token);
  for (const char* suffix : {"st", "nd", "rd", "th"}) {
    if (t.size() > 2 && t.ends_with(suffix)) {
      t.resize(t.size() - 2);
      break;
    }
  }
  if (!all_digits(t) || t.size() > 2) return 0;
  return std::atoi(t.c_str());
}

std::optional<int> parse_int_field(std::string_view s, std::size_t min_len,
                                   std::size_t max_len) {
  if (s.size() < min_len || s.size() > max_len || !all_digits(s)) return std::nullopt;
  int v = 0;
  std::from_chars(s.data(), s.data() + s.size(), v);
  return v;
}

std::vector<std::string> split_on(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= s.size(); ++i) {
    if (i == s.size() || s[i] == sep) {
      out.emplace_back(s.substr(start, i - start));
      start = i + 1;
    }
  }
  return out;
}

const std::array<std::string_view, 5> kCurrencySymbols = {"$", "€", "£", "¥", "₹"};

bool strip_currency_prefix(std::string_view& s, std::string* taken) {
  for (auto sym : kCurrencySymbols) {
    if (s.starts_with(sym)) {
      if (taken) taken->assign(sym);
      s.remove_prefix(sym.size());
      return true;
    }
  }
  return false;
}

bool strip_currency_suffix(std::string_view& s, std::string* taken) {
  for (auto sym : kCurrencySymbols) {
    if (s.ends_with(sym)) {
      if (taken) taken->assign(sym);
      s.remove_suffix(sym.size());
      return true;
    }
  }
  return false;
}

bool is_footnote_marker(std::string_view s) {
  if (s.size() < 3 || s.size() > 6 || s.front() != '[' || s.back() != ']') return false;
  return std::all_of(s.begin() + 1, s.end() - 1, [](unsigned char c) {
    return std::isalnum(c) != 0;
  });
}

// Numeric token: sign? digits with optional 3-digit comma groups, optional
// fraction. Returns [begin, end) or npos pair.
struct TokenSpan {
  std::size_t begin = std::string_view::npos;
  std::size_t end = std::string_view::npos;
};

std::vector<TokenSpan> numeric_tokens(std::string_view s) {
  std::vector<TokenSpan> tokens;
  std::size_t i = 0;
  while (i < s.size()) {
    if (!std::isdigit(static_cast<unsigned char>(s[i]))) {
      ++i;
      continue;
    }
    std::size_t begin = i;
    // sign belongs to the token only at start of string or after space/paren/currency
    if (begin > 0 && (s[begin - 1] == '+' || s[begin - 1] == '-')) {
      char before = begin >= 2 ? s[begin - 2] : ' ';
      if (before == ' ' || before == '(' || begin == 1) begin -= 1;
    }
    // integer part with comma groups
    std::size_t j = i;
    while (j < s.size() && std::isdigit(static_cast<unsigned char>(s[j]))) ++j;
    while (j + 3 < s.size() && s[j] == ',' && std::isdigit(static_cast<unsigned char>(s[j + 1])) &&
           std::isdigit(static_cast<unsigned char>(s[j + 2])) &&
           std::isdigit(static_cast<unsigned char>(s[j + 3])) &&
           (j + 4 >= s.size() || !std::isdigit(static_cast<unsigned char>(s[j + 4])))) {
      j += 4;
    }
    if (j < s.size() && s[j] == '.' && j + 1 < s.size() &&
        std::isdigit(static_cast<unsigned char>(s[j + 1]))) {
      ++j;
      while (j < s.size() && std::isdigit(static_cast<unsigned char>(s[j]))) ++j;
    }
    tokens.push_back({begin, j});
    i = j;
  }
  return tokens;
}

}  // namespace

std::optional<Date> normalize_date(std::string_view input, DateOrder order) {
  std::string_view s = trim(input);
  if (s.empty()) return std::nullopt;

  auto make = [](int y, int m, int d) -> std::optional<Date> {
    if (!is_valid_date(y, m, d)) return std::nullopt;
    return Date{y, m, d};
  };

  // ISO: YYYY-M-D
  if (s.find('-') != std::string_view::npos) {
    auto parts = split_on(s, '-');
    if (parts.size() == 3) {
      auto y = parse_int_field(trim(parts[0]), 4, 4);
      auto m = parse_int_field(trim(parts[1]), 1, 2);
      auto d = parse_int_field(trim(parts[2]), 1, 2);
      if (y && m && d) return make(*y, *m, *d);
    }
    return std::nullopt;
  }

  // Slash-delimited: M/D/YYYY (or D/M/YYYY under day_first). An impossible
  // month under the configured order falls back to the only valid reading.
  if (s.find('/') != std::string_view::npos) {
    auto parts = split_on(s, '/');
    if (parts.size() == 3) {
      auto a = parse_int_field(trim(parts[0]), 1, 2);
      auto b = parse_int_field(trim(parts[1]), 1, 2);
      auto y = parse_int_field(trim(parts[2]), 4, 4);
      if (a && b && y) {
        int m = order == DateOrder::month_first ? *a : *b;
        int d = order == DateOrder::month_first ? *b : *a;
        if (auto date = make(*y, m, d)) return date;
        if (auto date = make(*y, d, m); date && m > 12) return date;
      }
    }
    return std::nullopt;
  }

  // Month-name forms: "September 10, 1995" / "10 September 1995"
  std::string buf(s);
  std::replace(buf.begin(), buf.end(), ',', ' ');
  std::vector<std::string> tokens;
  for (auto& tok : split_on(buf, ' ')) {
    if (!tok.empty()) tokens.push_back(tok);
  }
  if (tokens.size() != 3) return std::nullopt;
  auto year = parse_int_field(tokens[2], 4, 4);
  if (!year) return std::nullopt;
  if (int m = month_from_name(tokens[0])) {
    int d = day_from_token(tokens[1]);
    if (d) return make(*year, m, d);
    return std::nullopt;
  }
  if (int m = month_from_name(tokens[1])) {
    int d = day_from_token(tokens[0]);
    if (d) return make(*year, m, d);
  }
  return std::nullopt;
}

std::optional<NumberParse> normalize_number(std::string_view input) {
  std::string_view s = trim(input);
  if (s.empty()) return std::nullopt;

  // footnote markers hold digits, so peel them off before tokenizing
  std::vector<std::string> footnotes;
  while (!s.empty() && s.back() == ']') {
    auto open = s.rfind('[');
    if (open == std::string_view::npos || !is_footnote_marker(s.substr(open))) break;
    footnotes.insert(footnotes.begin(), std::string(s.substr(open)));
    s = trim(s.substr(0, open));
  }
  if (s.empty()) return std::nullopt;

  auto tokens = numeric_tokens(s);
  if (tokens.size() != 1) return std::nullopt;
  std::string_view token = s.substr(tokens[0].begin, tokens[0].end - tokens[0].begin);

  std::vector<std::string> removed;

  // prefix: spaces and currency symbols only
  std::string_view prefix = s.substr(0, tokens[0].begin);
  while (!prefix.empty()) {
    if (std::isspace(static_cast<unsigned char>(prefix.back()))) {
      prefix.remove_suffix(1);
      continue;
    }
    std::string taken;
    std::string_view before = prefix;
    if (strip_currency_suffix(prefix, &taken)) {
      removed.insert(removed.begin(), taken);
      continue;
    }
    (void)before;
    return std::nullopt;
  }

  // suffix: %, currency, footnotes, an attached ordinal, at most one unit word
  std::string_view suffix = s.substr(tokens[0].end);
  bool had_word = false;
  bool had_ordinal = false;
  bool first_piece = true;
  while (!suffix.empty()) {
    if (std::isspace(static_cast<unsigned char>(suffix.front()))) {
      suffix.remove_prefix(1);
      first_piece = false;
      continue;
    }
    if (suffix.front() == '%') {
      removed.emplace_back("%");
      suffix.remove_prefix(1);
      first_piece = false;
      continue;
    }
    std::string taken;
    if (strip_currency_prefix(suffix, &taken)) {
      removed.push_back(taken);
      first_piece = false;
      continue;
    }
    if (suffix.front() == '[') {
      auto close = suffix.find(']');
      if (close != std::string_view::npos &&
          is_footnote_marker(suffix.substr(0, close + 1))) {
        removed.emplace_back(suffix.substr(0, close + 1));
        suffix.remove_prefix(close + 1);
        first_piece = false;
        continue;
      }
      return std::nullopt;
    }
    if (std::isalpha(static_cast<unsigned char>(suffix.front()))) {
      std::size_t j = 0;
      while (j < suffix.size() && std::isalpha(static_cast<unsigned char>(suffix[j]))) ++j;
      std::string_view word = suffix.substr(0, j);
      bool attached = first_piece;  // no space between token and word
      std::string lw = to_lower(word);
      if (attached && (lw == "st" || lw == "nd" || lw == "rd" || lw == "th") &&
          token.find('.') == std::string_view::npos) {
        if (had_ordinal || had_word) return std::nullopt;
        had_ordinal = true;
      } else {
        if (had_word || had_ordinal || word.size() > 16) return std::nullopt;
        had_word = true;
      }
      removed.emplace_back(word);
      suffix.remove_prefix(j);
      if (!suffix.empty() && suffix.front() == '.') {
        removed.back().push_back('.');
        suffix.remove_prefix(1);
      }
      first_piece = false;
      continue;
    }
    return std::nullopt;
  }

  // parse the token, commas dropped
  std::string digits;
  digits.reserve(token.size());
  for (char c : token) {
    if (c != ',') digits.push_back(c);
  }

  CellValue value;
  if (digits.find('.') == std::string_view::npos) {
    std::int64_t v = 0;
    auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), v);
    if (ec == std::errc{} && ptr == digits.data() + digits.size()) {
      value = CellValue::integer(v);
    } else {
      double dv = 0;
      auto [p2, e2] = std::from_chars(digits.data(), digits.data() + digits.size(), dv);
      if (e2 != std::errc{} || p2 != digits.data() + digits.size()) return std::nullopt;
      value = CellValue::real(dv);
    }
  } else {
    double dv = 0;
    auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), dv);
    if (ec != std::errc{} || ptr != digits.data() + digits.size()) return std::nullopt;
    if (std::floor(dv) == dv && std::abs(dv) <= 9007199254740992.0) {
      value = CellValue::integer(static_cast<std::int64_t>(dv));
    } else {
      value = CellValue::real(dv);
    }
  }

  removed.insert(removed.end(), footnotes.begin(), footnotes.end());
  std::string stripped;
  for (std::size_t i = 0; i < removed.size(); ++i) {
    if (i) stripped += ' ';
    stripped += removed[i];
  }
  return NumberParse{std::move(value), std::move(stripped)};
}

bool is_missing_marker(std::string_view s) {
  std::string t = to_lower(trim(s));
  return t.empty() || t == "n/a" || t == "na" || t == "-" || t == "—";
}

std::optional<YearRange> split_range(std::string_view input) {
  std::string_view s = trim(input);
  std::size_t sep = std::string_view::npos;
  for (std::size_t i = 1; i < s.size(); ++i) {
    if (s[i] == '-' || s[i] == '/') {
      sep = i;
      break;
    }
  }
  if (sep == std::string_view::npos) return std::nullopt;
  auto y1 = parse_int_field(trim(s.substr(0, sep)), 4, 4);
  std::string_view right = trim(s.substr(sep + 1));
  if (!y1 || right.empty() || !all_digits(right)) return std::nullopt;

  std::int64_t start = *y1;
  std::int64_t end = 0;
  if (right.size() == 4) {
    end = *parse_int_field(right, 4, 4);
  } else if (right.size() == 2) {
    end = (start / 100) * 100 + *parse_int_field(right, 2, 2);
    if (end < start) end += 100;
  } else {
    return std::nullopt;
  }
  if (end < start) return std::nullopt;
  return YearRange{start, end};
}

namespace {

bool word_prefix(std::string_view s) {
  if (s.empty() || !std::isalpha(static_cast<unsigned char>(s.front()))) return false;
  return std::all_of(s.begin(), s.end(), [](unsigned char c) {
    return std::isalpha(c) || c == ' ' || c == '.' || c == '\'' || c == '&' || c == ',';
  });
}

bool score_token(std::string_view s) {
  std::size_t i = 0;
  while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
  if (i == 0 || i >= s.size()) return false;
  while (i < s.size() && s[i] == ' ') ++i;
  if (i >= s.size() || (s[i] != '-' && s[i] != ':')) return false;
  ++i;
  while (i < s.size() && s[i] == ' ') ++i;
  std::size_t digits = 0;
  while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) {
    ++i;
    ++digits;
  }
  return digits > 0 && i == s.size();
}

// splits "won 2-1" style cells: word part + trailing token
std::optional<std::pair<std::string, std::string>> match_prefix_suffix(
    std::string_view s, SplitSpec::Suffix shape) {
  std::string_view t = trim(s);
  auto space = t.find_last_of(' ');
  while (space != std::string_view::npos) {
    std::string_view head = trim(t.substr(0, space));
    std::string_view tail = trim(t.substr(space + 1));
    bool tail_ok = shape == SplitSpec::Suffix::score
                       ? score_token(tail)
                       : static_cast<bool>(normalize_number(tail));
    if (tail_ok && word_prefix(head)) {
      return std::make_pair(std::string(head), std::string(tail));
    }
    if (space == 0) break;
    space = t.find_last_of(' ', space - 1);
  }
  // score may itself contain spaces ("2 - 1"): retry splitting at the first
  // digit of the trailing score
  if (shape == SplitSpec::Suffix::score) {
    auto digit = t.find_first_of("0123456789");
    if (digit != std::string_view::npos && digit > 0) {
      std::string_view head = trim(t.substr(0, digit));
      std::string_view tail = trim(t.substr(digit));
      if (score_token(tail) && word_prefix(head)) {
        return std::make_pair(std::string(head), std::string(tail));
      }
    }
  }
  return std::nullopt;
}

std::optional<std::pair<std::string, std::string>> match_parenthetical(
    std::string_view s) {
  std::string_view t = trim(s);
  if (t.size() < 4 || t.back() != ')') return std::nullopt;
  auto open = t.rfind('(');
  if (open == std::string_view::npos || open == 0) return std::nullopt;
  std::string_view head = trim(t.substr(0, open));
  std::string_view inner = trim(t.substr(open + 1, t.size() - open - 2));
  if (head.empty() || inner.empty()) return std::nullopt;
  return std::make_pair(std::string(head), std::string(inner));
}

std::vector<std::string> split_on_delimiter(std::string_view s,
                                            const std::string& delim) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    auto pos = s.find(delim, start);
    if (pos == std::string_view::npos) {
      parts.emplace_back(trim(s.substr(start)));
      break;
    }
    parts.emplace_back(trim(s.substr(start, pos - start)));
    start = pos + delim.size();
  }
  return parts;
}

}  // namespace

std::optional<SplitSpec> infer_split_spec(const std::vector<std::string>& cells,
                                          double min_share) {
  std::vector<std::string> live;
  for (const auto& c : cells) {
    if (!is_missing_marker(c)) live.push_back(c);
  }
  if (live.empty()) return std::nullopt;
  auto share = [&](auto&& pred) {
    std::size_t hits = 0;
    for (const auto& c : live) {
      if (pred(c)) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(live.size());
  };

  if (share([](const std::string& c) {
        return match_prefix_suffix(c, SplitSpec::Suffix::score).has_value();
      }) >= min_share) {
    SplitSpec spec;
    spec.kind = SplitSpec::Kind::prefix_suffix;
    spec.suffix_shape = SplitSpec::Suffix::score;
    spec.parts = 2;
    spec.name_suffixes = {"_type", "_score"};
    return spec;
  }
  if (share([](const std::string& c) {
        return match_prefix_suffix(c, SplitSpec::Suffix::number).has_value();
      }) >= min_share) {
    SplitSpec spec;
    spec.kind = SplitSpec::Kind::prefix_suffix;
    spec.suffix_shape = SplitSpec::Suffix::number;
    spec.parts = 2;
    spec.name_suffixes = {"_type", "_value"};
    return spec;
  }
  if (share([](const std::string& c) { return match_parenthetical(c).has_value(); }) >=
      min_share) {
    SplitSpec spec;
    spec.kind = SplitSpec::Kind::delimiter;
    spec.delimiter = "(";  // sentinel; split_composite special-cases it
    spec.parts = 2;
    spec.name_suffixes = {"", "_detail"};
    return spec;
  }
  for (const std::string delim : {" - ", " / ", "; "}) {
    std::map<std::size_t, std::size_t> count_freq;
    for (const auto& c : live) {
      auto parts = split_on_delimiter(c, delim);
      if (parts.size() >= 2) ++count_freq[parts.size()];
    }
    for (auto [parts, freq] : count_freq) {
      if (parts <= 4 &&
          static_cast<double>(freq) / static_cast<double>(live.size()) >= min_share) {
        SplitSpec spec;
        spec.kind = SplitSpec::Kind::delimiter;
        spec.delimiter = delim;
        spec.parts = parts;
        for (std::size_t i = 1; i <= parts; ++i) {
          spec.name_suffixes.push_back("_" + std::to_string(i));
        }
        return spec;
      }
    }
  }
  return std::nullopt;
}

std::vector<CellValue> split_composite(std::string_view s, const SplitSpec& spec) {
  std::vector<CellValue> out;
  auto pad_original = [&]() {
    out.assign(spec.parts, CellValue::null());
    out[0] = CellValue::text(std::string(trim(s)));
  };

  if (spec.kind == SplitSpec::Kind::prefix_suffix) {
    if (auto m = match_prefix_suffix(s, spec.suffix_shape)) {
      out.push_back(CellValue::text(m->first));
      out.push_back(CellValue::text(m->second));
      return out;
    }
    pad_original();
    return out;
  }
  if (spec.delimiter == "(") {
    if (auto m = match_parenthetical(s)) {
      out.push_back(CellValue::text(m->first));
      out.push_back(CellValue::text(m->second));
      return out;
    }
    pad_original();
    return out;
  }
  auto parts = split_on_delimiter(s, spec.delimiter);
  if (parts.size() == spec.parts) {
    for (auto& p : parts) out.push_back(CellValue::text(std::move(p)));
    return out;
  }
  pad_original();
  return out;
}

const char* to_string(ColumnIssue issue) {
  switch (issue) {
    case ColumnIssue::non_iso_date: return "non_iso_date";
    case ColumnIssue::formatted_number: return "formatted_number";
    case ColumnIssue::na_or_blank: return "na_or_blank";
    case ColumnIssue::value_range: return "value_range";
    case ColumnIssue::composite: return "composite";
    case ColumnIssue::extraneous_text: return "extraneous_text";
  }
  return "?";
}

std::vector<ColumnDiagnosis> diagnose_columns(const Table& t, double threshold,
                                              DateOrder order) {
  std::vector<ColumnDiagnosis> out;
  out.reserve(t.col_count());
  for (std::size_t c = 0; c < t.col_count(); ++c) {
    ColumnDiagnosis diag;
    diag.sql_name = t.columns[c].sql_name;

    std::vector<std::string> live;
    std::size_t markers = 0;
    std::size_t total = t.row_count();
    for (const auto& row : t.rows) {
      const CellValue& v = row[c];
      if (v.is_null()) continue;
      std::string text = v.render();
      if (v.is_text() && is_missing_marker(text)) {
        ++markers;
        continue;
      }
      live.push_back(std::move(text));
    }

    if (total > 0 &&
        static_cast<double>(markers) / static_cast<double>(total) >= threshold) {
      diag.issues.insert(ColumnIssue::na_or_blank);
    }
    if (!live.empty()) {
      std::size_t dates = 0, numbers = 0, extraneous = 0, ranges = 0;
      for (const auto& s : live) {
        if (auto d = normalize_date(s, order); d && d->iso() != s) ++dates;
        if (auto n = normalize_number(s)) {
          if (n->value.render() != s) ++numbers;
          if (!n->stripped.empty()) ++extraneous;
        }
        if (split_range(s)) ++ranges;
      }
      auto flag = [&](std::size_t hits, ColumnIssue issue) {
        if (static_cast<double>(hits) / static_cast<double>(live.size()) >= threshold) {
          diag.issues.insert(issue);
        }
      };
      flag(dates, ColumnIssue::non_iso_date);
      flag(numbers, ColumnIssue::formatted_number);
      flag(extraneous, ColumnIssue::extraneous_text);
      flag(ranges, ColumnIssue::value_range);
      if (infer_split_spec(live, threshold)) diag.issues.insert(ColumnIssue::composite);
    }
    out.push_back(std::move(diag));
  }
  return out;
}

bool detect_aggregate_row(const Table& t) {
  if (t.row_count() < 2) return false;
  static const std::array<std::string_view, 5> kKeywords = {"total", "sum", "average",
                                                            "overall", "all"};
  for (const auto& cell : t.rows.back()) {
    std::string text = to_lower(trim(cell.render()));
    for (auto kw : kKeywords) {
      if (text.starts_with(kw)) return true;
    }
  }
  return false;
}

const char* to_string(Orientation o) {
  switch (o) {
    case Orientation::row_oriented: return "row_oriented";
    case Orientation::column_oriented: return "column_oriented";
    case Orientation::uncertain: return "uncertain";
  }
  return "?";
}

namespace {

enum class CellClass { number, date, text };

std::optional<CellClass> classify_cell(const CellValue& v, DateOrder order) {
  if (v.is_null()) return std::nullopt;
  if (v.is_integer() || v.is_real()) return CellClass::number;
  if (v.is_date()) return CellClass::date;
  const std::string text = v.render();
  if (is_missing_marker(text)) return std::nullopt;
  if (normalize_date(text, order)) return CellClass::date;
  if (normalize_number(text) || split_range(text)) return CellClass::number;
  return CellClass::text;
}

double dominant_share(const std::map<CellClass, std::size_t>& counts, std::size_t n) {
  if (n == 0) return 1.0;
  std::size_t best = 0;
  for (auto& [cls, k] : counts) best = std::max(best, k);
  return static_cast<double>(best) / static_cast<double>(n);
}

// A well-oriented table has textual headers, type-homogeneous columns and
// type-mixed rows; the score rewards the first two and penalizes homogeneous
// rows (the signature of a transposed table).
double orientation_score(const Table& t, DateOrder order) {
  std::size_t textual_headers = 0;
  for (const auto& c : t.columns) {
    bool numeric = normalize_number(c.raw_name).has_value() ||
                   normalize_date(c.raw_name, order).has_value() ||
                   split_range(c.raw_name).has_value();
    if (!numeric) ++textual_headers;
  }
  double header_share =
      t.columns.empty() ? 0.0
                        : static_cast<double>(textual_headers) /
                              static_cast<double>(t.columns.size());

  double col_sum = 0;
  for (std::size_t c = 0; c < t.col_count(); ++c) {
    std::map<CellClass, std::size_t> counts;
    std::size_t n = 0;
    for (const auto& row : t.rows) {
      if (auto cls = classify_cell(row[c], order)) {
        ++counts[*cls];
        ++n;
      }
    }
    col_sum += dominant_share(counts, n);
  }
  double col_homogeneity =
      t.col_count() == 0 ? 0.0 : col_sum / static_cast<double>(t.col_count());

  double row_sum = 0;
  for (const auto& row : t.rows) {
    std::map<CellClass, std::size_t> counts;
    std::size_t n = 0;
    for (const auto& cell : row) {
      if (auto cls = classify_cell(cell, order)) {
        ++counts[*cls];
        ++n;
      }
    }
    row_sum += dominant_share(counts, n);
  }
  double row_homogeneity =
      t.row_count() == 0 ? 0.0 : row_sum / static_cast<double>(t.row_count());

  return header_share + col_homogeneity - row_homogeneity;
}

}  // namespace

Orientation detect_orientation(const Table& t, DateOrder order) {
  if (t.row_count() < 2 || t.col_count() < 2) return Orientation::uncertain;
  double as_is = orientation_score(t, order);
  double flipped = orientation_score(transpose(t), order);
  constexpr double kEps = 1e-9;
  if (as_is > flipped + kEps) return Orientation::row_oriented;
  if (flipped > as_is + kEps) return Orientation::column_oriented;
  return Orientation::uncertain;
}

CellValue infer_cell(std::string_view text, const std::set<std::string>& null_tokens) {
  if (text.empty()) return CellValue::null();
  if (null_tokens.count(std::string(text))) return CellValue::null();

  {
    std::int64_t v = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec == std::errc{} && ptr == text.data() + text.size() &&
        std::to_string(v) == text) {
      return CellValue::integer(v);
    }
  }
  {
    double v = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec == std::errc{} && ptr == text.data() + text.size() &&
        render_real(v) == text) {
      return CellValue::real(v);
    }
  }
  if (text.size() == 10 && text[4] == '-' && text[7] == '-') {
    if (auto d = normalize_date(text); d && d->iso() == text) {
      return CellValue::date(*d);
    }
  }
  return CellValue::text(std::string(text));
}

void retype_columns(Table& t) {
  for (std::size_t c = 0; c < t.col_count(); ++c) {
    bool any = false, ints = true, reals = true, dates = true;
    for (const auto& row : t.rows) {
      const CellValue& v = row[c];
      if (v.is_null()) continue;
      any = true;
      if (!v.is_integer()) ints = false;
      if (!v.is_integer() && !v.is_real()) reals = false;
      if (!v.is_date()) dates = false;
    }
    if (!any) {
      t.columns[c].declared_type = ColumnType::text;
    } else if (ints) {
      t.columns[c].declared_type = ColumnType::integer;
    } else if (reals) {
      t.columns[c].declared_type = ColumnType::real;
      for (auto& row : t.rows) {
        CellValue& v = row[c];
        if (v.is_integer()) v = CellValue::real(static_cast<double>(v.as_integer()));
      }
    } else if (dates) {
      t.columns[c].declared_type = ColumnType::date;
    } else {
      t.columns[c].declared_type = ColumnType::text;
    }
  }
}

namespace {

CellValue normalize_atomic(const std::string& text, const RulesOptions& opt,
                           std::set<std::string>* stripped_seen) {
  if (is_missing_marker(text)) return CellValue::null();
  if (opt.map_null_tokens && (text == "NULL" || text == "null" || text == "None")) {
    return CellValue::null();
  }
  if (auto d = normalize_date(text, opt.date_order)) return CellValue::date(*d);
  if (auto n = normalize_number(text)) {
    if (!n->stripped.empty() && stripped_seen) stripped_seen->insert(n->stripped);
    return n->value;
  }
  return CellValue::text(text);
}

}  // namespace

RulesNormalizeResult normalize_table_rules(const Table& t,
                                           const std::vector<std::string>& columns,
                                           const RulesOptions& opt) {
  std::set<std::string> targets(columns.begin(), columns.end());
  bool all = targets.empty();

  RulesNormalizeResult result;
  result.table.title = t.title;
  result.table.source_id = t.source_id;

  struct Group {
    std::vector<std::string> raw_names;
    std::vector<std::vector<CellValue>> part_cells;  // parts x rows
  };
  std::vector<Group> groups;

  for (std::size_t c = 0; c < t.col_count(); ++c) {
    const auto& meta = t.columns[c];
    Group g;
    if (!all && !targets.count(meta.sql_name)) {
      g.raw_names = {meta.raw_name};
      g.part_cells.resize(1);
      for (const auto& row : t.rows) g.part_cells[0].push_back(row[c]);
      groups.push_back(std::move(g));
      continue;
    }

    std::vector<std::string> texts;
    texts.reserve(t.row_count());
    for (const auto& row : t.rows) texts.push_back(row[c].render());

    std::vector<std::string> live;
    for (const auto& s : texts) {
      if (!is_missing_marker(s)) live.push_back(s);
    }

    std::size_t range_hits = 0;
    for (const auto& s : live) {
      if (split_range(s)) ++range_hits;
    }
    bool split_ranges =
        !live.empty() && static_cast<double>(range_hits) /
                                 static_cast<double>(live.size()) >=
                             opt.split_apply_threshold;

    std::set<std::string> stripped_seen;
    if (split_ranges) {
      g.raw_names = {meta.sql_name + "_start", meta.sql_name + "_end"};
      g.part_cells.resize(2);
      for (const auto& s : texts) {
        if (is_missing_marker(s)) {
          g.part_cells[0].push_back(CellValue::null());
          g.part_cells[1].push_back(CellValue::null());
        } else if (auto r = split_range(s)) {
          g.part_cells[0].push_back(CellValue::integer(r->start));
          g.part_cells[1].push_back(CellValue::integer(r->end));
        } else {
          g.part_cells[0].push_back(normalize_atomic(s, opt, &stripped_seen));
          g.part_cells[1].push_back(CellValue::null());
        }
      }
      result.notes.push_back("column '" + meta.sql_name + "' split into " +
                             g.raw_names[0] + "/" + g.raw_names[1]);
    } else if (auto spec = infer_split_spec(live, opt.split_apply_threshold)) {
      g.part_cells.resize(spec->parts);
      for (const auto& suffix : spec->name_suffixes) {
        g.raw_names.push_back(meta.sql_name + suffix);
      }
      for (const auto& s : texts) {
        if (is_missing_marker(s)) {
          for (auto& part : g.part_cells) part.push_back(CellValue::null());
          continue;
        }
        auto parts = split_composite(s, *spec);
        for (std::size_t p = 0; p < spec->parts; ++p) {
          const CellValue& pv = parts[p];
          g.part_cells[p].push_back(
              pv.is_text() ? normalize_atomic(pv.as_text(), opt, &stripped_seen) : pv);
        }
      }
      std::string names;
      for (std::size_t i = 0; i < g.raw_names.size(); ++i) {
        if (i) names += "/";
        names += g.raw_names[i];
      }
      result.notes.push_back("column '" + meta.sql_name + "' split into " + names);
    } else {
      g.raw_names = {meta.raw_name};
      g.part_cells.resize(1);
      for (const auto& s : texts) {
        g.part_cells[0].push_back(normalize_atomic(s, opt, &stripped_seen));
      }
    }
    for (const auto& unit : stripped_seen) {
      result.notes.push_back("column '" + meta.sql_name + "': stripped '" + unit + "'");
    }
    groups.push_back(std::move(g));
  }

  std::vector<std::string> raw_names;
  for (const auto& g : groups) {
    raw_names.insert(raw_names.end(), g.raw_names.begin(), g.raw_names.end());
  }
  result.table.columns = make_columns(raw_names, &result.notes);
  result.table.rows.assign(t.row_count(), {});
  for (auto& row : result.table.rows) row.reserve(raw_names.size());
  for (const auto& g : groups) {
    for (const auto& part : g.part_cells) {
      for (std::size_t r = 0; r < t.row_count(); ++r) {
        result.table.rows[r].push_back(part[r]);
      }
    }
  }
  retype_columns(result.table);
  return result;
}

}  // namespace normtab
