#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <random>
#include <set>

#include "normtab/errors.hpp"
#include "normtab/gateway.hpp"
#include "normtab/table.hpp"
#include "support/scripted_provider.hpp"

using namespace normtab;
using test::make_table;

TEST_CASE("sanitize_identifier") {
  CHECK(sanitize_identifier("Year") == "year");
  CHECK(sanitize_identifier("Attendance (000s)") == "attendance_000s");
  CHECK(sanitize_identifier("result  score") == "result_score");
  CHECK(sanitize_identifier("2019") == "c_2019");
  CHECK(sanitize_identifier("  !! ") == "");
  CHECK(sanitize_identifier("a__b") == "a_b");
}

TEST_CASE("make_columns uniquifies collisions") {
  std::vector<std::string> warnings;
  auto cols = make_columns({"Year", "year", "YEAR", "year_2"}, &warnings);
  CHECK(cols[0].sql_name == "year");
  CHECK(cols[1].sql_name == "year_2");
  CHECK(cols[2].sql_name == "year_3");
  CHECK(cols[3].sql_name == "year_2_2");
  CHECK(!warnings.empty());
}

TEST_CASE("validate: clean table passes") {
  Table t = make_table("", {"a", "b"}, {{"1", "2"}, {"3", "4"}});
  CHECK(validate(t).empty());
}

TEST_CASE("validate: ragged row named by index") {
  Table t = make_table("", {"a", "b"}, {{"1", "2"}});
  t.rows.push_back({CellValue::text("1"), CellValue::text("2"), CellValue::text("3")});
  auto violations = validate(t);
  REQUIRE(violations.size() == 1);
  CHECK(violations[0].find("row 1") != std::string::npos);
}

TEST_CASE("validate: duplicate sql_name names the pair") {
  Table t = make_table("", {"a", "b"}, {});
  t.columns[1].sql_name = "a";
  auto violations = validate(t);
  REQUIRE(violations.size() == 1);
  CHECK(violations[0].find("'a'") != std::string::npos);
  CHECK(violations[0].find("0") != std::string::npos);
  CHECK(violations[0].find("1") != std::string::npos);
}

TEST_CASE("validate: declared type admission") {
  Table t = make_table("", {"n"}, {{"x"}});
  t.columns[0].declared_type = ColumnType::integer;
  CHECK(validate(t).size() == 1);
  t.rows[0][0] = CellValue::integer(5);
  CHECK(validate(t).empty());
  t.rows[0][0] = CellValue::null();
  CHECK(validate(t).empty());
}

TEST_CASE("transpose: grid flips, first column supplies headers") {
  // header row [metric, a, b] with one data row -> columns {metric, value}
  Table t = make_table("", {"metric", "a", "b"}, {{"value", "1", "2"}});
  Table out = transpose(t);
  REQUIRE(out.col_count() == 2);
  CHECK(out.columns[0].sql_name == "metric");
  CHECK(out.columns[1].sql_name == "value");
  REQUIRE(out.row_count() == 2);
  CHECK(out.rows[0][0].render() == "a");
  CHECK(out.rows[0][1].render() == "1");
  CHECK(out.rows[1][0].render() == "b");
  CHECK(out.rows[1][1].render() == "2");
}

TEST_CASE("transpose: empty corner header synthesizes 'attribute'") {
  Table t = make_table("", {"", "2019", "2020"}, {{"wins", "10", "12"}});
  std::vector<std::string> warnings;
  Table out = transpose(t, &warnings);
  CHECK(out.columns[0].sql_name == "attribute");
  CHECK(!warnings.empty());
}

TEST_CASE("transpose: zero rows rejected") {
  Table t = make_table("", {"a", "b"}, {});
  CHECK_THROWS_AS(transpose(t), EmptyTableError);
}

TEST_CASE("transpose: header collisions suffixed, not fatal") {
  Table t = make_table("", {"k", "x", "y"}, {{"dup", "1", "2"}, {"dup", "3", "4"}});
  std::vector<std::string> warnings;
  Table out = transpose(t, &warnings);
  CHECK(out.columns[1].sql_name == "dup");
  CHECK(out.columns[2].sql_name == "dup_2");
  CHECK(!warnings.empty());
  CHECK(validate(out).empty());
}

namespace {

// identifier-shaped strings survive sanitization unchanged
std::string stable_token(std::mt19937_64& rng, std::size_t salt) {
  static const char* kWords[] = {"alpha", "bravo", "carol", "delta", "echo",
                                 "fox",   "golf",  "hotel", "india", "julia"};
  std::uniform_int_distribution<std::size_t> pick(0, 9);
  return std::string(kWords[pick(rng)]) + "_" + std::to_string(salt);
}

Table random_stable_table(std::mt19937_64& rng) {
  std::uniform_int_distribution<std::size_t> ncols(2, 6), nrows(1, 8), kind(0, 3);
  std::size_t cols = ncols(rng), rows = nrows(rng);
  std::vector<std::string> header;
  for (std::size_t c = 0; c < cols; ++c) header.push_back(stable_token(rng, c));
  Table t;
  t.columns = make_columns(header);
  for (std::size_t r = 0; r < rows; ++r) {
    std::vector<CellValue> row;
    row.push_back(CellValue::text(stable_token(rng, 100 + r)));  // unique, stable
    for (std::size_t c = 1; c < cols; ++c) {
      switch (kind(rng)) {
        case 0: row.push_back(CellValue::integer(static_cast<int64_t>(rng() % 100000))); break;
        case 1: row.push_back(CellValue::real(static_cast<double>(rng() % 1000) / 8.0)); break;
        case 2: row.push_back(CellValue::null()); break;
        default: row.push_back(CellValue::text(stable_token(rng, rng() % 50)));
      }
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

}  // namespace

TEST_CASE("transpose involution on random tables") {
  std::mt19937_64 rng(7);
  for (int iter = 0; iter < 200; ++iter) {
    Table t = random_stable_table(rng);
    Table back = transpose(transpose(t));
    REQUIRE(back.col_count() == t.col_count());
    REQUIRE(back.row_count() == t.row_count());
    for (std::size_t c = 0; c < t.col_count(); ++c) {
      CHECK(back.columns[c].sql_name == t.columns[c].sql_name);
    }
    for (std::size_t r = 0; r < t.row_count(); ++r) {
      for (std::size_t c = 0; c < t.col_count(); ++c) {
        CHECK(back.rows[r][c].render() == t.rows[r][c].render());
      }
    }
  }
}

TEST_CASE("project_columns basics") {
  Table t = make_table("", {"a", "b", "c"}, {{"1", "2", "3"}, {"4", "5", "6"}});
  Table p = project_columns(t, {"c", "a"});
  REQUIRE(p.col_count() == 2);
  CHECK(p.columns[0].sql_name == "c");
  CHECK(p.rows[1][0].render() == "6");
  CHECK(p.row_count() == 2);

  Table identity = project_columns(t, {"a", "b", "c"});
  CHECK(identity.rows == t.rows);
  CHECK_THROWS_AS(project_columns(t, {"zzz"}), UnknownColumnError);
  CHECK_THROWS_AS(project_columns(t, {}), Error);
}

TEST_CASE("merge_columns basics and row-count mismatch") {
  Table left = make_table("", {"a"}, {{"1"}, {"2"}});
  Table right = make_table("", {"b"}, {{"x"}, {"y"}});
  Table merged = merge_columns(left, right);
  REQUIRE(merged.col_count() == 2);
  CHECK(merged.rows[0][1].render() == "x");

  Table short_right = make_table("", {"b"}, {{"x"}});
  CHECK_THROWS_AS(merge_columns(left, short_right), RowCountMismatchError);
}

TEST_CASE("merge ∘ project partition identity (multiset per row)") {
  std::mt19937_64 rng(11);
  for (int iter = 0; iter < 100; ++iter) {
    Table t = random_stable_table(rng);
    std::vector<std::string> a, b;
    for (std::size_t c = 0; c < t.col_count(); ++c) {
      (rng() % 2 ? a : b).push_back(t.columns[c].sql_name);
    }
    if (a.empty() || b.empty()) continue;
    Table merged = merge_columns(project_columns(t, a), project_columns(t, b));
    REQUIRE(merged.col_count() == t.col_count());
    REQUIRE(merged.row_count() == t.row_count());
    for (std::size_t r = 0; r < t.row_count(); ++r) {
      std::multiset<std::string> expected, actual;
      for (std::size_t c = 0; c < t.col_count(); ++c) {
        expected.insert(t.rows[r][c].render());
        actual.insert(merged.rows[r][c].render());
      }
      CHECK(expected == actual);
    }
  }
}

TEST_CASE("drop_last_row") {
  Table t = make_table("", {"a", "b"},
                       {{"1", "x"}, {"2", "y"}, {"3", "z"}, {"4", "w"}, {"total", "17"}});
  Table d = drop_last_row(t);
  CHECK(d.row_count() == 4);
  CHECK(d.rows == std::vector<std::vector<CellValue>>(t.rows.begin(), t.rows.end() - 1));

  Table one = make_table("", {"a"}, {{"1"}});
  CHECK(drop_last_row(one).row_count() == 0);
  Table empty = make_table("", {"a"}, {});
  CHECK_THROWS_AS(drop_last_row(empty), EmptyTableError);
}

TEST_CASE("sample_header_rows clamps and renders deterministically") {
  Table t = make_table("games", {"date", "score"},
                       {{"d1", "1"}, {"d2", "2"}, {"d3", "3"}});
  std::string three = sample_header_rows(t, 3);
  CHECK(three.find("Title: games") == 0);
  CHECK(three.find("| date | score |") != std::string::npos);
  // header + separator + 3 rows + title
  CHECK(std::count(three.begin(), three.end(), '\n') == 6);

  Table two = make_table("", {"a"}, {{"1"}, {"2"}});
  std::string sampled = sample_header_rows(two, 3);
  CHECK(std::count(sampled.begin(), sampled.end(), '\n') == 5);

  std::string header_only = sample_header_rows(two, 0);
  CHECK(std::count(header_only.begin(), header_only.end(), '\n') == 3);
  CHECK(sample_header_rows(t, 3) == three);
}

TEST_CASE("serialize_table: zero-row table renders header only") {
  Table t = make_table("", {"a", "b"}, {});
  std::string s = serialize_table(t);
  CHECK(s == "| a | b |\n| --- | --- |\n");
}

TEST_CASE("serialize/parse round-trip including pipes and escapes") {
  Table t = make_table("", {"a", "b"},
                       {{"plain", "with | pipe"},
                        {"back\\slash", "new\nline"},
                        {"ends with pipe |", "| starts"}});
  Table parsed = parse_table_text(serialize_table(t), 2, t.row_count());
  REQUIRE(parsed.row_count() == t.row_count());
  for (std::size_t r = 0; r < t.row_count(); ++r) {
    for (std::size_t c = 0; c < 2; ++c) {
      CHECK(parsed.rows[r][c].render() == t.rows[r][c].render());
    }
  }
}

TEST_CASE("serialize/parse round-trip fuzz") {
  std::mt19937_64 rng(23);
  const std::string alphabet = "ab |\\\n\r\"',;x0.";
  std::uniform_int_distribution<std::size_t> len(1, 12), pick(0, alphabet.size() - 1);
  for (int iter = 0; iter < 300; ++iter) {
    std::uniform_int_distribution<std::size_t> dims(1, 4);
    std::size_t cols = dims(rng), rows = dims(rng);
    std::vector<std::string> header;
    for (std::size_t c = 0; c < cols; ++c) header.push_back("c" + std::to_string(c));
    std::vector<std::vector<std::string>> grid;
    for (std::size_t r = 0; r < rows; ++r) {
      std::vector<std::string> row;
      for (std::size_t c = 0; c < cols; ++c) {
        std::string s;
        std::size_t n = len(rng);
        for (std::size_t i = 0; i < n; ++i) s.push_back(alphabet[pick(rng)]);
        row.push_back(s);
      }
      grid.push_back(row);
    }
    Table t = make_table("", header, grid);
    Table parsed = parse_table_text(serialize_table(t), cols, rows);
    for (std::size_t r = 0; r < rows; ++r) {
      for (std::size_t c = 0; c < cols; ++c) {
        CHECK(parsed.rows[r][c].render() == t.rows[r][c].render());
      }
    }
  }
}

TEST_CASE("date and null cell rendering") {
  CHECK(CellValue::date(Date{1995, 9, 10}).render() == "1995-09-10");
  CHECK(CellValue::null().render() == "");
  CHECK(CellValue::real(0.375).render() == "0.375");
  CHECK(CellValue::real(10.0).render() == "10");
  CHECK(CellValue::integer(-42).render() == "-42");
}
