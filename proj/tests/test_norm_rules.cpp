#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "normtab/norm_rules.hpp"
#include "support/scripted_provider.hpp"

using namespace normtab;
using test::make_table;

TEST_CASE("normalize_date: recognized forms") {
  CHECK(normalize_date("september 10, 1995")->iso() == "1995-09-10");
  CHECK(normalize_date("September 10, 1995")->iso() == "1995-09-10");
  CHECK(normalize_date("10 September 1995")->iso() == "1995-09-10");
  CHECK(normalize_date("Sep 10 1995")->iso() == "1995-09-10");
  CHECK(normalize_date("sept. 3, 2004")->iso() == "2004-09-03");
  CHECK(normalize_date("March 1st, 2010")->iso() == "2010-03-01");
  CHECK(normalize_date("1995-09-10")->iso() == "1995-09-10");
  CHECK(normalize_date("1995-9-1")->iso() == "1995-09-01");
  CHECK(normalize_date("9/10/1995")->iso() == "1995-09-10");
  CHECK(normalize_date(" 9/10/1995 ")->iso() == "1995-09-10");
}

TEST_CASE("normalize_date: date order") {
  CHECK(normalize_date("3/4/2019", DateOrder::month_first)->iso() == "2019-03-04");
  CHECK(normalize_date("3/4/2019", DateOrder::day_first)->iso() == "2019-04-03");
  // unambiguous even under the wrong order
  CHECK(normalize_date("13/4/2019", DateOrder::month_first)->iso() == "2019-04-13");
}

TEST_CASE("normalize_date: never an invalid calendar date") {
  CHECK(!normalize_date("2/30/1995"));
  CHECK(!normalize_date("1995-02-30"));
  CHECK(!normalize_date("1995-13-01"));
  CHECK(!normalize_date("february 29, 1900"));  // not a leap year
  CHECK(normalize_date("february 29, 2000"));   // is one
  CHECK(!normalize_date("banana"));
  CHECK(!normalize_date(""));
  CHECK(!normalize_date("10/1995"));
  CHECK(!normalize_date("2010-11"));
}

TEST_CASE("normalize_number: separators, currency, units") {
  auto n = normalize_number("12,345");
  REQUIRE(n);
  CHECK(n->value.as_integer() == 12345);
  CHECK(n->stripped.empty());

  n = normalize_number("$1,000");
  REQUIRE(n);
  CHECK(n->value.as_integer() == 1000);
  CHECK(n->stripped == "$");

  n = normalize_number("42");
  REQUIRE(n);
  CHECK(n->value.as_integer() == 42);
  CHECK(n->stripped.empty());

  n = normalize_number("45%");
  REQUIRE(n);
  CHECK(n->value.as_integer() == 45);
  CHECK(n->stripped == "%");

  n = normalize_number("3.5 km");
  REQUIRE(n);
  CHECK(n->value.as_real() == doctest::Approx(3.5));
  CHECK(n->stripped == "km");

  n = normalize_number("17,000 [2]");
  REQUIRE(n);
  CHECK(n->value.as_integer() == 17000);
  CHECK(n->stripped == "[2]");

  n = normalize_number("-42");
  REQUIRE(n);
  CHECK(n->value.as_integer() == -42);

  n = normalize_number("10.0");
  REQUIRE(n);
  CHECK(n->value.is_integer());  // integer-valued result
  CHECK(n->value.as_integer() == 10);

  n = normalize_number("3rd");
  REQUIRE(n);
  CHECK(n->value.as_integer() == 3);
  CHECK(n->stripped == "rd");
}

TEST_CASE("normalize_number: rejections") {
  CHECK(!normalize_number("won 2-1"));
  CHECK(!normalize_number("2-1"));
  CHECK(!normalize_number("september 10"));
  CHECK(!normalize_number("5th avenue"));  // ordinal + word is a name, not a value
  CHECK(!normalize_number("1,000 people attended today"));
  CHECK(!normalize_number(""));
  CHECK(!normalize_number("n/a"));
  CHECK(!normalize_number("12,34"));  // not a 3-digit group
}

TEST_CASE("normalize_missing set") {
  CHECK(is_missing_marker("N/A"));
  CHECK(is_missing_marker("n/a"));
  CHECK(is_missing_marker("NA"));
  CHECK(is_missing_marker(""));
  CHECK(is_missing_marker("  "));
  CHECK(is_missing_marker("-"));
  CHECK(is_missing_marker("—"));
  CHECK(!is_missing_marker("nato"));
  CHECK(!is_missing_marker("0"));
  CHECK(!is_missing_marker("--"));
}

TEST_CASE("split_range: patterns and century rule") {
  auto r = split_range("2015-2018");
  REQUIRE(r);
  CHECK(r->start == 2015);
  CHECK(r->end == 2018);

  r = split_range("2010/11");
  REQUIRE(r);
  CHECK(r->start == 2010);
  CHECK(r->end == 2011);

  r = split_range("1999/02");
  REQUIRE(r);
  CHECK(r->start == 1999);
  CHECK(r->end == 2002);  // century rollover

  r = split_range("2010/10");
  REQUIRE(r);
  CHECK(r->end == 2010);

  CHECK(!split_range("2018-2015"));  // backwards
  CHECK(!split_range("2-1"));
  CHECK(!split_range("1995-09-10"));
  CHECK(!split_range("2010/1"));
  CHECK(!split_range("season 2010/11"));
}

TEST_CASE("split_composite: word+score shape") {
  SplitSpec spec;
  spec.kind = SplitSpec::Kind::prefix_suffix;
  spec.suffix_shape = SplitSpec::Suffix::score;
  spec.parts = 2;
  spec.name_suffixes = {"_type", "_score"};

  auto parts = split_composite("won 2-1", spec);
  REQUIRE(parts.size() == 2);
  CHECK(parts[0].render() == "won");
  CHECK(parts[1].render() == "2-1");

  parts = split_composite("lost 0-3", spec);
  CHECK(parts[0].render() == "lost");
  CHECK(parts[1].render() == "0-3");

  parts = split_composite("postponed", spec);
  CHECK(parts[0].render() == "postponed");
  CHECK(parts[1].is_null());
}

TEST_CASE("infer_split_spec picks the dominant shape") {
  auto spec = infer_split_spec({"won 2-1", "lost 0-3", "drew 1-1"}, 0.6);
  REQUIRE(spec);
  CHECK(spec->kind == SplitSpec::Kind::prefix_suffix);
  CHECK(spec->name_suffixes == std::vector<std::string>{"_type", "_score"});

  spec = infer_split_spec({"london (england)", "paris (france)"}, 0.6);
  REQUIRE(spec);
  CHECK(spec->name_suffixes == std::vector<std::string>{"", "_detail"});

  CHECK(!infer_split_spec({"plain", "text", "cells"}, 0.6));
  CHECK(!infer_split_spec({}, 0.6));
}

TEST_CASE("diagnose_columns flags per the 30% rule") {
  Table t = make_table("", {"dates", "numbers", "clean_dates", "scores", "mixed"},
                       {{"september 10, 1995", "12,345", "1995-09-10", "won 2-1", "x"},
                        {"october 2, 1995", "10,000", "1996-01-02", "lost 0-3", "y"},
                        {"november 5, 1995", "9,876", "1997-03-04", "drew 1-1", "z"}});
  auto diags = diagnose_columns(t, 0.3);
  REQUIRE(diags.size() == 5);
  CHECK(diags[0].issues.count(ColumnIssue::non_iso_date));
  CHECK(diags[0].needs_normalization());
  CHECK(diags[1].issues.count(ColumnIssue::formatted_number));
  CHECK(diags[2].issues.empty());
  CHECK(!diags[2].needs_normalization());
  CHECK(diags[3].issues.count(ColumnIssue::composite));
  CHECK(diags[4].issues.empty());
}

TEST_CASE("diagnose_columns: missing markers and ranges") {
  Table t = make_table("", {"att", "season"},
                       {{"n/a", "2010/11"}, {"1234", "2011/12"}, {"-", "2012/13"}});
  auto diags = diagnose_columns(t, 0.3);
  CHECK(diags[0].issues.count(ColumnIssue::na_or_blank));
  CHECK(diags[1].issues.count(ColumnIssue::value_range));
}

TEST_CASE("diagnose_columns: extraneous text") {
  Table t = make_table("", {"prize"}, {{"$1,000"}, {"$500"}, {"$250"}});
  auto diags = diagnose_columns(t, 0.3);
  CHECK(diags[0].issues.count(ColumnIssue::extraneous_text));
  CHECK(diags[0].issues.count(ColumnIssue::formatted_number));
}

TEST_CASE("diagnose is idempotent over rules normalization") {
  Table t = make_table("", {"date", "att", "result"},
                       {{"september 10, 1995", "12,345", "won 2-1"},
                        {"october 2, 1995", "n/a", "lost 0-3"}});
  auto normalized = normalize_table_rules(t, {}).table;
  for (const auto& d : diagnose_columns(normalized, 0.3)) {
    CAPTURE(d.sql_name);
    CHECK(!d.needs_normalization());
  }
}

TEST_CASE("detect_aggregate_row") {
  Table t = make_table("", {"team", "pts"}, {{"a", "30"}, {"total", "57"}});
  CHECK(detect_aggregate_row(t));
  Table t2 = make_table("", {"team", "pts"}, {{"a", "30"}, {"2019", "5"}});
  CHECK(!detect_aggregate_row(t2));
  Table t3 = make_table("", {"team", "pts"},
                        {{"a", "30"}, {"Average attendance", "10,221"}});
  CHECK(detect_aggregate_row(t3));
  Table single = make_table("", {"team", "pts"}, {{"total", "57"}});
  CHECK(!detect_aggregate_row(single));  // needs two rows
}

TEST_CASE("detect_orientation") {
  Table row_table = make_table("", {"team", "year", "wins"},
                               {{"leeds", "1995", "20"},
                                {"derby", "1996", "17"},
                                {"luton", "1997", "11"}});
  CHECK(detect_orientation(row_table) == Orientation::row_oriented);
  CHECK(detect_orientation(transpose(row_table)) == Orientation::column_oriented);

  Table all_text = make_table("", {"a", "b"}, {{"x", "y"}, {"z", "w"}});
  CHECK(detect_orientation(all_text) == Orientation::uncertain);

  Table tiny = make_table("", {"a"}, {{"x"}});
  CHECK(detect_orientation(tiny) == Orientation::uncertain);
}

TEST_CASE("infer_cell is render-preserving") {
  CHECK(infer_cell("1000").is_integer());
  CHECK(infer_cell("1000").render() == "1000");
  CHECK(infer_cell("007").is_text());      // leading zeros stay text
  CHECK(infer_cell("3.50").is_text());     // "3.5" would not round-trip
  CHECK(infer_cell("3.5").is_real());
  CHECK(infer_cell("1995-09-10").is_date());
  CHECK(infer_cell("1995-02-30").is_text());  // not a real date
  CHECK(infer_cell("").is_null());
  CHECK(infer_cell("NULL").is_text());
  CHECK(infer_cell("NULL", {"NULL"}).is_null());
}

TEST_CASE("normalize_table_rules: figure-1 style table") {
  Table t = make_table("1947 season",
                       {"date", "opponent", "result", "attendance"},
                       {{"september 10, 1995", "eagles", "won 2-1", "12,345"},
                        {"october 2, 1995", "jets", "lost 0-3", "n/a"},
                        {"november 5, 1995", "bears", "drew 1-1", "9,876"}});
  auto result = normalize_table_rules(t, {"date", "result", "attendance"});
  const Table& n = result.table;
  REQUIRE(n.col_count() == 5);
  CHECK(n.columns[0].sql_name == "date");
  CHECK(n.columns[0].declared_type == ColumnType::date);
  CHECK(n.columns[1].sql_name == "opponent");
  CHECK(n.columns[2].sql_name == "result_type");
  CHECK(n.columns[3].sql_name == "result_score");
  CHECK(n.columns[4].sql_name == "attendance");
  CHECK(n.columns[4].declared_type == ColumnType::integer);
  CHECK(n.rows[0][0].render() == "1995-09-10");
  CHECK(n.rows[0][2].render() == "won");
  CHECK(n.rows[0][3].render() == "2-1");
  CHECK(n.rows[1][4].is_null());
  CHECK(n.rows[2][4].as_integer() == 9876);
  // untouched column is bit-identical
  CHECK(n.rows[0][1] == t.rows[0][1]);
}

TEST_CASE("normalize_table_rules: range split") {
  Table t = make_table("", {"season", "wins"},
                       {{"2010/11", "20"}, {"2011/12", "25"}, {"postponed", "0"}});
  auto result = normalize_table_rules(t, {"season"});
  const Table& n = result.table;
  REQUIRE(n.col_count() == 3);
  CHECK(n.columns[0].sql_name == "season_start");
  CHECK(n.columns[1].sql_name == "season_end");
  CHECK(n.rows[0][0].as_integer() == 2010);
  CHECK(n.rows[0][1].as_integer() == 2011);
  CHECK(n.rows[2][0].render() == "postponed");
  CHECK(n.rows[2][1].is_null());
}

TEST_CASE("value rule idempotence on canonical outputs") {
  // canonical forms re-canonicalize to themselves
  for (const char* iso : {"1995-09-10", "2000-02-29", "1900-01-01"}) {
    auto d = normalize_date(iso);
    REQUIRE(d);
    CHECK(d->iso() == iso);
  }
  for (const char* bare : {"12345", "-7", "3.5", "0"}) {
    auto n = normalize_number(bare);
    REQUIRE(n);
    CHECK(n->value.render() == bare);
    CHECK(n->stripped.empty());
  }
}
