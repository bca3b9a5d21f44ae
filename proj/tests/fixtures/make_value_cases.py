#!/usr/bin/env python3
"""Regenerates value_cases.tsv from Python's calendar/number machinery.

Each line: kind<TAB>input<TAB>expected...
  date    input  iso|NOPARSE
  number  input  value|NOPARSE  stripped
  range   input  start|NOPARSE  end
"""
import calendar
import datetime
import os

OUT = os.path.join(os.path.dirname(__file__), "value_cases.tsv")

lines = []


def date_case(text, expected):
    lines.append(f"date\t{text}\t{expected}")


def number_case(text, value, stripped=""):
    lines.append(f"number\t{text}\t{value}\t{stripped}")


def range_case(text, start, end=""):
    lines.append(f"range\t{text}\t{start}\t{end}")


# ---- dates -----------------------------------------------------------------
base = datetime.date(1893, 1, 7)
dates = [base + datetime.timedelta(days=229 * k) for k in range(55)]
dates += [datetime.date(2000, 2, 29), datetime.date(1996, 2, 29),
          datetime.date(1999, 12, 31), datetime.date(2020, 1, 1)]

for i, d in enumerate(dates):
    iso = d.isoformat()
    month = calendar.month_name[d.month]
    abbrev = calendar.month_abbr[d.month]
    date_case(iso, iso)
    date_case(f"{month} {d.day}, {d.year}", iso)
    date_case(f"{d.day} {month} {d.year}", iso)
    date_case(f"{d.month}/{d.day}/{d.year}", iso)
    if i % 3 == 0:
        date_case(f"{abbrev} {d.day} {d.year}", iso)
    if i % 4 == 0:
        date_case(f"{month.lower()} {d.day}, {d.year}", iso)

# invalid calendar days and unparseable text
for text in ["2/30/1995", "1995-02-30", "1995-13-01", "february 29, 1900",
             "february 30, 2000", "4/31/2011", "0/10/1995", "9/0/1995",
             "12/32/2001", "13/13/2013", "banana", "september", "10/1995",
             "2010-11", "1995", "-", ""]:
    date_case(text, "NOPARSE")

# ---- numbers ---------------------------------------------------------------
ints = [0, 1, 7, 42, 100, 999, 1000, 1234, 9876, 12345, 54321, 100000,
        131060248, 709037, -5, -120, 2048, 4096, 777, 31337, 250000,
        1048576, 86400, 3600, 1440, 525600, 40075, 299792458]
for v in ints:
    number_case(str(v), str(v))
    if v >= 1000:
        number_case(f"{v:,}", str(v))
        number_case(f"${v:,}", str(v), "$")
    if 0 <= v <= 100:
        number_case(f"{v}%", str(v), "%")
for v in [12500, 47250, 68000, 90125]:
    number_case(f"{v:,} [1]", str(v), "[1]")
    number_case(f"{v:,} fans", str(v), "fans")

reals = [3.5, 0.375, 2.25, 99.9, -1.5, 1234.5]
for v in reals:
    number_case(repr(v), repr(v))
for whole in [10.0, 25.0, 4.0]:
    number_case(repr(whole), str(int(whole)))  # integer-valued -> integer

number_case("12,345", "12345")
number_case("1,234.5", "1234.5")
number_case("17,000 [2]", "17000", "[2]")
number_case("3,200 [a]", "3200", "[a]")
number_case("42 km", "42", "km")
number_case("3.5 km", "3.5", "km")
number_case("88 points", "88", "points")
number_case("1st", "1", "st")
number_case("2nd", "2", "nd")
number_case("3rd", "3", "rd")
number_case("44th", "44", "th")
number_case("$1,000", "1000", "$")
number_case("$ 250", "250", "$")
number_case("65 kg", "65", "kg")
number_case("120 min.", "120", "min.")

for text in ["won 2-1", "2-1", "september 10", "5th avenue", "", "n/a",
             "12,34", "one", "1,000 people attended today", "--", "a1b2"]:
    number_case(text, "NOPARSE")

# ---- ranges ----------------------------------------------------------------
pairs_4digit = [(1990, 1994), (2015, 2018), (2000, 2000), (1899, 1902),
                (2010, 2011), (1850, 1860), (2021, 2022), (1999, 2004)]
for a, b in pairs_4digit:
    range_case(f"{a}-{b}", a, b)
    range_case(f"{a}/{b}", a, b)

# two-digit second year: same century, rolling over when smaller
pairs_2digit = [(2010, "11"), (2011, "12"), (1998, "99"), (1999, "02"),
                (1999, "00"), (2095, "01"), (1900, "01"), (2010, "10"),
                (1989, "90"), (2047, "50")]
for a, suffix in pairs_2digit:
    expected = (a // 100) * 100 + int(suffix)
    if expected < a:
        expected += 100
    range_case(f"{a}-{suffix}", a, expected)
    range_case(f"{a}/{suffix}", a, expected)

for text in ["2018-2015", "2-1", "1995-09-10", "2010/1", "season 2010/11",
             "2010/113", "1995", "-"]:
    range_case(text, "NOPARSE")

with open(OUT, "w") as f:
    f.write("\n".join(lines) + "\n")

kinds = {}
for line in lines:
    kinds[line.split("\t")[0]] = kinds.get(line.split("\t")[0], 0) + 1
print(f"wrote {OUT}: {kinds}")
