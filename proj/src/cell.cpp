#include "normtab/cell.hpp"

#include <charconv>
#include <cstdio>

namespace normtab {

namespace {

constexpr int kDaysInMonth[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};

bool is_leap(int year) {
  return (year % 4 == 0 && year % 100 != 0) || year % 400 == 0;
}

}  // namespace

bool is_valid_date(int year, int month, int day) {
  if (year < 1 || year > 9999) return false;
  if (month < 1 || month > 12) return false;
  int max_day = kDaysInMonth[month - 1];
  if (month == 2 && is_leap(year)) max_day = 29;
  return day >= 1 && day <= max_day;
}

std::string Date::iso() const {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02d-%02d", year, month, day);
  return buf;
}

std::string render_real(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc{}) return "nan";
  return std::string(buf, ptr);
}

std::string CellValue::render() const {
  if (is_null()) return "";
  if (is_text()) return as_text();
  if (is_integer()) return std::to_string(as_integer());
  if (is_real()) return render_real(as_real());
  return as_date().iso();
}

}  // namespace normtab
