#pragma once

#include <cstdint>
#include <string>
#include <variant>

namespace normtab {

/// Calendar date at day precision. Always renders as ISO "YYYY-MM-DD".
struct Date {
  int year = 0;
  int month = 0;
  int day = 0;

  std::string iso() const;
  auto operator<=>(const Date&) const = default;
};

/// true iff (year, month, day) is a real calendar date (Gregorian, leap-aware).
bool is_valid_date(int year, int month, int day);

/// Shortest decimal rendering of a double that round-trips exactly.
std::string render_real(double v);

/// Tagged atomic cell value: text, 64-bit integer, real, date, or null.
class CellValue {
 public:
  CellValue() : v_(std::monostate{}) {}

  static CellValue null() { return CellValue{}; }
  static CellValue text(std::string s) {
    CellValue c;
    c.v_ = std::move(s);
    return c;
  }
  static CellValue integer(std::int64_t v) {
    CellValue c;
    c.v_ = v;
    return c;
  }
  static CellValue real(double v) {
    CellValue c;
    c.v_ = v;
    return c;
  }
  static CellValue date(Date d) {
    CellValue c;
    c.v_ = d;
    return c;
  }

  bool is_null() const { return std::holds_alternative<std::monostate>(v_); }
  bool is_text() const { return std::holds_alternative<std::string>(v_); }
  bool is_integer() const { return std::holds_alternative<std::int64_t>(v_); }
  bool is_real() const { return std::holds_alternative<double>(v_); }
  bool is_date() const { return std::holds_alternative<Date>(v_); }

  const std::string& as_text() const { return std::get<std::string>(v_); }
  std::int64_t as_integer() const { return std::get<std::int64_t>(v_); }
  double as_real() const { return std::get<double>(v_); }
  const Date& as_date() const { return std::get<Date>(v_); }

  /// Null -> "", Text -> the text, Integer -> decimal digits,
  /// Real -> shortest round-trip decimal, Date -> ISO.
  std::string render() const;

  bool operator==(const CellValue&) const = default;

 private:
  std::variant<std::monostate, std::string, std::int64_t, double, Date> v_;
};

}  // namespace normtab
