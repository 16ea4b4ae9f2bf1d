#pragma once

#include <charconv>
#include <cmath>
#include <cstdio>
#include <optional>
#include <string>

namespace zne {

/// Shortest decimal string that parses back to exactly the same double.
inline std::string format_double(double v) {
  char buf[40];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

/// Two-significant-digit scientific notation with a bare exponent:
/// 0.25 -> "2.5E-1", 76.0 -> "7.6E+1", 0.0 -> "0.0E+0".
inline std::string format_scientific_2sig(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (v == 0.0) return "0.0E+0";
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.1E", v);
  std::string s(buf);
  auto e = s.find('E');
  std::string mantissa = s.substr(0, e);
  char exp_sign = s[e + 1];
  std::string digits = s.substr(e + 2);
  auto nz = digits.find_first_not_of('0');
  digits = nz == std::string::npos ? "0" : digits.substr(nz);
  return mantissa + "E" + exp_sign + digits;
}

/// Fraction rendered as a percentage with two decimals: 0.9996 -> "99.96%".
inline std::string format_percent(double fraction) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.2f%%", fraction * 100.0);
  return std::string(buf);
}

/// "mean ± sd" cell with both numbers in two-significant-digit scientific
/// notation; the sd part is omitted when unavailable.
inline std::string format_mean_sd(double mean, std::optional<double> sd) {
  std::string out = format_scientific_2sig(mean);
  if (sd) {
    out += " ± ";
    out += format_scientific_2sig(*sd);
  }
  return out;
}

}  // namespace zne
