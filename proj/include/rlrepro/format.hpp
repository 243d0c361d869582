#pragma once

// Number formatting and parsing shared by every writer in the library.
// All tables and files go through these functions so that a value is
// rendered the same way wherever it appears.

#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <system_error>

namespace rlrepro::fmt {

/// Shortest decimal text that parses back to exactly `x`.
inline std::string shortest(double x) {
  std::array<char, 64> buf{};
  auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), x);
  return std::string(buf.data(), end);
}

/// Shortest round-trip text in plain (non-exponent) notation.
inline std::string shortest_fixed(double x) {
  std::array<char, 400> buf{};
  auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), x,
                                 std::chars_format::fixed);
  return std::string(buf.data(), end);
}

/// Like `shortest`, but always recognizable as a decimal (never as an
/// integer) when read back: "2" becomes "2.0".
inline std::string decimal(double x) {
  std::string s = shortest(x);
  if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
  return s;
}

/// Fixed notation with `digits` decimals, correctly rounded from the binary
/// value. Negative zero is printed without its sign.
inline std::string fixed(double x, int digits) {
  if (x == 0.0) x = 0.0;
  std::array<char, 400> buf{};
  auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), x,
                                 std::chars_format::fixed, digits);
  std::string s(buf.data(), end);
  // A tiny negative value can round to "-0.00".
  if (s.front() == '-' && s.find_first_not_of("-0.") == std::string::npos)
    s.erase(0, 1);
  return s;
}

inline std::string integer(std::int64_t v) { return std::to_string(v); }

inline std::string_view trim(std::string_view s) {
  const auto* ws = " \t\r\n";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

/// Strict integer parse: optional sign followed by digits only.
inline std::optional<std::int64_t> parse_int(std::string_view s) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  if (s.empty()) return std::nullopt;
  std::int64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

/// Strict floating-point parse of the full string.
inline std::optional<double> parse_double(std::string_view s) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  if (s.empty()) return std::nullopt;
  double v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

}  // namespace rlrepro::fmt
