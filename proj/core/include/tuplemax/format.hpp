#pragma once

#include <charconv>
#include <string>
#include <string_view>

namespace tuplemax {

// Fixed-point decimal formatting via std::to_chars: locale-independent,
// always '.' as the decimal separator.
inline std::string format_fixed(double value, int decimals = 6) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, value, std::chars_format::fixed, decimals);
  return std::string(buf, res.ptr);
}

// Locale-independent double parse; returns false on any trailing garbage.
inline bool parse_double(std::string_view text, double& out) {
  const char* first = text.data();
  const char* last = text.data() + text.size();
  const auto res = std::from_chars(first, last, out);
  return res.ec == std::errc{} && res.ptr == last;
}

inline bool parse_int64(std::string_view text, long long& out) {
  const char* first = text.data();
  const char* last = text.data() + text.size();
  const auto res = std::from_chars(first, last, out);
  return res.ec == std::errc{} && res.ptr == last;
}

}  // namespace tuplemax
