#pragma once

#include <charconv>
#include <cmath>
#include <cstdio>
#include <string>

namespace ngcn {

/// Shortest decimal string that parses back to exactly the same double.
inline std::string fmt_double(double x) {
  char buf[32];
  const auto result = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, result.ptr);
}

/// Six fixed decimals with halfway cases rounded up, the usual convention for
/// reporting exact p-values: 1/256 -> "0.003906", 2/256 -> "0.007813".
inline std::string format_p(double p) {
  const long long micro = std::llround(p * 1e6);
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%lld.%06lld", micro / 1000000, micro % 1000000);
  return buf;
}

}  // namespace ngcn
