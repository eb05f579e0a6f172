#pragma once

#include <cstdio>
#include <string>

namespace magnoise {

// Scientific-notation formatting used for all emitted tables and configs so
// that identical inputs always serialize to identical bytes.
inline std::string format_sci(double value, int significant_digits = 10) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*e", significant_digits - 1, value);
  return std::string(buf);
}

}  // namespace magnoise
