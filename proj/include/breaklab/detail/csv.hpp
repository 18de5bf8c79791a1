#pragma once

#include <cstdio>
#include <string>

namespace breaklab {

/// Round-trip decimal form of a double; identical bits give identical text.
inline std::string csv_num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace breaklab
