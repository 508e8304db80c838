#include "core/textio.hpp"

#include <cstdio>

namespace semibandit {

std::string format_g17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

}  // namespace semibandit
