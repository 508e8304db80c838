#pragma once

#include <string>

namespace semibandit {

// 17 significant digits: enough for double round trips, so re-reading any
// emitted CSV reproduces the values bitwise.
std::string format_g17(double x);

}  // namespace semibandit
