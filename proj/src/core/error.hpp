#pragma once

#include <stdexcept>
#include <string>

namespace semibandit {

enum class ErrorCode {
  invalid_argument,
  parse_error,
  io_error,
  numeric_error,
  unsupported,
};

// Library-wide exception type. The C API boundary maps ErrorCode onto the
// sb_status codes exposed in include/semibandit/semibandit.h.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

inline void require(bool condition, ErrorCode code, const std::string& message) {
  if (!condition) fail(code, message);
}

}  // namespace semibandit
