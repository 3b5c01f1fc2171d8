#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace therasim {

enum class ErrorCode {
  kInvalidArgument,  // malformed input, failed validation
  kNotFound,         // unknown id (activity, session, feature ...)
  kConflict,         // operation not allowed in the current state
  kIo,
};

std::string_view to_string(ErrorCode code);

// Single exception type for the library. The code drives CLI exit status and
// HTTP status mapping; the message always names the offending field or id.
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

}  // namespace therasim
