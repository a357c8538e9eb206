#pragma once

#include <stdexcept>
#include <string>

namespace vpp {

enum class ErrorCode {
  invalid_input,
  dimension_mismatch,
  empty_cluster,
  degenerate,
  io_failure,
  parse_error,
  solver_failure,
};

const char* to_string(ErrorCode code);

/// Structured error carried by every throwing operation in the library.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace vpp
