#pragma once

#include <stdexcept>
#include <string>

namespace pfednet {

enum class ErrorCode {
  kInvalidArgument = 1,
  kIo = 2,
  kParse = 3,
  kNumeric = 4,
  kInternal = 5,
};

// All library failures surface as this exception; the C API maps the code
// onto its status enum.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] void throw_invalid(const std::string& message);
[[noreturn]] void throw_numeric(const std::string& message);

}  // namespace pfednet
