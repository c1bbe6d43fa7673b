#include "pfednet/error.hpp"

namespace pfednet {

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(message), code_(code) {}

void throw_invalid(const std::string& message) {
  throw Error(ErrorCode::kInvalidArgument, message);
}

void throw_numeric(const std::string& message) { throw Error(ErrorCode::kNumeric, message); }

}  // namespace pfednet
