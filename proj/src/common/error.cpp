#include "a2p/error.hpp"

namespace a2p {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidInput:
      return "InvalidInput";
    case ErrorCode::InvalidState:
      return "InvalidState";
    case ErrorCode::DegenerateSignal:
      return "DegenerateSignal";
    case ErrorCode::DegenerateConfiguration:
      return "DegenerateConfiguration";
    case ErrorCode::DegenerateData:
      return "DegenerateData";
    case ErrorCode::NonFiniteGradient:
      return "NonFiniteGradient";
    case ErrorCode::IoError:
      return "IoError";
    case ErrorCode::CorruptFile:
      return "CorruptFile";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace a2p
