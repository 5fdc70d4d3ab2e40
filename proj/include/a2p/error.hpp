#pragma once

#include <stdexcept>
#include <string>

namespace a2p {

enum class ErrorCode {
  InvalidInput,
  InvalidState,
  DegenerateSignal,
  DegenerateConfiguration,
  DegenerateData,
  NonFiniteGradient,
  IoError,
  CorruptFile,
};

const char* to_string(ErrorCode code) noexcept;

/// Exception carrying one of the library's error kinds.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& message);

inline void require(bool condition, ErrorCode code, const std::string& message) {
  if (!condition) {
    fail(code, message);
  }
}

}  // namespace a2p
