#pragma once

#include "a2p/error.hpp"

#include <optional>

/// The a2p::Error code thrown by `fn`, or nothing when it returns normally.
template <typename Fn>
std::optional<a2p::ErrorCode> error_code(Fn&& fn) {
  try {
    fn();
  } catch (const a2p::Error& e) {
    return e.code();
  }
  return std::nullopt;
}
