#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace wrag {

enum class ErrorKind {
  InvalidArgument,
  InvalidHit,
  EmptyInput,
  Config,
  Io,
  CorruptFile,
  Truncated,
  ChecksumMismatch,
  DimensionMismatch,
  DuplicateId,
  NotFound,
  Integrity,
  Transport,
  ProviderFault,
};

std::string_view to_string(ErrorKind kind) noexcept;

// Single exception type for domain failures. Callers branch on kind(); only
// transport failures are worth retrying.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }
  bool retryable() const noexcept { return kind_ == ErrorKind::Transport; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

}  // namespace wrag
