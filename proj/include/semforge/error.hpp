#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace semforge {

// Base of every exception thrown by the library. `code()` is a stable
// identifier ("DuplicateLabel", "CacheMiss", ...) that callers match on.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& message)
      : std::runtime_error(message), code_(std::move(code)) {}

  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

}  // namespace semforge
