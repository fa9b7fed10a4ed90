#pragma once

#include <stdexcept>
#include <string>

namespace spinlaw {

/// A caller violated an operation's precondition (bad block, bad parameter).
class PreconditionError : public std::invalid_argument {
 public:
  explicit PreconditionError(const std::string& what) : std::invalid_argument(what) {}
};

/// An internal consistency check failed. These guard theorems and
/// dual-route identities, so a throw means a bug rather than bad input.
class CheckFailure : public std::runtime_error {
 public:
  explicit CheckFailure(const std::string& what) : std::runtime_error(what) {}
};

/// A windowed or truncated estimate did not settle.
class ConvergenceError : public std::runtime_error {
 public:
  explicit ConvergenceError(const std::string& what) : std::runtime_error(what) {}
};

namespace detail {

inline void require(bool condition, const std::string& message) {
  if (!condition) throw PreconditionError(message);
}

inline void ensure(bool condition, const std::string& message) {
  if (!condition) throw CheckFailure(message);
}

}  // namespace detail
}  // namespace spinlaw
