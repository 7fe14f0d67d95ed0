#pragma once

#include <stdexcept>
#include <string>

namespace radonlab {

// Bad arguments or violated preconditions. CLI maps this to exit code 2.
struct InvalidArgument : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Desk-scale size/memory/budget guards. CLI maps this to exit code 3.
struct GuardError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct OverflowError : std::overflow_error {
  using std::overflow_error::overflow_error;
};

struct QuadratureError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline void require(bool ok, const std::string& what) {
  if (!ok) throw InvalidArgument(what);
}

inline void guard(bool ok, const std::string& what) {
  if (!ok) throw GuardError(what);
}

}  // namespace radonlab
