#pragma once

#include <stdexcept>
#include <string>

namespace ezk {

// Caller passed a value outside the operation's domain.
struct InvalidArgument : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Operation is well-defined but not feasible at this size or for this scheme.
struct Unsupported : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A random choice was unlucky; resample and call again.
struct RetryableError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Malformed canonical encoding.
struct DecodeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Transport failure or out-of-order message inside a protocol session.
struct SessionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// The literal overload keeps hot paths from building a std::string per check.
inline void require(bool cond, const char* what) {
  if (!cond) throw InvalidArgument(what);
}
inline void require(bool cond, const std::string& what) {
  if (!cond) throw InvalidArgument(what);
}

}  // namespace ezk
