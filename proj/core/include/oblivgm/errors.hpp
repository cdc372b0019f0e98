#pragma once

#include <stdexcept>
#include <string>

namespace oblivgm {

// Bad input: malformed files, out-of-domain operands, contract violations
// detected before any protocol message is exchanged.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Failure while the parties are running a protocol: round skew, disconnects,
// inconsistent share dimensions.
class ProtocolError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace oblivgm
