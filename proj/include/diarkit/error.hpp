#pragma once

#include <stdexcept>
#include <string>

namespace diarkit {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input: unparsable text, corrupt binary payloads, bad magic.
class FormatError : public Error {
 public:
  using Error::Error;
};

// Well-formed input that violates a precondition (mismatched frame counts,
// thresholds out of range, inverted segments).
class ConstraintError : public Error {
 public:
  using Error::Error;
};

}  // namespace diarkit
