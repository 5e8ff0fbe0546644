#ifndef BIASREDUCE_ERRORS_HPP_
#define BIASREDUCE_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace biasreduce {

// Config file could not be parsed as a document at all.
class ConfigParseError : public std::runtime_error {
 public:
  explicit ConfigParseError(const std::string& msg) : std::runtime_error(msg) {}
};

// Document parsed but its content is invalid (unknown keys, bad values,
// parameter outside the admissible region, ...).
class ConfigValidateError : public std::runtime_error {
 public:
  explicit ConfigValidateError(const std::string& msg)
      : std::runtime_error(msg) {}
};

class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

// Numerical contract violation detected at runtime (e.g. a matrix that was
// required to stay positive semidefinite acquired a clearly negative
// eigenvalue).
class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace biasreduce

#endif  // BIASREDUCE_ERRORS_HPP_
