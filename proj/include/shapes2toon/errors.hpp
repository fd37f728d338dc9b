#pragma once

#include <stdexcept>
#include <string>

namespace s2t {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad input: malformed documents, invariant violations, bad arguments.
// `path` names the offending field (e.g. "shapes[2].rx") when there is one.
class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& what, std::string path = {})
      : Error(path.empty() ? what : path + ": " + what), path_(std::move(path)) {}

  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

class ParseError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// Non-finite values detected in a checked computation.
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace s2t
