#pragma once

#include <stdexcept>
#include <string>

namespace fntriage {

// Base for every failure caused by input data or model files (as opposed to
// caller misuse, which is reported with std::invalid_argument).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DataError : public Error {
 public:
  using Error::Error;
};

class ModelFormatError : public Error {
 public:
  enum class Kind { version, checksum, truncated, malformed };

  ModelFormatError(Kind kind, const std::string& what) : Error(what), kind_(kind) {}

  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

}  // namespace fntriage
