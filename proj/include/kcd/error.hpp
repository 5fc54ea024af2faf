#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace kcd {

// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A precondition on caller-supplied data failed.
class InvalidInput : public Error {
 public:
  using Error::Error;
};

// A file or byte stream could not be decoded. `position` is a byte offset for
// binary formats and a 1-based line number for text formats.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t position)
      : Error(what), position_(position) {}

  std::size_t position() const noexcept { return position_; }

 private:
  std::size_t position_;
};

// Training produced a non-finite loss or gradient.
class TrainingError : public Error {
 public:
  using Error::Error;
};

}  // namespace kcd
