#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace kptune {

// Base for every error raised by the toolkit. The CLI maps DataError to exit
// code 2 and anything else to 3.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// Problems with user-supplied data: malformed files, incomplete grids,
// impossible values, degenerate inputs.
class DataError : public Error {
 public:
  using Error::Error;
};

class ParseError : public DataError {
 public:
  ParseError(std::size_t line, const std::string& what)
      : DataError("line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class ValueError : public DataError {
 public:
  ValueError(std::size_t line, const std::string& what)
      : DataError("line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class IncompleteGridError : public DataError {
 public:
  using DataError::DataError;
};

class DegenerateInputError : public DataError {
 public:
  using DataError::DataError;
};

class EmptySelectionError : public DataError {
 public:
  using DataError::DataError;
};

class ValidationError : public DataError {
 public:
  using DataError::DataError;
};

// A caller broke an interface promise, e.g. a predictor returned a class
// outside the subset.
class ContractError : public Error {
 public:
  using Error::Error;
};

class TemplateError : public Error {
 public:
  using Error::Error;
};

}  // namespace kptune
