#pragma once

#include <stdexcept>
#include <string>

namespace rebalance {

class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Raised by the KEEL/CSV readers; carries the failure kind and 1-based line.
class ParseError : public Error {
 public:
  enum class Kind {
    malformed_header,
    non_binary_class,
    ragged_row,
    unknown_nominal_value,
    missing_value,
    bad_number,
  };

  ParseError(Kind kind, int line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), kind_(kind), line_(line) {}

  Kind kind() const { return kind_; }
  int line() const { return line_; }

 private:
  Kind kind_;
  int line_;
};

class LengthMismatch : public Error {
 public:
  using Error::Error;
};

class EmptyMatrix : public Error {
 public:
  using Error::Error;
};

class EmptyClass : public Error {
 public:
  using Error::Error;
};

class EmptySelection : public Error {
 public:
  using Error::Error;
};

class BadFoldCount : public Error {
 public:
  using Error::Error;
};

class SchemaMismatch : public Error {
 public:
  using Error::Error;
};

class EmptyArchive : public Error {
 public:
  using Error::Error;
};

class OutOfRange : public Error {
 public:
  using Error::Error;
};

}  // namespace rebalance
