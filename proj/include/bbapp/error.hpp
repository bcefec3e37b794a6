#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

namespace bbapp {

/// Base of every error thrown by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A documented precondition was violated by the caller.
class ContractViolation : public Error {
 public:
  using Error::Error;
};

/// A quantity is undefined for the given input (e.g. TER with an empty
/// reference).
class UndefinedError : public Error {
 public:
  using Error::Error;
};

/// Input collection too small for the requested operation.
class SizingError : public Error {
 public:
  using Error::Error;
};

/// Malformed input file. `line()` is 1-based, 0 when not line-specific.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : Error(line ? what + " (line " + std::to_string(line) + ")" : what),
        line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// A remote backend chunk failed after all retries. Carries the half-open
/// index range [first, last) of the inputs that were in the failing chunk.
class TransportError : public Error {
 public:
  TransportError(const std::string& what, std::size_t first, std::size_t last)
      : Error(what), first_(first), last_(last) {}
  std::size_t first() const { return first_; }
  std::size_t last() const { return last_; }

 private:
  std::size_t first_;
  std::size_t last_;
};

/// The remote side answered, but the answer breaks the wire contract.
class ProtocolError : public Error {
 public:
  using Error::Error;
};

class NotFound : public Error {
 public:
  using Error::Error;
};

class Conflict : public Error {
 public:
  using Error::Error;
};

class ValidationError : public Error {
 public:
  using Error::Error;
};

}  // namespace bbapp
