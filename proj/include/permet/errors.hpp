#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace permet {

/// Base class for every error raised by this library. The CLI maps any
/// subclass to exit code 2 with a single-line diagnostic.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& message) : std::runtime_error(message) {}
};

/// Lexing failure; `offset` is the character offset into the source text.
class LexError : public Error {
 public:
  LexError(const std::string& message, std::size_t offset)
      : Error(message + " (offset " + std::to_string(offset) + ")"), offset_(offset) {}
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

/// Parsing failure; `offset` points at the offending token.
class ParseError : public Error {
 public:
  ParseError(const std::string& message, std::size_t offset)
      : Error(message + " (offset " + std::to_string(offset) + ")"), offset_(offset) {}
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

/// Runtime evaluation failure (unbound variable, domain error, non-finite result).
class EvalError : public Error {
 public:
  using Error::Error;
};

/// Invalid configuration: bad schema, stray variables, malformed domain.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A numeric parameter lies outside its admissible range.
class ParameterError : public Error {
 public:
  using Error::Error;
};

/// Supremum estimation could not produce a value (all pairs degenerate).
class EstimateError : public Error {
 public:
  using Error::Error;
};

/// Multi-start probe failed to complete one of its runs.
class ProbeError : public Error {
 public:
  using Error::Error;
};

/// Picard iteration left the space's domain.
class DomainEscapeError : public Error {
 public:
  DomainEscapeError(const std::string& message, std::size_t iteration, double iterate)
      : Error(message), iteration_(iteration), iterate_(iterate) {}
  std::size_t iteration() const { return iteration_; }
  double iterate() const { return iterate_; }

 private:
  std::size_t iteration_;
  double iterate_;
};

/// Catalog lookup with an id that does not exist.
class UnknownIdError : public Error {
 public:
  using Error::Error;
};

}  // namespace permet
