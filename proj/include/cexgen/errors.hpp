#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace cexgen {

// Byte offsets into the text that produced an error.
struct Span {
  std::size_t begin = 0;
  std::size_t end = 0;
};

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SyntaxError : public Error {
 public:
  SyntaxError(const std::string& what, Span span) : Error(what), span_(span) {}
  Span span() const { return span_; }

 private:
  Span span_;
};

// Construct outside the supported statement subset.
class SyntaxUnsupported : public SyntaxError {
 public:
  using SyntaxError::SyntaxError;
};

// Unbalanced delimiters, missing tokens.
class SyntaxMalformed : public SyntaxError {
 public:
  using SyntaxError::SyntaxError;
};

class DuplicateName : public Error {
 public:
  using Error::Error;
};

class IndexOutOfRange : public Error {
 public:
  using Error::Error;
};

class NotDroppable : public Error {
 public:
  using Error::Error;
};

class ScopeError : public Error {
 public:
  using Error::Error;
};

class OracleUnavailable : public Error {
 public:
  using Error::Error;
};

class StatesMissing : public Error {
 public:
  using Error::Error;
};

class OutsideFragment : public Error {
 public:
  using Error::Error;
};

class EndpointUnavailable : public Error {
 public:
  using Error::Error;
};

class ExtractionFailed : public Error {
 public:
  using Error::Error;
};

class HoldoutTooLarge : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace cexgen
