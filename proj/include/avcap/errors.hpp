#pragma once

#include <stdexcept>
#include <string>

namespace avcap {

/// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Invalid argument or violated precondition.
class ArgumentError : public Error {
 public:
  using Error::Error;
};

/// Invalid or incomplete configuration (missing callback, bad template dir, ...).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A dataset or config file failed schema validation. Message carries file and line.
class SchemaError : public Error {
 public:
  using Error::Error;
};

/// A judge response could not be parsed. Carries the raw response text.
class ParseError : public Error {
 public:
  ParseError(const std::string& msg, std::string raw_response)
      : Error(msg + "\n--- raw response ---\n" + raw_response),
        raw_response_(std::move(raw_response)) {}

  const std::string& raw_response() const noexcept { return raw_response_; }

 private:
  std::string raw_response_;
};

/// A judge response parsed but failed internal consistency checks
/// (e.g. a reported count that disagrees with the reported list).
class ValidationError : public ParseError {
 public:
  using ParseError::ParseError;
};

/// Judge invocation failed (transport failure after retries, missing mock rule).
class JudgeError : public Error {
 public:
  using Error::Error;
};

/// A single transport attempt failed; eligible for retry.
class TransportError : public JudgeError {
 public:
  using JudgeError::JudgeError;
};

/// The deterministic mock judge has no rule for this query. Never retried.
class RuleMissingError : public JudgeError {
 public:
  using JudgeError::JudgeError;
};

}  // namespace avcap
