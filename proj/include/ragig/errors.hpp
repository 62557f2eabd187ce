#pragma once

#include <stdexcept>
#include <string>

namespace ragig {

/// Base class for every error raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Errors caused by the data being evaluated (corpus, answers, templates).
/// The CLI maps these to exit code 1.
class DataError : public Error {
 public:
  using Error::Error;
};

/// Errors caused by the environment (filesystem, scoring backend).
/// The CLI maps these to exit code 2.
class EnvironmentError : public Error {
 public:
  using Error::Error;
};

class IOFailure : public EnvironmentError {
 public:
  using EnvironmentError::EnvironmentError;
};

/// A corpus/answers/report line that is not valid JSON or misses fields.
class SchemaError : public DataError {
 public:
  SchemaError(std::size_t line, const std::string& what)
      : DataError("line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class InvariantError : public DataError {
 public:
  InvariantError(std::string sample_id, const std::string& what)
      : DataError("sample '" + sample_id + "': " + what), sample_id_(std::move(sample_id)) {}

  const std::string& sample_id() const noexcept { return sample_id_; }

 private:
  std::string sample_id_;
};

class TemplateError : public DataError {
 public:
  using DataError::DataError;
};

class EnvelopeError : public DataError {
 public:
  using DataError::DataError;
};

class MissingUrl : public DataError {
 public:
  using DataError::DataError;
};

class MissingContext : public DataError {
 public:
  using DataError::DataError;
};

class MissingAsset : public DataError {
 public:
  using DataError::DataError;
};

class EmptyCorpus : public DataError {
 public:
  using DataError::DataError;
};

class DegenerateInput : public DataError {
 public:
  using DataError::DataError;
};

class DimensionMismatch : public DataError {
 public:
  using DataError::DataError;
};

class ZeroVector : public DataError {
 public:
  using DataError::DataError;
};

/// The scoring backend could not be reached.
class ProviderUnavailable : public EnvironmentError {
 public:
  using EnvironmentError::EnvironmentError;
};

/// The scoring backend answered, but the answer breaks the wire contract
/// (wrong count, wrong dimension, unknown fixture key, out-of-range score).
class ProviderContract : public EnvironmentError {
 public:
  using EnvironmentError::EnvironmentError;
};

}  // namespace ragig
