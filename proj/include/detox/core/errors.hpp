#pragma once

#include <stdexcept>
#include <string>

namespace detox {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Invalid configuration, source mapping, or unsupported service setup.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Transport failure after the retry budget is spent.
class ServiceError : public Error {
 public:
  using Error::Error;
};

/// A service answered, but the body does not follow the wire schema.
class ProtocolError : public Error {
 public:
  using Error::Error;
};

/// Replay mode asked for a request that was never recorded.
class CassetteMiss : public ServiceError {
 public:
  explicit CassetteMiss(std::string fingerprint)
      : ServiceError("cassette miss for request fingerprint " + fingerprint),
        fingerprint_(std::move(fingerprint)) {}

  const std::string& fingerprint() const noexcept { return fingerprint_; }

 private:
  std::string fingerprint_;
};

class TemplateError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

/// A stage received data that violates its preconditions (e.g. unscored samples).
class PipelineError : public Error {
 public:
  using Error::Error;
};

}  // namespace detox
