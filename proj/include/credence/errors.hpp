#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace credence {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Bad run config / provider config / inadmissible scorer combination. Exit code 2.
struct ConfigError : Error {
  using Error::Error;
};

// Transport or provider-side failure. `retryable` marks transport/5xx errors,
// which the client retries with backoff before giving up. Exit code 3.
struct ProviderError : Error {
  ProviderError(const std::string& what, bool retryable_, int attempts_ = 1)
      : Error(what), retryable(retryable_), attempts(attempts_) {}
  bool retryable = false;
  int attempts = 1;
};

// Strict-replay lookup failed. The offending key is part of the message so a
// stale fixture store is diagnosable from the error alone.
struct ReplayMissError : ProviderError {
  explicit ReplayMissError(const std::string& key_)
      : ProviderError("strict replay miss, no recorded payload for key " + key_, false),
        key(key_) {}
  std::string key;
};

// Provider answered but the payload could not be decoded against the
// configured response paths. Carries the raw body for postmortems.
struct DecodeError : ProviderError {
  DecodeError(const std::string& what, std::string raw_body)
      : ProviderError(what, false), raw(std::move(raw_body)) {}
  std::string raw;
};

// Provider text output that violates an expected format (claim extraction,
// claim merging, question inversion, verbalized confidence, grading).
struct FormatError : Error {
  FormatError(const std::string& what, std::string raw_output)
      : Error(what), raw(std::move(raw_output)) {}
  std::string raw;
};

// Zero-norm embedding, empty token list, and similar unusable inputs.
struct DegenerateInputError : Error {
  using Error::Error;
};

struct ConvergenceError : Error {
  ConvergenceError(const std::string& what, double residual_)
      : Error(what), residual(residual_) {}
  double residual = 0.0;
};

// Cost-model audit mismatch. Exit code 4.
struct AuditError : Error {
  using Error::Error;
};

}  // namespace credence
