#pragma once

#include <stdexcept>
#include <string>

namespace tuplemax {

// An argument violated a documented precondition or type invariant.
class InvalidInputError : public std::invalid_argument {
 public:
  explicit InvalidInputError(const std::string& what) : std::invalid_argument(what) {}
};

// Exact tuple enumeration would exceed the enumeration cap; callers should
// fall back to the sampled estimator.
class EnumerationInfeasibleError : public std::runtime_error {
 public:
  explicit EnumerationInfeasibleError(const std::string& what) : std::runtime_error(what) {}
};

// A sequence is too short for the requested transform.
class SequenceTooShortError : public InvalidInputError {
 public:
  explicit SequenceTooShortError(const std::string& what) : InvalidInputError(what) {}
};

// Checkpoint file is malformed: bad magic, truncated payload, or an
// inconsistent embedded configuration.
class CorruptCheckpointError : public std::runtime_error {
 public:
  explicit CorruptCheckpointError(const std::string& what) : std::runtime_error(what) {}
};

// Checkpoint declares a format version newer than this build supports.
class UnsupportedVersionError : public std::runtime_error {
 public:
  explicit UnsupportedVersionError(const std::string& what) : std::runtime_error(what) {}
};

// Corpus file is malformed or truncated.
class CorruptDataError : public std::runtime_error {
 public:
  explicit CorruptDataError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace tuplemax
