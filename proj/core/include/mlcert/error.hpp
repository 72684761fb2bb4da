#pragma once

#include <stdexcept>
#include <string>

namespace mlcert {

// Base class for all toolkit errors so callers can catch mlcert failures
// separately from generic std exceptions.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Invalid numeric input (non-finite coordinate, bad distribution parameter).
class DomainError : public Error {
public:
    using Error::Error;
};

// Structurally malformed input: missing ODD dimension, wrong file schema.
class SchemaError : public Error {
public:
    using Error::Error;
};

// odd restriction whose interval does not intersect the current one.
class InvalidRestrictionError : public Error {
public:
    using Error::Error;
};

// Gaussian-process kernel matrix could not be factorized even after
// jitter escalation.
class FitError : public Error {
public:
    using Error::Error;
};

// Operation needs at least one observation.
class InsufficientDataError : public Error {
public:
    using Error::Error;
};

// Operation restricted to a specific dimensionality in this version.
class UnsupportedDimensionError : public Error {
public:
    using Error::Error;
};

// Missing or inconsistent configuration (e.g. assurance-table entry).
class ConfigError : public Error {
public:
    using Error::Error;
};

// Dataset split cannot be performed (single sequence, degenerate fraction).
class SplitError : public Error {
public:
    using Error::Error;
};

// Change order references digests that are absent or already removed.
class ConflictError : public Error {
public:
    using Error::Error;
};

// Object store I/O failure.
class StorageError : public Error {
public:
    using Error::Error;
};

// Metric has no defined value on the given input.
class UndefinedMetricError : public Error {
public:
    using Error::Error;
};

// SUT harness failures.
class HarnessError : public Error {
public:
    using Error::Error;
};

class TimeoutError : public HarnessError {
public:
    using HarnessError::HarnessError;
};

class ProtocolError : public HarnessError {
public:
    using HarnessError::HarnessError;
};

class ProcessError : public HarnessError {
public:
    using HarnessError::HarnessError;
};

} // namespace mlcert
