#pragma once

#include <stdexcept>
#include <string>

namespace harvest {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Input violates a domain invariant (tag rules, event fields).
class ValidationError : public Error {
public:
    using Error::Error;
};

/// An identifier refers to a record that does not exist.
class ReferenceError : public Error {
public:
    using Error::Error;
};

class NotFoundError : public Error {
public:
    using Error::Error;
};

/// The operation conflicts with the current state (e.g. a second review).
class ConflictError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

class ArgumentError : public Error {
public:
    using Error::Error;
};

/// Signatures or digests built with different parameters were compared.
class ComparisonError : public Error {
public:
    using Error::Error;
};

class ExtractionError : public Error {
public:
    using Error::Error;
};

class CalibrationError : public Error {
public:
    using Error::Error;
};

class StoreError : public Error {
public:
    using Error::Error;
};

}  // namespace harvest
