#pragma once

#include <stdexcept>
#include <string>

namespace exitlab {

/// Base class for all recoverable failures reported by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// The truncated problem has no truncation-stable eigenvalue below the threshold.
class NoDiscreteSpectrum : public Error {
public:
    using Error::Error;
};

class NonConvergence : public Error {
public:
    using Error::Error;
};

class WindowTooShort : public Error {
public:
    using Error::Error;
};

class InsufficientData : public Error {
public:
    using Error::Error;
};

class NonPositiveEstimates : public Error {
public:
    using Error::Error;
};

class MismatchedDomain : public Error {
public:
    using Error::Error;
};

class OutOfWindow : public Error {
public:
    using Error::Error;
};

/// Invalid run configuration; `key()` names the offending entry.
class ConfigError : public Error {
public:
    ConfigError(std::string key, const std::string& what)
        : Error(key + ": " + what), key_(std::move(key)) {}
    const std::string& key() const noexcept { return key_; }

private:
    std::string key_;
};

}  // namespace exitlab
