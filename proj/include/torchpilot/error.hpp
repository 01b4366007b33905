#pragma once

#include <stdexcept>
#include <string>

namespace torchpilot {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidInput : public Error {
public:
    using Error::Error;
};

/// All hull candidates are collinear (or fewer than three distinct points).
class DegenerateHull : public Error {
public:
    using Error::Error;
};

/// A pool feature could not be computed from the current frame.
class FeatureUnavailable : public Error {
public:
    using Error::Error;
};

class CalibrationFailed : public Error {
public:
    using Error::Error;
};

/// Config text could not be parsed; carries the 1-based location.
class ConfigParseError : public Error {
public:
    ConfigParseError(const std::string& msg, std::size_t line, std::size_t column)
        : Error(msg), line_(line), column_(column) {}

    std::size_t line() const noexcept { return line_; }
    std::size_t column() const noexcept { return column_; }

private:
    std::size_t line_;
    std::size_t column_;
};

/// A config value violates a module invariant. The message names the invariant.
class ConfigValidationError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

} // namespace torchpilot
