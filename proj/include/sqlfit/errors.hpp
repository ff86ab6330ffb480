#pragma once

#include <stdexcept>
#include <string>

namespace sqlfit {

/// Base class for all toolkit errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Bad command-line usage or malformed API arguments (exit code 1).
class UsageError : public Error {
public:
    using Error::Error;
};

/// Malformed input that could not be parsed: JSON files, SQL text (exit code 2).
class ParseError : public Error {
public:
    ParseError(const std::string& msg, std::size_t position = npos)
        : Error(position == npos ? msg : msg + " (at offset " + std::to_string(position) + ")"),
          position_(position) {}

    static constexpr std::size_t npos = static_cast<std::size_t>(-1);
    std::size_t position() const { return position_; }

private:
    std::size_t position_;
};

/// Identifier resolution failure against a schema: unknown or ambiguous names.
class ResolutionError : public ParseError {
public:
    using ParseError::ParseError;
};

/// Well-formed input that violates a corpus invariant (exit code 2).
class ValidationError : public Error {
public:
    using Error::Error;
};

/// Bad tokenizer or pipeline configuration (exit code 2).
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Filesystem failure: unreadable input, unwritable output (exit code 3).
class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace sqlfit
