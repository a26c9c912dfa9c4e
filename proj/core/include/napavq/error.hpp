#pragma once

#include <stdexcept>
#include <string>

namespace napavq {

/// Base class for every error raised by the library. The category string is
/// what the CLI prints in front of the message.
class Error : public std::runtime_error {
public:
    Error(std::string category, const std::string& what)
        : std::runtime_error(what), category_(std::move(category)) {}

    const std::string& category() const noexcept { return category_; }

private:
    std::string category_;
};

/// A precondition of an operation was violated by the caller.
struct ContractViolation : Error {
    explicit ContractViolation(const std::string& what) : Error("contract violation", what) {}
};

/// An operation needed at least one coding vector and found none.
struct EmptyModelError : Error {
    explicit EmptyModelError(const std::string& what) : Error("empty model", what) {}
};

/// A configuration value is missing, malformed or out of range. `key` names
/// the offending entry when there is one.
struct ConfigError : Error {
    ConfigError(const std::string& key, const std::string& what)
        : Error("configuration error", key.empty() ? what : key + ": " + what), key(key) {}
    std::string key;
};

/// NaN or Inf showed up where a finite number was required.
struct NumericFailure : Error {
    explicit NumericFailure(const std::string& what) : Error("numeric failure", what) {}
};

/// A class has no samples where at least one is required.
struct MissingClassError : Error {
    explicit MissingClassError(const std::string& what) : Error("missing class", what) {}
};

/// Malformed input document. `line` is 1-based, 0 when unknown.
struct ParseError : Error {
    ParseError(const std::string& where, std::size_t line, const std::string& what)
        : Error("parse error",
                where + (line ? ":" + std::to_string(line) : std::string()) + ": " + what),
          line(line) {}
    std::size_t line;
};

struct IoError : Error {
    IoError(const std::string& path, const std::string& what)
        : Error("i/o error", path + ": " + what), path(path) {}
    std::string path;
};

}  // namespace napavq
