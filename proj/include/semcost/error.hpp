#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace semcost {

/// Base for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input text (scenario markup, session files, backend output).
class ParseError : public Error {
public:
    using Error::Error;
};

/// Structurally valid input that violates a domain invariant. `field()`
/// names the offending field, e.g. "obstacles[2].id".
class ValidationError : public Error {
public:
    ValidationError(std::string field, const std::string& message)
        : Error(field + ": " + message), field_(std::move(field)) {}

    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

/// A caller broke an operation's precondition (occupied endpoint, negative
/// gain, mismatched field dimensions, ...).
class PreconditionError : public Error {
public:
    using Error::Error;
};

/// Persistence problems: version mismatch or corrupt state file.
class StateError : public Error {
public:
    using Error::Error;
};

}  // namespace semcost
