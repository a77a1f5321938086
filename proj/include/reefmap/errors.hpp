#pragma once

#include <stdexcept>
#include <string>

namespace reefmap {

// Root of every error raised by the library. The `kind()` string is stable
// and is what callers (and the CLI exit-code mapping) dispatch on.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
    virtual const char* kind() const noexcept { return "error"; }
};

// Malformed input text or header.
class FormatError : public Error {
public:
    using Error::Error;
    const char* kind() const noexcept override { return "format"; }
};

// Face/vertex index out of range.
class IndexError : public Error {
public:
    using Error::Error;
    const char* kind() const noexcept override { return "index"; }
};

// Binary payload ended early.
class TruncationError : public Error {
public:
    using Error::Error;
    const char* kind() const noexcept override { return "truncation"; }
};

// Quaternion too far from unit norm.
class PoseError : public Error {
public:
    using Error::Error;
    const char* kind() const noexcept override { return "pose"; }
};

class DuplicateError : public Error {
public:
    using Error::Error;
    const char* kind() const noexcept override { return "duplicate"; }
};

// Detection coordinate outside the normalized image square.
class RangeError : public Error {
public:
    using Error::Error;
    const char* kind() const noexcept override { return "range"; }
};

// Value outside an operation's mathematical domain (e.g. log of a negative).
class DomainError : public Error {
public:
    using Error::Error;
    const char* kind() const noexcept override { return "domain"; }
};

// Two grids that should share geometry do not.
class ShapeError : public Error {
public:
    using Error::Error;
    const char* kind() const noexcept override { return "shape"; }
};

// Detection frames with no matching pose.
class MappingError : public Error {
public:
    using Error::Error;
    const char* kind() const noexcept override { return "mapping"; }
};

// Caller broke a documented precondition (bad config, non-finite input, ...).
class PreconditionError : public Error {
public:
    using Error::Error;
    const char* kind() const noexcept override { return "precondition"; }
};

// Scenario/config schema violation; `path()` names the failing key.
class ConfigError : public Error {
public:
    ConfigError(std::string key_path, const std::string& what)
        : Error(key_path + ": " + what), path_(std::move(key_path)) {}
    const char* kind() const noexcept override { return "config"; }
    const std::string& path() const noexcept { return path_; }

private:
    std::string path_;
};

}  // namespace reefmap
