#pragma once

#include <stdexcept>
#include <string>

namespace arcades {

/// Base of every error raised by the pipeline.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A document does not match its schema. `path()` names the offending field,
/// e.g. `classes[2].methods[0].access`.
class SchemaError : public Error {
public:
    SchemaError(std::string path, const std::string& what)
        : Error(path.empty() ? what : path + ": " + what), path_(std::move(path)) {}

    const std::string& path() const noexcept { return path_; }

private:
    std::string path_;
};

/// A well-formed document violates a model invariant (duplicate id, dangling
/// reference, ...).
class ValidationError : public Error {
public:
    using Error::Error;
};

/// A line-oriented input (repository log) could not be parsed.
class LineError : public Error {
public:
    LineError(std::size_t line, const std::string& what)
        : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

}  // namespace arcades
