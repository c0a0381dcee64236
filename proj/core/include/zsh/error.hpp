#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace zsh {

// Broad failure classes. The CLI maps each to a fixed exit code.
enum class ErrorKind {
    validation,  // bad parameters, inconsistent dimensions, malformed input files
    solver,      // singular systems, non-finite iterates
    protocol,    // violations of the seen/unseen contract
};

class Error : public std::runtime_error
{
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(what), kind_(kind)
    {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

class ValidationError : public Error
{
public:
    explicit ValidationError(const std::string& what)
        : Error(ErrorKind::validation, what)
    {}
};

/// Raised by the file loaders. `row()` is 1-based; 0 when the failure is not
/// tied to a particular row (header, truncation, ...).
class LoadError : public ValidationError
{
public:
    enum class Reason {
        open_failed,
        empty,
        bad_header,
        truncated,
        parse,
        dimension_mismatch,
        non_finite,
        duplicate,
        zero_vector,
        version,
    };

    LoadError(Reason reason, std::size_t row, const std::string& what)
        : ValidationError(what), reason_(reason), row_(row)
    {}

    Reason reason() const noexcept { return reason_; }
    std::size_t row() const noexcept { return row_; }

private:
    Reason reason_;
    std::size_t row_;
};

class SolverError : public Error
{
public:
    explicit SolverError(const std::string& what)
        : Error(ErrorKind::solver, what)
    {}
};

class ProtocolError : public Error
{
public:
    explicit ProtocolError(const std::string& what)
        : Error(ErrorKind::protocol, what)
    {}
};

} // namespace zsh
