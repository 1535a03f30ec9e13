#pragma once

#include <stdexcept>
#include <string>

namespace spdcal {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Incompatible or malformed unit tags.
class UnitError : public Error {
public:
    explicit UnitError(const std::string& msg) : Error(msg) {}
};

/// Arguments outside the mathematical domain of an operation.
class DomainError : public Error {
public:
    explicit DomainError(const std::string& msg) : Error(msg) {}
};

/// Invalid file contents or violated dataset invariants.
class ValidationError : public Error {
public:
    explicit ValidationError(const std::string& msg) : Error(msg) {}
};

/// Fit did not converge or the design is singular.
class FitError : public Error {
public:
    explicit FitError(const std::string& msg) : Error(msg) {}
};

} // namespace spdcal
