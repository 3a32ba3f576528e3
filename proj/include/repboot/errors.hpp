#pragma once

#include <stdexcept>
#include <string>

namespace repboot {

// Base for all recoverable errors raised by the library. The CLI maps these
// to exit code 1 with a single-line diagnostic.
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& message)
        : std::runtime_error(code + ": " + message), code_(std::move(code)) {}

    const std::string& code() const noexcept { return code_; }

private:
    std::string code_;
};

// Input value outside its documented domain (e.g. rating not in [0,1]).
class DomainError : public Error {
public:
    explicit DomainError(const std::string& message) : Error("domain", message) {}
};

// Invalid combination of configuration parameters.
class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& message) : Error("config", message) {}
};

// Structural problem in a composition topology.
class TopologyError : public Error {
public:
    TopologyError(std::string code, const std::string& message)
        : Error(std::move(code), message) {}
};

// Iterative solver failed to reach its tolerance.
class ConvergenceError : public Error {
public:
    ConvergenceError(const std::string& message, double residual)
        : Error("convergence", message), residual_(residual) {}

    double residual() const noexcept { return residual_; }

private:
    double residual_;
};

// Malformed or schema-violating input file.
class ParseError : public Error {
public:
    explicit ParseError(const std::string& message) : Error("parse", message) {}
};

}  // namespace repboot
