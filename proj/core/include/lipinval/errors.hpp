#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace lipinval {

/// Input that violates a documented precondition (dimension mismatch, empty data, bad norm).
class InvalidInput : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Malformed dataset file. Carries the file and the 1-based line where parsing stopped.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& file, std::size_t line, const std::string& what)
        : std::runtime_error(file + ":" + std::to_string(line) + ": " + what), file_(file), line_(line) {}

    const std::string& file() const noexcept { return file_; }
    std::size_t line() const noexcept { return line_; }

private:
    std::string file_;
    std::size_t line_;
};

/// Data that contradicts the Lipschitz assumption outright (e.g. infinite slope estimate).
class InconsistentData : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// The solver hit a pivot/node cap or numerical trouble; no verdict can be claimed.
class Inconclusive : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace lipinval
