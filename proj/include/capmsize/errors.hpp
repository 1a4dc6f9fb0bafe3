#pragma once

#include <stdexcept>
#include <string>

namespace capmsize {

// Root of everything thrown deliberately. The two families below map to CLI
// exit codes: InputError -> 2, ComputationError -> 1.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Bad user-supplied material: files, configs, arguments.
class InputError : public Error {
public:
    using Error::Error;
};

// The computation itself failed on admissible input.
class ComputationError : public Error {
public:
    using Error::Error;
};

// Argument outside the mathematical domain of an operation.
class DomainError : public InputError {
public:
    explicit DomainError(const std::string& what) : InputError("domain error: " + what) {}
};

// Malformed input file; message carries file and line where possible.
class ParseError : public InputError {
public:
    explicit ParseError(const std::string& what) : InputError("parse error: " + what) {}
};

// Series that must share a time axis do not.
class AlignmentError : public InputError {
public:
    explicit AlignmentError(const std::string& what) : InputError("alignment error: " + what) {}
};

// Requested range or grid not covered by the available data.
class CoverageError : public InputError {
public:
    explicit CoverageError(const std::string& what) : InputError("coverage error: " + what) {}
};

// A quantity the computation must divide by or factor has collapsed.
class DegenerateError : public ComputationError {
public:
    explicit DegenerateError(const std::string& what) : ComputationError("degenerate error: " + what) {}
};

// An iterative scheme ran out of iterations.
class ConvergenceError : public ComputationError {
public:
    explicit ConvergenceError(const std::string& what) : ComputationError("convergence error: " + what) {}
};

// A simulated path left the admissible region.
class BlowUpError : public ComputationError {
public:
    BlowUpError(const std::string& what, long path, long step)
        : ComputationError("blow-up error: " + what), path_(path), step_(step) {}
    long path() const noexcept { return path_; }
    long step() const noexcept { return step_; }

private:
    long path_;
    long step_;
};

}  // namespace capmsize
