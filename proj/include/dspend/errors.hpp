#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace dspend {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A precondition on an argument was violated.
class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// A linear solve, spectrum check or other numerical step failed.
class NumericalError : public Error {
public:
    using Error::Error;
};

/// E[Phi] >= 1: the adversary outpaces the honest chain and every attack succeeds.
class UnstableRegime : public Error {
public:
    explicit UnstableRegime(double mean_phi)
        : Error("unstable regime: E[Phi] = " + std::to_string(mean_phi) + " >= 1"), mean_phi_(mean_phi) {}
    double mean_phi() const noexcept { return mean_phi_; }

private:
    double mean_phi_;
};

/// Malformed input text; line is 1-based, 0 when not attributable to a line.
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t line)
        : Error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// An iterative procedure hit its iteration cap; carries the iterate trace.
class NonConvergence : public Error {
public:
    NonConvergence(const std::string& what, std::vector<double> trace)
        : Error(what), trace_(std::move(trace)) {}
    const std::vector<double>& trace() const noexcept { return trace_; }

private:
    std::vector<double> trace_;
};

}  // namespace dspend
