#pragma once

#include <stdexcept>
#include <string>

namespace demonlab {

// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A state or matrix failed its structural invariants (Hermitian, unit trace, PSD, unitary).
class InvariantError : public Error {
public:
    using Error::Error;
};

// Bad argument: dimension mismatch, zero dimension, non-bijective table.
class ArgumentError : public Error {
public:
    using Error::Error;
};

// Joint dimension exceeds the configured cap.
class SizeError : public Error {
public:
    using Error::Error;
};

// Operation precondition not met (e.g. non-diagonal input where diagonal is required).
class PreconditionError : public Error {
public:
    using Error::Error;
};

// Requested value lies outside the reachable domain (e.g. entropy beyond ln N).
class DomainError : public Error {
public:
    using Error::Error;
};

// T <= 0. Zero-temperature reservoirs are not modelled.
class TemperatureError : public Error {
public:
    using Error::Error;
};

// Numerical consistency check failed or an iteration did not converge.
class NumericalError : public Error {
public:
    using Error::Error;
};

// A thermodynamic inequality that must hold was violated. Always an implementation bug.
class TheoremViolation : public Error {
public:
    TheoremViolation(std::string inequality, const std::string& detail)
        : Error(inequality + ": " + detail), inequality_(std::move(inequality)) {}

    const std::string& inequality() const noexcept { return inequality_; }

private:
    std::string inequality_;
};

} // namespace demonlab
