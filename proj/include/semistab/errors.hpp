#pragma once

#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>

namespace semistab {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed or out-of-contract input (non-finite entries, bad shapes, bad indices).
class InputError : public Error {
public:
    using Error::Error;
};

/// Elimination met a pivot below the singularity threshold.
class SingularError : public Error {
public:
    SingularError(const std::string& what, double pivot) : Error(what), pivot_(pivot) {}
    double pivot() const noexcept { return pivot_; }

private:
    double pivot_;
};

/// e^{tA} is not representable in binary64; t_cap is a time below which it is.
class RangeError : public Error {
public:
    RangeError(const std::string& what, double t_cap) : Error(what), t_cap_(t_cap) {}
    double t_cap() const noexcept { return t_cap_; }

private:
    double t_cap_;
};

/// Shifted QR failed to deflate the active window [lo, hi] within the sweep budget.
class ConvergenceError : public Error {
public:
    ConvergenceError(const std::string& what, std::size_t lo, std::size_t hi)
        : Error(what), lo_(lo), hi_(hi) {}
    std::size_t lo() const noexcept { return lo_; }
    std::size_t hi() const noexcept { return hi_; }

private:
    std::size_t lo_;
    std::size_t hi_;
};

/// A calculus function is not finite at an eigenvalue.
class DomainError : public Error {
public:
    DomainError(const std::string& what, std::complex<double> eigenvalue)
        : Error(what), eigenvalue_(eigenvalue) {}
    std::complex<double> eigenvalue() const noexcept { return eigenvalue_; }

private:
    std::complex<double> eigenvalue_;
};

/// The resolvent was requested at (numerically) a point of the spectrum.
class SpectrumHitError : public Error {
public:
    SpectrumHitError(const std::string& what, double distance) : Error(what), distance_(distance) {}
    /// Smallest singular value of A - lambda I, an estimate of the distance to the spectrum.
    double distance() const noexcept { return distance_; }

private:
    double distance_;
};

/// An operation's precondition on the spectrum failed; witness is the offending eigenvalue.
class PreconditionError : public Error {
public:
    PreconditionError(const std::string& what, std::complex<double> witness)
        : Error(what), witness_(witness) {}
    std::complex<double> witness() const noexcept { return witness_; }

private:
    std::complex<double> witness_;
};

} // namespace semistab
