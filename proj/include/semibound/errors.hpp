#pragma once

#include <complex>
#include <stdexcept>
#include <string>

namespace semibound {

/// Base class for every failure raised by the toolkit.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input: non-square matrix, wrong dimensions, non-finite entries.
class StructuralError : public Error {
public:
    using Error::Error;
};

/// Argument outside the domain of an operation (t < 0, a <= 0, s >= 1, ...).
class DomainError : public Error {
public:
    using Error::Error;
};

/// A hypothesis of an estimate does not hold for the given operator
/// (spectrum in the half-plane, spectrum on the splitting line, ...).
class HypothesisError : public Error {
public:
    using Error::Error;
};

/// z lies on the spectrum to working precision.
class SingularityError : public Error {
public:
    SingularityError(const std::string& what, std::complex<double> nearest)
        : Error(what), nearest_eigenvalue_(nearest) {}

    std::complex<double> nearest_eigenvalue() const noexcept { return nearest_eigenvalue_; }

private:
    std::complex<double> nearest_eigenvalue_;
};

/// Floating-point overflow, e.g. e^{tA} for large t*||A||.
class SaturationError : public Error {
public:
    using Error::Error;
};

/// Laplace integral diverges (Re z not to the right of the spectrum).
class DivergenceError : public Error {
public:
    using Error::Error;
};

/// Iteration cap hit or quadrature failed to converge.
class ConvergenceError : public Error {
public:
    using Error::Error;
};

} // namespace semibound
