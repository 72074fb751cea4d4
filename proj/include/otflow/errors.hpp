#pragma once

#include <stdexcept>
#include <string>

namespace otflow {

/// Root of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Shapes or dimensions that do not fit together.
class StructuralError : public Error {
public:
    using Error::Error;
};

/// An algebraic axiom (antisymmetry, Jacobi, ...) fails beyond tolerance.
class ValidationError : public Error {
public:
    using Error::Error;
};

/// Structure parameters violate the row-sum or pluriclosed admissibility constraints.
class AdmissibilityError : public Error {
public:
    using Error::Error;
};

/// Metric is not Hermitian, not positive definite, or not in the required shape.
class MetricError : public Error {
public:
    using Error::Error;
};

/// A closed-form path was requested but its hypotheses do not hold.
class HypothesisError : public Error {
public:
    using Error::Error;
};

/// The integrator broke an invariant that the exact flow preserves.
class IntegrationError : public Error {
public:
    using Error::Error;
};

}  // namespace otflow
