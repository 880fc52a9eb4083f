#pragma once

#include <stdexcept>
#include <string>

namespace cvteleport {

/// Base class for all library errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Parameter outside its documented domain (eta, nbar, ...).
struct InvalidParameter : Error {
    using Error::Error;
};

/// Fock states have no Gaussian phase-space representation.
struct NonGaussianInput : Error {
    using Error::Error;
};

/// Two-mode operation invoked with i == j or an out-of-range mode.
struct InvalidModePair : Error {
    using Error::Error;
};

/// Operation requires a specific mode count (e.g. inseparability needs 2).
struct InvalidModeCount : Error {
    using Error::Error;
};

/// Homodyne marginal has (numerically) zero variance.
struct DegenerateMarginal : Error {
    using Error::Error;
};

/// PA channel with R = 0: the squeeze ratio k = g/G vanishes.
struct DegenerateGain : Error {
    using Error::Error;
};

/// Density matrix fails Hermiticity / unit-trace checks.
struct InvalidDensityMatrix : Error {
    using Error::Error;
};

/// Quadrature or truncation refinement did not settle within tolerance.
struct ConvergenceFailure : Error {
    using Error::Error;
};

/// closed_form_fidelity asked for a (scheme, input) pair with no closed form.
struct NoClosedForm : Error {
    using Error::Error;
};

/// Monte-Carlo protocol needs a finite resource squeezing to sample outcomes.
struct RequiresFiniteSqueezing : Error {
    using Error::Error;
};

/// EPR inputs are scored with the inseparability metrics, not chi-square fidelities.
struct EprInputUnsupported : Error {
    using Error::Error;
};

} // namespace cvteleport
