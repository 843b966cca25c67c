#pragma once

#include <stdexcept>
#include <string>

namespace rigidcert {

/// Base class for all library errors.
struct Error : std::runtime_error {
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Non-finite values (NaN/Inf) in numeric input.
struct NumericInputError : Error {
    using Error::Error;
};

/// Dimension mismatch between operands.
struct ShapeError : Error {
    using Error::Error;
};

/// Structurally invalid model input (disconnected graph, zero-length edge, ...).
struct ModelError : Error {
    using Error::Error;
};

/// Mathematical precondition violated (e.g. non-PSD input where PSD is required).
struct DomainError : Error {
    using Error::Error;
};

/// Iterative search exhausted its budget without certifying either alternative.
/// best_gap / best_residual report how close the search got.
struct UndecidedError : Error {
    UndecidedError(const std::string& what, double gap, double residual)
        : Error(what), best_gap(gap), best_residual(residual) {}
    double best_gap = 0.0;
    double best_residual = 0.0;
};

/// Feasibility search failed: either the set is empty or the budget ran out.
struct InfeasibleError : Error {
    InfeasibleError(const std::string& what, double residual)
        : Error(what), best_residual(residual) {}
    double best_residual = 0.0;
};

}  // namespace rigidcert
