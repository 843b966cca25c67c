#pragma once

#include "rigidcert/errors.hpp"

namespace rigidcert {

/// Numerical thresholds shared across the library.
///  - rank_cut: eigenvalue magnitude below rank_cut*max(1,|lambda|_max) counts as zero
///  - psd_slack: allowed magnitude of negative eigenvalues in PSD tests
///  - feas_residual: bound on affine-constraint residuals
struct Tolerances {
    double rank_cut = 1e-9;
    double psd_slack = 1e-9;
    double feas_residual = 1e-7;

    void validate() const {
        if (!(rank_cut > 0.0) || !(psd_slack > 0.0) || !(feas_residual > 0.0)) {
            throw DomainError("tolerances must be strictly positive");
        }
    }
};

}  // namespace rigidcert
