#pragma once

#include <vector>

#include "nspinn/fvm.hpp"

namespace nspinn {

/// Velocity/pressure (and temperature) correction magnitudes derived from
/// the discrete residuals of two consecutive training iterations. `cur`
/// holds the current-iteration (n) stencil samples, `prev` the samples of
/// the same stencil evaluated with the previous-iteration parameters.
struct CorrectionTerms {
    double R_p = 0.0;
    double R_u = 0.0;
    double R_v = 0.0;
    double R_T = 0.0;  ///< populated only for thermal physics
};

CorrectionTerms correction_terms(const StencilEvaluation& cur, const StencilEvaluation& prev);

/// Second-order extrapolation to the next iterate. Exposed for testing and
/// diagnostics; the correction losses below already have it folded in.
inline double extrapolate_next(double value_n, double value_nm1) {
    return 2.0 * value_n - value_nm1;
}

/// Per-point residual-correction arguments phi_P^n - phi_P^{n-1} - alpha*R_phi.
struct RcPointValues {
    double e_p = 0.0, e_u = 0.0, e_v = 0.0, e_T = 0.0;
};

RcPointValues rc_point(const StencilEvaluation& cur, const StencilEvaluation& prev, double alpha);

/// L1 residual-correction losses over a batch of correction points.
struct RcLosses {
    double rc_p = 0.0, rc_u = 0.0, rc_v = 0.0, rc_T = 0.0;
};

RcLosses rc_losses(const std::vector<StencilEvaluation>& cur,
                   const std::vector<StencilEvaluation>& prev, double alpha);

/// RC_T alone (thermal cases): mean |T_P^n - T_P^{n-1} - alpha*R_T|.
double temperature_correction(const std::vector<StencilEvaluation>& cur,
                              const std::vector<StencilEvaluation>& prev, double alpha);

struct EmptyBatchError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace nspinn
