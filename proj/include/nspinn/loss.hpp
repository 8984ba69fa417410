#pragma once

#include <map>
#include <string>
#include <vector>

#include "nspinn/adres.hpp"
#include "nspinn/correction.hpp"
#include "nspinn/fvm.hpp"
#include "nspinn/network.hpp"
#include "nspinn/sampling.hpp"

namespace nspinn {

/// Weights of the composite loss. Unused entries stay zero.
struct LossWeights {
    double fvm_c = 0.0, fvm_m = 0.0, fvm_e = 0.0;
    double ad_c = 0.0, ad_m = 0.0, ad_e = 0.0;
    double rc = 0.0;
    double bc = 1.0;
    double ic = 0.0;

    void validate() const;
    bool operator==(const LossWeights&) const = default;
};

/// Per-component loss values (unweighted) plus the weighted total.
struct LossBreakdown {
    double fvm_c = 0.0, fvm_m = 0.0, fvm_e = 0.0;
    double ad_c = 0.0, ad_m = 0.0, ad_e = 0.0;
    double rc_p = 0.0, rc_u = 0.0, rc_v = 0.0, rc_T = 0.0;
    double bc = 0.0, ic = 0.0;
    double total = 0.0;

    /// Active components by name (entries whose weight was zero are absent).
    std::map<std::string, double> components;
};

struct NonFiniteLossError : std::runtime_error {
    NonFiniteLossError(const std::string& component, long point_index)
        : std::runtime_error("non-finite loss component '" + component + "' at point index " +
                             std::to_string(point_index)),
          component(component),
          point_index(point_index) {}
    std::string component;
    long point_index;
};

/// Reusable evaluation buffers; passing one across steps avoids repeated
/// large allocations in the training loop.
struct EvalWorkspace {
    BatchForward fvm_cur, fvm_snap, ad, bc_val, bc_der, ic;
};

struct LossOptions {
    PhysicsParams physics;
    LossWeights weights;
    double alpha = 0.9;             ///< relaxation factor of the correction terms
    bool rc_active = true;          ///< false on the very first step (no previous iterate)
    const InitialCondition* ic = nullptr;              ///< analytic IC, unsteady cases
    const std::vector<long>* fvm_subset = nullptr;     ///< minibatch indices into col.fvm
    EvalWorkspace* workspace = nullptr;
};

/// Weighted composite loss over a collocation set, with optional parameter
/// gradient accumulation (grad must be zero-initialised to parameter_count).
/// The snapshot model supplies the previous-iteration values entering the
/// correction terms; they are constants with respect to `grad`.
LossBreakdown evaluate_loss(const NetworkModel& model, const NetworkModel& snapshot_model,
                            const CollocationSet& col, const LossOptions& opts,
                            Eigen::VectorXd* grad = nullptr);

/// Unweighted mean-of-squares FVM residual (continuity + momentum (+ energy))
/// of the model over all fvm points; the convergence diagnostic used to
/// compare runs.
double fvm_residual_level(const NetworkModel& model, const CollocationSet& col,
                          const PhysicsParams& physics, const InitialCondition* ic = nullptr);

}  // namespace nspinn
