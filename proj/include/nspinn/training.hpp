#pragma once

#include <functional>

#include "nspinn/loss.hpp"
#include "nspinn/optimizer.hpp"
#include "nspinn/rng.hpp"

namespace nspinn {

struct TrainConfig {
    long max_steps = 1000;
    double init_lr = 1e-3;
    long warmup_steps = -1;     ///< -1 = 5% of max_steps
    long batch_fvm = 0;         ///< 0 = full batch
    long snapshot_every = 1;    ///< snapshot refresh cadence in steps
    long metrics_every = 100;
    std::uint64_t seed = 1;     ///< batch shuffling seed
    double alpha = 0.9;
    LossWeights weights;
    PhysicsParams physics;
    InitialCondition ic;        ///< used by unsteady cases
    double adam_beta1 = 0.9, adam_beta2 = 0.999, adam_eps = 1e-8;

    ScheduleParams schedule() const {
        ScheduleParams s;
        s.init_lr = init_lr;
        s.warmup_steps = warmup_steps >= 0 ? warmup_steps : max_steps / 20;
        s.max_steps = max_steps;
        return s;
    }
};

struct StepRecord {
    long step = 0;
    double lr = 0.0;
    LossBreakdown loss;
    double wall_ms = 0.0;
};

/// Owns the model, the optimizer state, and the iteration snapshot, and runs
/// the training loop: evaluate the composite loss and gradient against the
/// previous-iteration snapshot, refresh the snapshot with the pre-update
/// parameters, then apply the Adam update with the scheduled learning rate.
class Trainer {
public:
    Trainer(NetworkModel model, CollocationSet col, TrainConfig cfg);

    /// One optimizer step; throws NonFiniteLossError on NaN loss/gradient.
    StepRecord step();

    /// Runs up to cfg.max_steps steps, invoking `sink` (if set) at step 0,
    /// every metrics_every steps, and at the final step.
    void run(const std::function<void(const StepRecord&)>& sink = nullptr);

    const NetworkModel& model() const { return model_; }
    NetworkModel& model() { return model_; }
    const CollocationSet& collocation() const { return col_; }
    const IterationSnapshot& snapshot() const { return snapshot_; }
    const TrainConfig& config() const { return cfg_; }
    long step_count() const { return step_; }
    const StepRecord& last_record() const { return last_; }

    /// Unweighted FVM residual level of the current model over all fvm points.
    double fvm_residual() const;

private:
    void draw_batch(std::vector<long>& out);

    NetworkModel model_;
    NetworkModel snapshot_scratch_;
    CollocationSet col_;
    TrainConfig cfg_;
    AdamOptimizer adam_;
    IterationSnapshot snapshot_;
    Eigen::VectorXd params_, grad_;
    Rng batch_rng_;
    EvalWorkspace workspace_;
    std::vector<long> shuffle_;
    size_t shuffle_at_ = 0;
    long step_ = 0;
    StepRecord last_;
};

}  // namespace nspinn
