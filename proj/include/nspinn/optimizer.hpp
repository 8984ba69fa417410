#pragma once

#include <Eigen/Dense>

#include "nspinn/network.hpp"

namespace nspinn {

/// Warmup cosine decay: linear ramp 0 -> init_lr over warmup_steps, then
/// half-cosine decay to zero at max_steps.
struct ScheduleParams {
    double init_lr = 1e-3;
    long warmup_steps = 0;
    long max_steps = 1;
};

double lr_schedule(const ScheduleParams& s, long step);

/// Adam with the learning-rate schedule above. Moments have the parameter
/// shape; updates are deterministic for a fixed gradient sequence.
class AdamOptimizer {
public:
    AdamOptimizer(long n_params, ScheduleParams sched, double beta1 = 0.9, double beta2 = 0.999,
                  double eps = 1e-8)
        : sched_(sched),
          beta1_(beta1),
          beta2_(beta2),
          eps_(eps),
          m_(Eigen::VectorXd::Zero(n_params)),
          v_(Eigen::VectorXd::Zero(n_params)) {}

    /// Applies one update in place; uses lr_schedule(step counter).
    void step(Eigen::VectorXd& params, const Eigen::VectorXd& grad);

    long step_count() const { return step_; }
    double last_lr() const { return last_lr_; }
    const ScheduleParams& schedule() const { return sched_; }

private:
    ScheduleParams sched_;
    double beta1_, beta2_, eps_;
    Eigen::VectorXd m_, v_;
    long step_ = 0;
    double last_lr_ = 0.0;
};

}  // namespace nspinn
