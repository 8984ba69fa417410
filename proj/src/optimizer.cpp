#include "nspinn/optimizer.hpp"

#include <cmath>

namespace nspinn {

double lr_schedule(const ScheduleParams& s, long step) {
    if (step < 0) throw ConfigError("negative step in lr_schedule");
    if (s.warmup_steps > 0 && step < s.warmup_steps)
        return s.init_lr * double(step) / double(s.warmup_steps);
    const long span = s.max_steps - s.warmup_steps;
    if (span <= 0) return s.init_lr;
    const double phase = double(std::min(step, s.max_steps) - s.warmup_steps) / double(span);
    return s.init_lr * 0.5 * (1.0 + std::cos(M_PI * phase));
}

void AdamOptimizer::step(Eigen::VectorXd& params, const Eigen::VectorXd& grad) {
    if (grad.size() != params.size() || params.size() != m_.size())
        throw ConfigError("optimizer/parameter size mismatch");
    const double lr = lr_schedule(sched_, step_);
    last_lr_ = lr;
    ++step_;
    m_ = beta1_ * m_ + (1.0 - beta1_) * grad;
    v_ = beta2_ * v_.array().matrix() + (1.0 - beta2_) * grad.array().square().matrix();
    const double bc1 = 1.0 - std::pow(beta1_, double(step_));
    const double bc2 = 1.0 - std::pow(beta2_, double(step_));
    params.array() -=
        lr * (m_.array() / bc1) / ((v_.array() / bc2).sqrt() + eps_);
}

}  // namespace nspinn
