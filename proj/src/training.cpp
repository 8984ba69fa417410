#include "nspinn/training.hpp"

#include <chrono>

namespace nspinn {

Trainer::Trainer(NetworkModel model, CollocationSet col, TrainConfig cfg)
    : model_(std::move(model)),
      snapshot_scratch_(model_),
      col_(std::move(col)),
      cfg_(cfg),
      adam_(model_.parameter_count(), cfg.schedule(), cfg.adam_beta1, cfg.adam_beta2,
            cfg.adam_eps),
      batch_rng_(cfg.seed) {
    cfg_.weights.validate();
    if (cfg_.snapshot_every < 1) throw ConfigError("snapshot cadence must be >= 1");
    params_ = model_.flatten();
    grad_ = Eigen::VectorXd::Zero(params_.size());
    snapshot_ = IterationSnapshot{params_, 0};
}

void Trainer::draw_batch(std::vector<long>& out) {
    const long n = long(col_.fvm.size());
    const long k = std::min(cfg_.batch_fvm, n);
    out.resize(size_t(k));
    if (shuffle_.size() != size_t(n)) {
        shuffle_.resize(size_t(n));
        for (long i = 0; i < n; ++i) shuffle_[size_t(i)] = i;
        shuffle_at_ = size_t(n);  // force reshuffle
    }
    for (long i = 0; i < k; ++i) {
        if (shuffle_at_ >= size_t(n)) {
            // Fisher-Yates reshuffle at epoch boundaries
            for (long j = n - 1; j > 0; --j)
                std::swap(shuffle_[size_t(j)], shuffle_[batch_rng_.below(std::uint64_t(j + 1))]);
            shuffle_at_ = 0;
        }
        out[size_t(i)] = shuffle_[shuffle_at_++];
    }
}

StepRecord Trainer::step() {
    const auto t0 = std::chrono::steady_clock::now();
    model_.anneal_step = step_;

    LossOptions opts;
    opts.physics = cfg_.physics;
    opts.weights = cfg_.weights;
    opts.alpha = cfg_.alpha;
    opts.rc_active = step_ > 0 && cfg_.weights.rc > 0.0;
    opts.ic = col_.unsteady ? &cfg_.ic : nullptr;
    opts.workspace = &workspace_;

    std::vector<long> batch;
    if (cfg_.batch_fvm > 0 && !col_.fvm.empty()) {
        draw_batch(batch);
        opts.fvm_subset = &batch;
    }

    if (opts.rc_active) {
        snapshot_scratch_.unflatten(snapshot_.parameters);
        snapshot_scratch_.anneal_step = snapshot_.iteration_index;
    }

    grad_.setZero();
    StepRecord rec;
    rec.step = step_;
    rec.loss = evaluate_loss(model_, snapshot_scratch_, col_, opts, &grad_);
    if (!grad_.allFinite()) throw NonFiniteLossError("gradient", -1);

    // snapshot holds the parameters this step evaluated with
    if (step_ % cfg_.snapshot_every == 0) snapshot_ = IterationSnapshot{params_, step_};

    adam_.step(params_, grad_);
    model_.unflatten(params_);
    ++step_;

    rec.lr = adam_.last_lr();
    rec.wall_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    last_ = rec;
    return rec;
}

void Trainer::run(const std::function<void(const StepRecord&)>& sink) {
    for (long k = step_; k < cfg_.max_steps; ++k) {
        const StepRecord rec = step();
        if (sink && (rec.step % cfg_.metrics_every == 0 || rec.step + 1 == cfg_.max_steps))
            sink(rec);
    }
}

double Trainer::fvm_residual() const {
    return fvm_residual_level(model_, col_, cfg_.physics, col_.unsteady ? &cfg_.ic : nullptr);
}

}  // namespace nspinn
