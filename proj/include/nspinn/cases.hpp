#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "nspinn/loss.hpp"
#include "nspinn/sampling.hpp"
#include "nspinn/training.hpp"

namespace nspinn {

/// Model-architecture knobs of a case (the solver defaults are desk-scale;
/// widths and embedding size are free parameters of the method).
struct ModelConfig {
    std::vector<int> trunk_widths = {64, 64};
    std::vector<int> head_widths = {64};
    int num_freqs = 32;
    double freq_sigma = 2.0;
    long anneal_steps = -1;  ///< -1 = 20% of max_steps
    bool operator==(const ModelConfig&) const = default;
};

/// Fully resolved benchmark configuration: geometry, boundary and initial
/// conditions, physical parameters, discretisation, loss weights and
/// optimizer schedule.
struct CaseConfig {
    std::string case_id;
    PhysicsParams physics;
    Geometry geometry;
    std::vector<BcEntry> bcs;
    InitialCondition ic;
    GridResolution grid;
    ModelConfig model;

    double init_lr = 1e-3;
    long max_steps = 1000;
    long warmup_steps = -1;
    long batch_fvm = 0;
    long snapshot_every = 1;
    long metrics_every = 100;
    long checkpoint_every = 0;  ///< 0 = final checkpoint only
    double alpha = 0.9;
    LossWeights weights;
    std::uint64_t seed = 1;

    std::optional<double> p_inf;                      ///< pressure coefficient reference
    std::optional<std::array<double, 4>> eval_window;  ///< [x0,x1,y0,y1] analysis window

    ModelSpec model_spec() const;
    TrainConfig train_config() const;
    CollocationSet build_collocation() const;

    /// Checks the structural invariants (weights valid, bc coverage, grid
    /// uniformity); throws ConfigError on violation.
    void validate() const;
};

bool operator==(const CaseConfig& a, const CaseConfig& b);

/// Registered benchmark case identifiers.
const std::vector<std::string>& case_registry();

/// Build a case with its registered defaults. `overrides` is a JSON object
/// (text) applied on top of the defaults; an empty string applies none.
CaseConfig build_case(const std::string& case_id, const std::string& overrides_json = "");

/// Config file round-trip.
std::string to_config_json(const CaseConfig& cfg);
CaseConfig from_config_json(const std::string& text);
CaseConfig load_config_file(const std::string& path);

/// FNV-1a hash of the canonical serialisation; stable across runs.
std::uint64_t config_hash(const CaseConfig& cfg);

}  // namespace nspinn
