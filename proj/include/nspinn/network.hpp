#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "nspinn/errors.hpp"

namespace nspinn {

/// Random Fourier feature embedding with a band-annealing mask.
///
/// Coordinates are first affinely rescaled (x_tilde = (x - shift) .* scale),
/// then projected through a fixed Gaussian frequency matrix. The embedding
/// output is [x_tilde, cos(g .* (F x_tilde)), sin(g .* (F x_tilde))] where
/// g is the per-band mask. Bands open one after another, each ramping
/// linearly, over the first `anneal_steps` training steps; rows of F are
/// sorted by norm so low frequencies open first. With the mask fully closed
/// the trig channels degenerate to constants (cos -> 1, sin -> 0) and only
/// the raw scaled coordinates remain informative.
struct EmbeddingSpec {
    int input_dim = 2;
    int num_freqs = 0;        ///< number of frequency rows (pairs of channels)
    double sigma = 1.0;       ///< stddev of Gaussian frequency entries
    std::uint64_t seed = 0;   ///< seed used to draw the frequency matrix
    long anneal_steps = 0;    ///< 0 = mask always fully open
    Eigen::VectorXd shift;    ///< per-dim input shift
    Eigen::VectorXd scale;    ///< per-dim input scale
    Eigen::MatrixXd freq;     ///< num_freqs x input_dim, rows sorted by norm

    int out_dim() const { return input_dim + 2 * num_freqs; }

    /// Per-band mask value in [0,1] at a given training step.
    Eigen::VectorXd mask(long step) const;
};

struct DenseLayer {
    Eigen::MatrixXd W;
    Eigen::VectorXd b;
    int in_dim() const { return int(W.cols()); }
    int out_dim() const { return int(W.rows()); }
};

/// Construction-time description of a coordinate network.
struct ModelSpec {
    int input_dim = 2;                              ///< 2 = (x,y), 3 = (t,x,y)
    std::vector<std::string> outputs = {"u", "v", "p"};
    std::vector<int> trunk_widths = {128, 128};     ///< shared hidden layers
    std::vector<int> head_widths = {128};           ///< hidden layers per output head
    int num_freqs = 0;
    double freq_sigma = 1.0;
    long anneal_steps = 0;
    Eigen::VectorXd shift;                          ///< empty = zeros
    Eigen::VectorXd scale;                          ///< empty = ones
    std::uint64_t seed = 1;
};

/// MLP coordinate network: embedding, shared trunk with SiLU activations,
/// and one head per output variable ending in a linear layer. Supports an
/// empty trunk / empty head-hidden list, in which case the network is an
/// affine map of the embedding (useful for exactly-linear test networks).
class NetworkModel {
public:
    EmbeddingSpec embed;
    std::vector<DenseLayer> trunk;
    std::vector<std::vector<DenseLayer>> heads;  ///< last layer of each head is linear
    std::vector<std::string> output_names;
    std::uint64_t init_seed = 0;
    long anneal_step = 0;  ///< annealing schedule state, advanced by the trainer

    static NetworkModel create(const ModelSpec& spec);

    int input_dim() const { return embed.input_dim; }
    int n_outputs() const { return int(heads.size()); }
    int output_index(const std::string& name) const;

    long parameter_count() const;
    Eigen::VectorXd flatten() const;
    void unflatten(const Eigen::VectorXd& params);
};

/// Frozen copy of the parameters at a previous training iteration. Values
/// computed from a snapshot are constants with respect to the current
/// parameter gradient.
struct IterationSnapshot {
    Eigen::VectorXd parameters;
    long iteration_index = 0;

    static IterationSnapshot capture(const NetworkModel& model, long iteration) {
        return IterationSnapshot{model.flatten(), iteration};
    }

    /// Materialise a model with the snapshot parameters, reusing `scratch`
    /// for topology (must have been created from the same spec).
    void restore_into(NetworkModel& scratch) const { scratch.unflatten(parameters); }
};

/// Batched network evaluation with optional propagation of first and second
/// derivatives with respect to the input coordinates, plus reverse-mode
/// accumulation of parameter gradients through everything it computed.
///
/// Derivatives are exact (forward-mode through the layer chain), not finite
/// differences. deriv_order 2 provides the pure second derivatives along
/// each input axis; mixed second derivatives are not propagated (nothing in
/// the residual formulations needs them).
class BatchForward {
public:
    /// X: input_dim x N matrix of coordinates. deriv_order in {0,1,2}.
    void run(const NetworkModel& model, const Eigen::MatrixXd& X, int deriv_order = 0);

    int count() const { return n_; }
    int deriv_order() const { return order_; }
    int n_dirs() const { return order_ >= 1 ? dim_ : 0; }

    const Eigen::RowVectorXd& value(int out) const { return head_y_[size_t(out)]; }
    const Eigen::RowVectorXd& d1(int out, int dir) const { return head_yd1_[size_t(out)][size_t(dir)]; }
    const Eigen::RowVectorXd& d2(int out, int dir) const { return head_yd2_[size_t(out)][size_t(dir)]; }

    /// Adjoint seeds for backward(). Empty row vectors mean "all zero".
    struct Seeds {
        std::vector<Eigen::RowVectorXd> value;                 ///< [out]
        std::vector<std::vector<Eigen::RowVectorXd>> d1, d2;   ///< [out][dir]
    };
    Seeds make_seeds() const;

    /// Accumulates d(sum of seeded outputs)/d(params) into `grad`, which must
    /// have parameter_count entries. Must be called with the same model the
    /// forward pass ran with.
    void backward(const NetworkModel& model, const Seeds& seeds, Eigen::VectorXd& grad) const;

private:
    struct Stage {
        Eigen::MatrixXd Z, A, Sg;  ///< Sg = sigmoid(Z), cached for backward
        std::vector<Eigen::MatrixXd> Zd, Ad, Zdd, Add;  ///< per direction
    };

    int n_ = 0, dim_ = 0, order_ = 0;
    // embedding caches
    Eigen::MatrixXd xt_, C_, S_;                 ///< scaled coords, cos(arg), sin(arg)
    Eigen::MatrixXd fg_;                         ///< masked frequency matrix
    Eigen::MatrixXd e_;                          ///< embedding output
    std::vector<Eigen::MatrixXd> ed1_, ed2_;     ///< per direction
    std::vector<Stage> trunk_;                   ///< one per trunk layer
    std::vector<std::vector<Stage>> head_hidden_;
    std::vector<Eigen::RowVectorXd> head_y_;
    std::vector<std::vector<Eigen::RowVectorXd>> head_yd1_, head_yd2_;

    const Eigen::MatrixXd& trunk_out() const { return trunk_.empty() ? e_ : trunk_.back().A; }
    const Eigen::MatrixXd& trunk_out_d1(int d) const {
        return trunk_.empty() ? ed1_[size_t(d)] : trunk_.back().Ad[size_t(d)];
    }
    const Eigen::MatrixXd& trunk_out_d2(int d) const {
        return trunk_.empty() ? ed2_[size_t(d)] : trunk_.back().Add[size_t(d)];
    }
};

/// SiLU activation x * sigmoid(x) and its first three derivatives,
/// evaluated elementwise.
namespace act {
Eigen::ArrayXXd f(const Eigen::ArrayXXd& z);
Eigen::ArrayXXd d1(const Eigen::ArrayXXd& z);
Eigen::ArrayXXd d2(const Eigen::ArrayXXd& z);
Eigen::ArrayXXd d3(const Eigen::ArrayXXd& z);
}  // namespace act

}  // namespace nspinn
