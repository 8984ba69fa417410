#include "nspinn/network.hpp"

#include <algorithm>
#include <numeric>

#include "nspinn/rng.hpp"

namespace nspinn {

namespace act {

static Eigen::ArrayXXd sigmoid(const Eigen::ArrayXXd& z) {
    return 1.0 / (1.0 + (-z).exp());
}

Eigen::ArrayXXd f(const Eigen::ArrayXXd& z) { return z * sigmoid(z); }

Eigen::ArrayXXd d1(const Eigen::ArrayXXd& z) {
    const Eigen::ArrayXXd s = sigmoid(z);
    return s + z * s * (1.0 - s);
}

Eigen::ArrayXXd d2(const Eigen::ArrayXXd& z) {
    const Eigen::ArrayXXd s = sigmoid(z);
    const Eigen::ArrayXXd s1 = s * (1.0 - s);
    return s1 * (2.0 + z * (1.0 - 2.0 * s));
}

Eigen::ArrayXXd d3(const Eigen::ArrayXXd& z) {
    const Eigen::ArrayXXd s = sigmoid(z);
    const Eigen::ArrayXXd s1 = s * (1.0 - s);
    const Eigen::ArrayXXd s2 = s1 * (1.0 - 2.0 * s);
    const Eigen::ArrayXXd s3 = s2 * (1.0 - 2.0 * s) - 2.0 * s1 * s1;
    return 3.0 * s2 + z * s3;
}

}  // namespace act

Eigen::VectorXd EmbeddingSpec::mask(long step) const {
    Eigen::VectorXd g = Eigen::VectorXd::Ones(num_freqs);
    if (anneal_steps <= 0 || num_freqs == 0) return g;
    const double progress = std::min(1.0, double(step) / double(anneal_steps));
    for (int j = 0; j < num_freqs; ++j) {
        g[j] = std::clamp(progress * num_freqs - j, 0.0, 1.0);
    }
    return g;
}

static DenseLayer glorot_layer(int out, int in, Rng& rng) {
    DenseLayer l;
    const double limit = std::sqrt(6.0 / double(in + out));
    l.W.resize(out, in);
    for (int j = 0; j < in; ++j)
        for (int i = 0; i < out; ++i) l.W(i, j) = rng.uniform(-limit, limit);
    l.b = Eigen::VectorXd::Zero(out);
    return l;
}

NetworkModel NetworkModel::create(const ModelSpec& spec) {
    if (spec.input_dim < 1) throw ConfigError("model input_dim must be >= 1");
    if (spec.outputs.empty()) throw ConfigError("model needs at least one output");

    NetworkModel m;
    m.init_seed = spec.seed;
    m.output_names = spec.outputs;

    Rng rng(spec.seed);

    m.embed.input_dim = spec.input_dim;
    m.embed.num_freqs = spec.num_freqs;
    m.embed.sigma = spec.freq_sigma;
    m.embed.seed = spec.seed;
    m.embed.anneal_steps = spec.anneal_steps;
    m.embed.shift = spec.shift.size() == spec.input_dim ? spec.shift
                                                        : Eigen::VectorXd::Zero(spec.input_dim);
    m.embed.scale = spec.scale.size() == spec.input_dim ? spec.scale
                                                        : Eigen::VectorXd::Ones(spec.input_dim);
    m.embed.freq.resize(spec.num_freqs, spec.input_dim);
    for (int i = 0; i < spec.num_freqs; ++i)
        for (int j = 0; j < spec.input_dim; ++j) m.embed.freq(i, j) = rng.normal(0.0, spec.freq_sigma);
    if (spec.num_freqs > 1) {
        // sort rows by norm so the annealing mask opens low frequencies first
        std::vector<int> order(size_t(spec.num_freqs));
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
            return m.embed.freq.row(a).squaredNorm() < m.embed.freq.row(b).squaredNorm();
        });
        Eigen::MatrixXd sorted(spec.num_freqs, spec.input_dim);
        for (int i = 0; i < spec.num_freqs; ++i) sorted.row(i) = m.embed.freq.row(order[size_t(i)]);
        m.embed.freq = sorted;
    }

    int width_in = m.embed.out_dim();
    for (int w : spec.trunk_widths) {
        m.trunk.push_back(glorot_layer(w, width_in, rng));
        width_in = w;
    }
    const int trunk_out = width_in;
    for (size_t o = 0; o < spec.outputs.size(); ++o) {
        std::vector<DenseLayer> head;
        int in = trunk_out;
        for (int w : spec.head_widths) {
            head.push_back(glorot_layer(w, in, rng));
            in = w;
        }
        head.push_back(glorot_layer(1, in, rng));  // linear output row
        m.heads.push_back(std::move(head));
    }
    return m;
}

int NetworkModel::output_index(const std::string& name) const {
    for (size_t i = 0; i < output_names.size(); ++i)
        if (output_names[i] == name) return int(i);
    throw ConfigError("unknown output variable: " + name);
}

long NetworkModel::parameter_count() const {
    long n = 0;
    for (const auto& l : trunk) n += l.W.size() + l.b.size();
    for (const auto& head : heads)
        for (const auto& l : head) n += l.W.size() + l.b.size();
    return n;
}

Eigen::VectorXd NetworkModel::flatten() const {
    Eigen::VectorXd p(parameter_count());
    long at = 0;
    auto put = [&](const DenseLayer& l) {
        p.segment(at, l.W.size()) = Eigen::Map<const Eigen::VectorXd>(l.W.data(), l.W.size());
        at += l.W.size();
        p.segment(at, l.b.size()) = l.b;
        at += l.b.size();
    };
    for (const auto& l : trunk) put(l);
    for (const auto& head : heads)
        for (const auto& l : head) put(l);
    return p;
}

void NetworkModel::unflatten(const Eigen::VectorXd& params) {
    if (params.size() != parameter_count())
        throw ConfigError("parameter vector length mismatch in unflatten");
    long at = 0;
    auto take = [&](DenseLayer& l) {
        Eigen::Map<Eigen::VectorXd>(l.W.data(), l.W.size()) = params.segment(at, l.W.size());
        at += l.W.size();
        l.b = params.segment(at, l.b.size());
        at += l.b.size();
    };
    for (auto& l : trunk) take(l);
    for (auto& head : heads)
        for (auto& l : head) take(l);
}

// ---------------------------------------------------------------------------
// BatchForward
// ---------------------------------------------------------------------------

void BatchForward::run(const NetworkModel& model, const Eigen::MatrixXd& X, int deriv_order) {
    if (X.rows() != model.input_dim())
        throw ConfigError("coordinate dimensionality " + std::to_string(X.rows()) +
                          " does not match model input_dim " + std::to_string(model.input_dim()));
    if (deriv_order < 0 || deriv_order > 2)
        throw ConfigError("unsupported derivative order " + std::to_string(deriv_order));

    n_ = int(X.cols());
    dim_ = int(X.rows());
    order_ = deriv_order;
    const int nd = n_dirs();
    const int m = model.embed.num_freqs;

    // --- embedding ---
    xt_ = (X.colwise() - model.embed.shift).array().colwise() * model.embed.scale.array();
    const Eigen::VectorXd gmask = model.embed.mask(model.anneal_step);
    fg_ = gmask.asDiagonal() * model.embed.freq;
    Eigen::MatrixXd arg;
    if (m > 0) {
        arg.noalias() = fg_ * xt_;
        C_ = arg.array().cos();
        S_ = arg.array().sin();
    } else {
        C_.resize(0, n_);
        S_.resize(0, n_);
    }
    e_.resize(model.embed.out_dim(), n_);
    e_.topRows(dim_) = xt_;
    if (m > 0) {
        e_.middleRows(dim_, m) = C_;
        e_.bottomRows(m) = S_;
    }
    if (ed1_.size() != size_t(nd)) {
        ed1_.resize(size_t(nd));
        ed2_.resize(size_t(nd));
    }
    for (int d = 0; d < nd; ++d) {
        Eigen::MatrixXd& E1 = ed1_[size_t(d)];
        E1.resize(model.embed.out_dim(), n_);
        E1.topRows(dim_).setZero();
        E1.row(d).setConstant(model.embed.scale[d]);
        if (m > 0) {
            const Eigen::ArrayXd w = fg_.col(d).array();  // d arg / d x_d, per band
            E1.middleRows(dim_, m) = (-S_).array().colwise() * w;
            E1.bottomRows(m) = C_.array().colwise() * w;
        }
        if (order_ >= 2) {
            Eigen::MatrixXd& E2 = ed2_[size_t(d)];
            E2.resize(model.embed.out_dim(), n_);
            E2.topRows(dim_).setZero();
            if (m > 0) {
                const Eigen::ArrayXd w2 = fg_.col(d).array().square();
                E2.middleRows(dim_, m) = (-C_).array().colwise() * w2;
                E2.bottomRows(m) = (-S_).array().colwise() * w2;
            }
        }
    }

    auto run_stage = [&](Stage& st, const DenseLayer& l, const Eigen::MatrixXd& in,
                         const std::vector<Eigen::MatrixXd>* in_d1,
                         const std::vector<Eigen::MatrixXd>* in_d2) {
        st.Z.noalias() = l.W * in;
        st.Z.colwise() += l.b;
        st.Sg = (1.0 + (-st.Z.array()).exp()).inverse();  // sigmoid, cached for backward
        st.A = st.Z.array() * st.Sg.array();
        if (st.Zd.size() != size_t(nd)) {
            st.Zd.resize(size_t(nd));
            st.Ad.resize(size_t(nd));
            st.Zdd.resize(size_t(nd));
            st.Add.resize(size_t(nd));
        }
        if (nd > 0) {
            const auto S = st.Sg.array();
            const auto Z = st.Z.array();
            const Eigen::ArrayXXd s1 = S * (1.0 - S);
            const Eigen::ArrayXXd a1 = S + Z * s1;
            Eigen::ArrayXXd a2;
            if (order_ >= 2) a2 = s1 * (2.0 + Z * (1.0 - 2.0 * S));
            for (int d = 0; d < nd; ++d) {
                st.Zd[size_t(d)].noalias() = l.W * (*in_d1)[size_t(d)];
                st.Ad[size_t(d)] = a1 * st.Zd[size_t(d)].array();
                if (order_ >= 2) {
                    st.Zdd[size_t(d)].noalias() = l.W * (*in_d2)[size_t(d)];
                    st.Add[size_t(d)] = a2 * st.Zd[size_t(d)].array().square() +
                                        a1 * st.Zdd[size_t(d)].array();
                }
            }
        }
    };

    if (trunk_.size() != model.trunk.size()) trunk_.resize(model.trunk.size());
    {
        const Eigen::MatrixXd* in = &e_;
        const std::vector<Eigen::MatrixXd>* in1 = &ed1_;
        const std::vector<Eigen::MatrixXd>* in2 = &ed2_;
        for (size_t l = 0; l < model.trunk.size(); ++l) {
            run_stage(trunk_[l], model.trunk[l], *in, in1, in2);
            in = &trunk_[l].A;
            in1 = &trunk_[l].Ad;
            in2 = &trunk_[l].Add;
        }
    }

    const size_t n_heads = model.heads.size();
    if (head_hidden_.size() != n_heads) {
        head_hidden_.resize(n_heads);
        head_y_.resize(n_heads);
        head_yd1_.resize(n_heads);
        head_yd2_.resize(n_heads);
    }
    for (size_t o = 0; o < n_heads; ++o) {
        const auto& layers = model.heads[o];
        const Eigen::MatrixXd* in = &trunk_out();
        const std::vector<Eigen::MatrixXd>* in1 = nullptr;
        const std::vector<Eigen::MatrixXd>* in2 = nullptr;
        std::vector<Eigen::MatrixXd> t1(static_cast<size_t>(nd));
        std::vector<Eigen::MatrixXd> t2(static_cast<size_t>(nd));
        if (nd > 0) {
            for (int d = 0; d < nd; ++d) {
                t1[size_t(d)] = trunk_out_d1(d);
                if (order_ >= 2) t2[size_t(d)] = trunk_out_d2(d);
            }
            in1 = &t1;
            in2 = &t2;
        }
        if (head_hidden_[o].size() != layers.size() - 1)
            head_hidden_[o].resize(layers.size() - 1);
        for (size_t l = 0; l + 1 < layers.size(); ++l) {
            run_stage(head_hidden_[o][l], layers[l], *in, in1, in2);
            in = &head_hidden_[o][l].A;
            in1 = &head_hidden_[o][l].Ad;
            in2 = &head_hidden_[o][l].Add;
        }
        const DenseLayer& out = layers.back();
        head_y_[o] = (out.W * (*in)).row(0);
        head_y_[o].array() += out.b[0];
        if (head_yd1_[o].size() != size_t(nd)) {
            head_yd1_[o].resize(size_t(nd));
            head_yd2_[o].resize(size_t(nd));
        }
        for (int d = 0; d < nd; ++d) {
            head_yd1_[o][size_t(d)] = (out.W * (*in1)[size_t(d)]).row(0);
            if (order_ >= 2) head_yd2_[o][size_t(d)] = (out.W * (*in2)[size_t(d)]).row(0);
        }
    }
}

BatchForward::Seeds BatchForward::make_seeds() const {
    Seeds s;
    s.value.assign(head_y_.size(), Eigen::RowVectorXd());
    s.d1.assign(head_y_.size(), std::vector<Eigen::RowVectorXd>(size_t(n_dirs())));
    s.d2.assign(head_y_.size(), std::vector<Eigen::RowVectorXd>(size_t(n_dirs())));
    return s;
}

void BatchForward::backward(const NetworkModel& model, const Seeds& seeds,
                            Eigen::VectorXd& grad) const {
    if (grad.size() != model.parameter_count())
        throw ConfigError("gradient vector length mismatch in backward");
    const int nd = n_dirs();

    // parameter offsets in flatten() order
    std::vector<long> trunk_off(model.trunk.size());
    std::vector<std::vector<long>> head_off(model.heads.size());
    {
        long at = 0;
        for (size_t l = 0; l < model.trunk.size(); ++l) {
            trunk_off[l] = at;
            at += model.trunk[l].W.size() + model.trunk[l].b.size();
        }
        for (size_t o = 0; o < model.heads.size(); ++o) {
            head_off[o].resize(model.heads[o].size());
            for (size_t l = 0; l < model.heads[o].size(); ++l) {
                head_off[o][l] = at;
                at += model.heads[o][l].W.size() + model.heads[o][l].b.size();
            }
        }
    }

    auto add_wb = [&](long off, const DenseLayer& l, const Eigen::MatrixXd& gz,
                      const Eigen::MatrixXd& in) {
        Eigen::Map<Eigen::MatrixXd> gW(grad.data() + off, l.W.rows(), l.W.cols());
        gW.noalias() += gz * in.transpose();
        grad.segment(off + l.W.size(), l.b.size()) += gz.rowwise().sum();
    };
    // tangent paths (z_dot = W a_dot) carry no bias dependence
    auto add_w = [&](long off, const DenseLayer& l, const Eigen::MatrixXd& gz,
                     const Eigen::MatrixXd& in) {
        Eigen::Map<Eigen::MatrixXd> gW(grad.data() + off, l.W.rows(), l.W.cols());
        gW.noalias() += gz * in.transpose();
    };

    struct Adj {
        Eigen::MatrixXd A;
        std::vector<Eigen::MatrixXd> Ad, Add;
    };

    // Reverse pass through one dense+activation stage. `in*` are the stage's
    // inputs as used in the forward pass; `adj` holds gradients wrt the stage
    // outputs on entry and gradients wrt the stage inputs on return.
    auto back_stage = [&](const Stage& st, const DenseLayer& l, long off, const Eigen::MatrixXd& in,
                          const std::vector<Eigen::MatrixXd>* in_d1,
                          const std::vector<Eigen::MatrixXd>* in_d2, Adj& adj) {
        const auto S = st.Sg.array();
        const auto Z = st.Z.array();
        Eigen::MatrixXd gZ;
        std::vector<Eigen::MatrixXd> gZd(static_cast<size_t>(nd));
        std::vector<Eigen::MatrixXd> gZdd(static_cast<size_t>(nd));
        if (nd == 0) {
            // fused: a1 = S + Z.S.(1-S), single pass
            gZ = adj.A.array() * (S + Z * S * (1.0 - S));
        } else {
            const Eigen::ArrayXXd s1 = S * (1.0 - S);
            const Eigen::ArrayXXd a1 = S + Z * s1;
            gZ = adj.A.array() * a1;
            const Eigen::ArrayXXd s2 = s1 * (1.0 - 2.0 * S);
            const Eigen::ArrayXXd a2 = 2.0 * s1 + Z * s2;
            Eigen::ArrayXXd a3;
            if (order_ >= 2) a3 = 3.0 * s2 + Z * (s2 * (1.0 - 2.0 * S) - 2.0 * s1 * s1);
            for (int d = 0; d < nd; ++d) {
                const size_t sd = size_t(d);
                const bool has1 = adj.Ad[sd].size() > 0;
                const bool has2 = order_ >= 2 && adj.Add[sd].size() > 0;
                if (has1) {
                    gZ.array() += adj.Ad[sd].array() * a2 * st.Zd[sd].array();
                    gZd[sd] = adj.Ad[sd].array() * a1;
                }
                if (has2) {
                    gZ.array() += adj.Add[sd].array() *
                                  (a3 * st.Zd[sd].array().square() + a2 * st.Zdd[sd].array());
                    if (gZd[sd].size() == 0) gZd[sd] = Eigen::MatrixXd::Zero(st.Z.rows(), n_);
                    gZd[sd].array() += adj.Add[sd].array() * 2.0 * a2 * st.Zd[sd].array();
                    gZdd[sd] = adj.Add[sd].array() * a1;
                }
            }
        }
        add_wb(off, l, gZ, in);
        adj.A.noalias() = l.W.transpose() * gZ;
        for (int d = 0; d < nd; ++d) {
            const size_t sd = size_t(d);
            if (gZd[sd].size() > 0) {
                add_w(off, l, gZd[sd], (*in_d1)[sd]);
                adj.Ad[sd].noalias() = l.W.transpose() * gZd[sd];
            } else {
                adj.Ad[sd].resize(0, 0);
            }
            if (order_ >= 2 && gZdd[sd].size() > 0) {
                add_w(off, l, gZdd[sd], (*in_d2)[sd]);
                adj.Add[sd].noalias() = l.W.transpose() * gZdd[sd];
            } else if (order_ >= 2) {
                adj.Add[sd].resize(0, 0);
            }
        }
    };

    // accumulated adjoint at the trunk output
    Adj trunk_adj;
    trunk_adj.A = Eigen::MatrixXd::Zero(trunk_out().rows(), n_);
    trunk_adj.Ad.assign(size_t(nd), Eigen::MatrixXd());
    trunk_adj.Add.assign(size_t(nd), Eigen::MatrixXd());

    for (size_t o = 0; o < model.heads.size(); ++o) {
        const auto& layers = model.heads[o];
        const bool seed_v = seeds.value[o].size() > 0;
        bool any = seed_v;
        for (int d = 0; d < nd; ++d) {
            if (seeds.d1[o][size_t(d)].size() > 0) any = true;
            if (order_ >= 2 && seeds.d2[o][size_t(d)].size() > 0) any = true;
        }
        if (!any) continue;

        const Eigen::MatrixXd& last_in =
            layers.size() > 1 ? head_hidden_[o].back().A : trunk_out();
        auto last_in_d1 = [&](int d) -> const Eigen::MatrixXd& {
            return layers.size() > 1 ? head_hidden_[o].back().Ad[size_t(d)] : trunk_out_d1(d);
        };
        auto last_in_d2 = [&](int d) -> const Eigen::MatrixXd& {
            return layers.size() > 1 ? head_hidden_[o].back().Add[size_t(d)] : trunk_out_d2(d);
        };

        // output linear layer
        const DenseLayer& out = layers.back();
        const long out_off = head_off[o].back();
        Adj adj;
        adj.Ad.assign(size_t(nd), Eigen::MatrixXd());
        adj.Add.assign(size_t(nd), Eigen::MatrixXd());
        {
            Eigen::MatrixXd gy = Eigen::MatrixXd::Zero(1, n_);
            if (seed_v) gy.row(0) = seeds.value[o];
            add_wb(out_off, out, gy, last_in);
            adj.A.noalias() = out.W.transpose() * gy;
            for (int d = 0; d < nd; ++d) {
                const size_t sd = size_t(d);
                if (seeds.d1[o][sd].size() > 0) {
                    Eigen::MatrixXd gyd = seeds.d1[o][sd];
                    add_w(out_off, out, gyd, last_in_d1(d));
                    adj.Ad[sd].noalias() = out.W.transpose() * gyd;
                }
                if (order_ >= 2 && seeds.d2[o][sd].size() > 0) {
                    Eigen::MatrixXd gydd = seeds.d2[o][sd];
                    add_w(out_off, out, gydd, last_in_d2(d));
                    adj.Add[sd].noalias() = out.W.transpose() * gydd;
                }
            }
        }

        // hidden head layers in reverse
        for (size_t li = layers.size() - 1; li-- > 0;) {
            const Eigen::MatrixXd& in = li == 0 ? trunk_out() : head_hidden_[o][li - 1].A;
            std::vector<Eigen::MatrixXd> tmp1(static_cast<size_t>(nd));
            std::vector<Eigen::MatrixXd> tmp2(static_cast<size_t>(nd));
            const std::vector<Eigen::MatrixXd>* in1 = nullptr;
            const std::vector<Eigen::MatrixXd>* in2 = nullptr;
            if (nd > 0) {
                for (int d = 0; d < nd; ++d) {
                    tmp1[size_t(d)] = li == 0 ? trunk_out_d1(d) : head_hidden_[o][li - 1].Ad[size_t(d)];
                    if (order_ >= 2)
                        tmp2[size_t(d)] =
                            li == 0 ? trunk_out_d2(d) : head_hidden_[o][li - 1].Add[size_t(d)];
                }
                in1 = &tmp1;
                in2 = &tmp2;
            }
            back_stage(head_hidden_[o][li], layers[li], head_off[o][li], in, in1, in2, adj);
        }

        trunk_adj.A += adj.A;
        for (int d = 0; d < nd; ++d) {
            const size_t sd = size_t(d);
            if (adj.Ad[sd].size() > 0) {
                if (trunk_adj.Ad[sd].size() == 0)
                    trunk_adj.Ad[sd] = Eigen::MatrixXd::Zero(trunk_out().rows(), n_);
                trunk_adj.Ad[sd] += adj.Ad[sd];
            }
            if (order_ >= 2 && adj.Add[sd].size() > 0) {
                if (trunk_adj.Add[sd].size() == 0)
                    trunk_adj.Add[sd] = Eigen::MatrixXd::Zero(trunk_out().rows(), n_);
                trunk_adj.Add[sd] += adj.Add[sd];
            }
        }
    }

    // trunk layers in reverse; adjoints below the embedding are not needed
    // (the frequency matrix is fixed, not trained)
    for (size_t li = model.trunk.size(); li-- > 0;) {
        const Eigen::MatrixXd& in = li == 0 ? e_ : trunk_[li - 1].A;
        std::vector<Eigen::MatrixXd> tmp1(static_cast<size_t>(nd));
            std::vector<Eigen::MatrixXd> tmp2(static_cast<size_t>(nd));
        const std::vector<Eigen::MatrixXd>* in1 = nullptr;
        const std::vector<Eigen::MatrixXd>* in2 = nullptr;
        if (nd > 0) {
            for (int d = 0; d < nd; ++d) {
                tmp1[size_t(d)] = li == 0 ? ed1_[size_t(d)] : trunk_[li - 1].Ad[size_t(d)];
                if (order_ >= 2) tmp2[size_t(d)] = li == 0 ? ed2_[size_t(d)] : trunk_[li - 1].Add[size_t(d)];
            }
            in1 = &tmp1;
            in2 = &tmp2;
        }
        back_stage(trunk_[li], model.trunk[li], trunk_off[li], in, in1, in2, trunk_adj);
        if (li == 0) break;
    }
    (void)model;
}

}  // namespace nspinn
