#include "nspinn/loss.hpp"

#include <cmath>

namespace nspinn {

void LossWeights::validate() const {
    const double all[] = {fvm_c, fvm_m, fvm_e, ad_c, ad_m, ad_e, rc, bc, ic};
    for (double w : all)
        if (w < 0.0 || !std::isfinite(w)) throw ConfigError("loss weights must be finite and >= 0");
    if (fvm_c + fvm_m + fvm_e + ad_c + ad_m + ad_e <= 0.0)
        throw ConfigError("at least one PDE loss weight must be positive");
}

namespace {

inline double sgn(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

struct OutputIdx {
    int u = -1, v = -1, p = -1, T = -1;
};

OutputIdx output_indices(const NetworkModel& m) {
    OutputIdx ix;
    ix.u = m.output_index("u");
    ix.v = m.output_index("v");
    ix.p = m.output_index("p");
    for (const auto& n : m.output_names)
        if (n == "T") ix.T = m.output_index("T");
    return ix;
}

/// Column layout of the FVM evaluation batch: 9 stencil columns per point,
/// then 5 previous-time columns for every point whose previous-time samples
/// come from the network.
struct FvmLayout {
    std::vector<long> prev_base;  ///< -1 = previous-time values from the IC
    long total = 0;
};

}  // namespace

// ---------------------------------------------------------------------------
// FVM + correction block
// ---------------------------------------------------------------------------

namespace {

struct FvmBlock {
    double sum_rc2 = 0.0, sum_rm2 = 0.0, sum_re2 = 0.0;
    double sum_ep = 0.0, sum_eu = 0.0, sum_ev = 0.0, sum_eT = 0.0;
    long count = 0;
};

void fill_eval(StencilEvaluation& ev, const BatchForward& fw, const OutputIdx& ix, long col0,
               long prev_base, const InitialCondition* ic, const FvmPoint& pt, double h,
               double dt, bool unsteady, const PhysicsParams& physics) {
    ev.h = h;
    ev.dt = dt;
    ev.unsteady = unsteady;
    ev.physics = physics;
    for (int j = 0; j < kStencilSize; ++j) {
        ev.u[j] = fw.value(ix.u)[col0 + j];
        ev.v[j] = fw.value(ix.v)[col0 + j];
        ev.p[j] = fw.value(ix.p)[col0 + j];
        if (ix.T >= 0) ev.T[j] = fw.value(ix.T)[col0 + j];
    }
    if (!unsteady) return;
    if (prev_base >= 0) {
        for (int j = 0; j < kPrevSize; ++j) {
            ev.u_prev[j] = fw.value(ix.u)[prev_base + j];
            ev.v_prev[j] = fw.value(ix.v)[prev_base + j];
            if (ix.T >= 0) ev.T_prev[j] = fw.value(ix.T)[prev_base + j];
        }
    } else {
        const auto locs = stencil_prev_coordinates(Point2{pt.x, pt.y}, h);
        for (int j = 0; j < kPrevSize; ++j) {
            double u0 = 0, v0 = 0, T0 = 0;
            if (ic) ic->eval(locs[size_t(j)].x, locs[size_t(j)].y, u0, v0, T0);
            ev.u_prev[j] = u0;
            ev.v_prev[j] = v0;
            ev.T_prev[j] = T0;
        }
    }
}

}  // namespace

LossBreakdown evaluate_loss(const NetworkModel& model, const NetworkModel& snapshot_model,
                            const CollocationSet& col, const LossOptions& opts,
                            Eigen::VectorXd* grad) {
    opts.weights.validate();
    if (col.fvm.empty() && col.ad.empty())
        throw ConfigError("collocation set has no PDE residual points");
    if (col.unsteady && col.fvm.size() > 0 && !opts.ic)
        throw ConfigError("unsteady evaluation requires an initial condition");

    const OutputIdx ix = output_indices(model);
    const PhysicsParams& ph = opts.physics;
    if (ph.thermal && ix.T < 0) throw ConfigError("thermal physics needs a T output head");
    const LossWeights& w = opts.weights;
    const bool rc_on = opts.rc_active && w.rc > 0.0 && !col.fvm.empty();
    const bool fvm_on = !col.fvm.empty() && (w.fvm_c > 0 || w.fvm_m > 0 || w.fvm_e > 0 || rc_on);
    const bool ad_on = !col.ad.empty() && (w.ad_c > 0 || w.ad_m > 0 || w.ad_e > 0);
    const int tdim = model.input_dim() == 3 ? 1 : 0;  // column offset of x in inputs
    if (col.unsteady && tdim == 0) throw ConfigError("unsteady collocation needs a (t,x,y) model");

    LossBreakdown out;

    // ---------------- FVM residuals and correction terms ----------------
    if (fvm_on) {
        std::vector<long> all;
        const std::vector<long>* subset = opts.fvm_subset;
        if (!subset) {
            all.resize(col.fvm.size());
            for (size_t i = 0; i < all.size(); ++i) all[i] = long(i);
            subset = &all;
        }
        const long K = long(subset->size());
        if (K == 0) throw EmptyBatchError("empty fvm batch");

        FvmLayout layout;
        layout.prev_base.assign(size_t(K), -1);
        layout.total = 9 * K;
        if (col.unsteady) {
            for (long k = 0; k < K; ++k) {
                const FvmPoint& pt = col.fvm[size_t((*subset)[size_t(k)])];
                if (!pt.prev_from_ic) {
                    layout.prev_base[size_t(k)] = layout.total;
                    layout.total += kPrevSize;
                }
            }
        }

        Eigen::MatrixXd X(model.input_dim(), layout.total);
        for (long k = 0; k < K; ++k) {
            const FvmPoint& pt = col.fvm[size_t((*subset)[size_t(k)])];
            const auto locs = stencil_coordinates(Point2{pt.x, pt.y}, col.h);
            for (int j = 0; j < kStencilSize; ++j) {
                if (tdim) X(0, 9 * k + j) = pt.t;
                X(tdim, 9 * k + j) = locs[size_t(j)].x;
                X(tdim + 1, 9 * k + j) = locs[size_t(j)].y;
            }
            const long pb = layout.prev_base[size_t(k)];
            if (pb >= 0) {
                const auto plocs = stencil_prev_coordinates(Point2{pt.x, pt.y}, col.h);
                for (int j = 0; j < kPrevSize; ++j) {
                    X(0, pb + j) = pt.t - col.dt;
                    X(1, pb + j) = plocs[size_t(j)].x;
                    X(2, pb + j) = plocs[size_t(j)].y;
                }
            }
        }

        EvalWorkspace local_ws;
        EvalWorkspace& ws = opts.workspace ? *opts.workspace : local_ws;
        BatchForward& cur = ws.fvm_cur;
        cur.run(model, X, 0);
        BatchForward& snap = ws.fvm_snap;
        if (rc_on) snap.run(snapshot_model, X, 0);

        BatchForward::Seeds seeds = cur.make_seeds();
        const bool want_grad = grad != nullptr;
        if (want_grad) {
            seeds.value[size_t(ix.u)] = Eigen::RowVectorXd::Zero(layout.total);
            seeds.value[size_t(ix.v)] = Eigen::RowVectorXd::Zero(layout.total);
            seeds.value[size_t(ix.p)] = Eigen::RowVectorXd::Zero(layout.total);
            if (ix.T >= 0) seeds.value[size_t(ix.T)] = Eigen::RowVectorXd::Zero(layout.total);
        }

        FvmBlock blk;
        blk.count = K;
        const double h = col.h;
        const double nu = ph.momentum_nu();
        const double a_NB = -nu;
        const double invK = 1.0 / double(K);

        StencilEvaluation ev, sev;
        for (long k = 0; k < K; ++k) {
            const FvmPoint& pt = col.fvm[size_t((*subset)[size_t(k)])];
            const long col0 = 9 * k;
            const long pb = layout.prev_base[size_t(k)];
            fill_eval(ev, cur, ix, col0, pb, opts.ic, pt, h, col.dt, col.unsteady, ph);

            const double a = diag_coefficient(ev);
            const double r_c = continuity_residual(ev);
            const double r_u = momentum_residual(ev, Component::U);
            const double r_v = momentum_residual(ev, Component::V);
            const double r_T = ph.thermal ? energy_residual(ev) : 0.0;
            if (!std::isfinite(r_c)) throw NonFiniteLossError("fvm_c", (*subset)[size_t(k)]);
            if (!std::isfinite(r_u) || !std::isfinite(r_v))
                throw NonFiniteLossError("fvm_m", (*subset)[size_t(k)]);
            if (ph.thermal && !std::isfinite(r_T))
                throw NonFiniteLossError("fvm_e", (*subset)[size_t(k)]);

            blk.sum_rc2 += r_c * r_c;
            blk.sum_rm2 += r_u * r_u + r_v * r_v;
            blk.sum_re2 += r_T * r_T;

            RcPointValues e;
            if (rc_on) {
                fill_eval(sev, snap, ix, col0, pb, opts.ic, pt, h, col.dt, col.unsteady, ph);
                e = rc_point(ev, sev, opts.alpha);
                if (!std::isfinite(e.e_p) || !std::isfinite(e.e_u) || !std::isfinite(e.e_v) ||
                    !std::isfinite(e.e_T))
                    throw NonFiniteLossError("rc", (*subset)[size_t(k)]);
                blk.sum_ep += std::abs(e.e_p);
                blk.sum_eu += std::abs(e.e_u);
                blk.sum_ev += std::abs(e.e_v);
                blk.sum_eT += std::abs(e.e_T);
            }

            if (!want_grad) continue;

            // ---- adjoint seeds, hand-derived from the residual formulas ----
            const double alpha = opts.alpha;
            const double a_T = ph.thermal ? diag_coefficient_energy(ev) : 1.0;
            const double nu_T = ph.energy_nu();

            const double wc = w.fvm_c * 2.0 * r_c * invK;
            const double wu = w.fvm_m * 2.0 * r_u * invK;
            const double wv = w.fvm_m * 2.0 * r_v * invK;
            const double wT = ph.thermal ? w.fvm_e * 2.0 * r_T * invK : 0.0;
            const double sp = rc_on ? w.rc * sgn(e.e_p) * invK : 0.0;
            const double su = rc_on ? w.rc * sgn(e.e_u) * invK : 0.0;
            const double sv = rc_on ? w.rc * sgn(e.e_v) * invK : 0.0;
            const double sT = rc_on && ph.thermal ? w.rc * sgn(e.e_T) * invK : 0.0;

            // r_u appears in the momentum loss and inside R_u (coefficient
            // -1/a); neighbour and b terms additionally appear directly in
            // R_u, doubling their effective weight.
            const double wu1 = wu + su * alpha / a;
            const double wu2 = wu + 2.0 * su * alpha / a;
            const double wv1 = wv + sv * alpha / a;
            const double wv2 = wv + 2.0 * sv * alpha / a;
            const double wT1 = wT + sT * alpha / a_T;
            const double wT2 = wT + 2.0 * sT * alpha / a_T;
            const double wc_eff = wc + sp * alpha * a / (4.0 * h);

            auto gu = [&](long c) -> double& { return seeds.value[size_t(ix.u)][c]; };
            auto gv = [&](long c) -> double& { return seeds.value[size_t(ix.v)][c]; };
            auto gp = [&](long c) -> double& { return seeds.value[size_t(ix.p)][c]; };

            // continuity faces (+ R_p's r_c path)
            gu(col0 + LOC_e) += wc_eff;
            gu(col0 + LOC_w) -= wc_eff;
            gv(col0 + LOC_n) += wc_eff;
            gv(col0 + LOC_s) -= wc_eff;

            // u-momentum
            gu(col0 + LOC_P) += su + wu1 * a;
            for (int nb = LOC_E; nb <= LOC_S; ++nb) gu(col0 + nb) += wu2 * a_NB;
            gu(col0 + LOC_e) += wu1 * 2.0 * h * ev.u[LOC_e];
            gu(col0 + LOC_w) -= wu1 * 2.0 * h * ev.u[LOC_w];
            gu(col0 + LOC_n) += wu1 * h * ev.v[LOC_n];
            gu(col0 + LOC_s) -= wu1 * h * ev.v[LOC_s];
            gv(col0 + LOC_n) += wu1 * h * ev.u[LOC_n];
            gv(col0 + LOC_s) -= wu1 * h * ev.u[LOC_s];
            gp(col0 + LOC_e) += wu2 * h;
            gp(col0 + LOC_w) -= wu2 * h;

            // v-momentum
            gv(col0 + LOC_P) += sv + wv1 * a;
            for (int nb = LOC_E; nb <= LOC_S; ++nb) gv(col0 + nb) += wv2 * a_NB;
            gv(col0 + LOC_e) += wv1 * h * ev.u[LOC_e];
            gv(col0 + LOC_w) -= wv1 * h * ev.u[LOC_w];
            gv(col0 + LOC_n) += wv1 * 2.0 * h * ev.v[LOC_n];
            gv(col0 + LOC_s) -= wv1 * 2.0 * h * ev.v[LOC_s];
            gu(col0 + LOC_e) += wv1 * h * ev.v[LOC_e];
            gu(col0 + LOC_w) -= wv1 * h * ev.v[LOC_w];
            gp(col0 + LOC_n) += wv2 * h;
            gp(col0 + LOC_s) -= wv2 * h;

            // pressure correction: direct p dependencies
            gp(col0 + LOC_P) += sp;
            for (int nb = LOC_E; nb <= LOC_S; ++nb) gp(col0 + nb) -= sp * alpha / 4.0;

            // thermal system: buoyancy source and energy residual
            if (ph.thermal) {
                auto gT = [&](long c) -> double& { return seeds.value[size_t(ix.T)][c]; };
                gT(col0 + LOC_P) += wv1 * (-h * h);  // buoyancy inside r_v
                gT(col0 + LOC_P) += sT + wT1 * a_T;
                for (int nb = LOC_E; nb <= LOC_S; ++nb) gT(col0 + nb) += wT2 * (-nu_T);
                gT(col0 + LOC_e) += wT1 * h * ev.u[LOC_e];
                gT(col0 + LOC_w) -= wT1 * h * ev.u[LOC_w];
                gT(col0 + LOC_n) += wT1 * h * ev.v[LOC_n];
                gT(col0 + LOC_s) -= wT1 * h * ev.v[LOC_s];
                gu(col0 + LOC_e) += wT1 * h * ev.T[LOC_e];
                gu(col0 + LOC_w) -= wT1 * h * ev.T[LOC_w];
                gv(col0 + LOC_n) += wT1 * h * ev.T[LOC_n];
                gv(col0 + LOC_s) -= wT1 * h * ev.T[LOC_s];
            }

            // previous-time samples evaluated through the current network
            if (pb >= 0) {
                const double ht2 = h * h / col.dt;
                gu(pb + PREV_P) += wu2 * (-ht2);
                gv(pb + PREV_P) += wv2 * (-ht2);
                if (ph.thermal)
                    seeds.value[size_t(ix.T)][pb + PREV_P] += wT2 * (-ht2);
                // DIV_P inside R_p: d e_p / d DIV_P = -alpha/(4h)
                const double wdiv = -sp * alpha / (4.0 * h) * ht2;
                gu(pb + PREV_e) += wdiv;
                gu(pb + PREV_w) -= wdiv;
                gv(pb + PREV_n) += wdiv;
                gv(pb + PREV_s) -= wdiv;
            }
        }

        out.fvm_c = blk.sum_rc2 * invK;
        out.fvm_m = blk.sum_rm2 * invK;
        out.fvm_e = blk.sum_re2 * invK;
        if (rc_on) {
            out.rc_p = blk.sum_ep * invK;
            out.rc_u = blk.sum_eu * invK;
            out.rc_v = blk.sum_ev * invK;
            out.rc_T = blk.sum_eT * invK;
        }

        if (want_grad) cur.backward(model, seeds, *grad);
    }

    // ---------------- AD residuals ----------------
    if (ad_on) {
        const long M = long(col.ad.size());
        Eigen::MatrixXd X(model.input_dim(), M);
        for (long i = 0; i < M; ++i) {
            if (tdim) X(0, i) = col.ad[size_t(i)].t;
            X(tdim, i) = col.ad[size_t(i)].x;
            X(tdim + 1, i) = col.ad[size_t(i)].y;
        }
        EvalWorkspace local_ws;
        BatchForward& fw = opts.workspace ? opts.workspace->ad : local_ws.ad;
        fw.run(model, X, 2);
        const int dX = tdim, dY = tdim + 1, dT = 0;
        const double invM = 1.0 / double(M);
        const double nu = ph.momentum_nu();
        const double kappa = ph.energy_nu();

        BatchForward::Seeds seeds = fw.make_seeds();
        if (grad) {
            for (int o : {ix.u, ix.v, ix.p}) {
                seeds.value[size_t(o)] = Eigen::RowVectorXd::Zero(M);
                for (int d = 0; d < fw.n_dirs(); ++d) {
                    seeds.d1[size_t(o)][size_t(d)] = Eigen::RowVectorXd::Zero(M);
                    seeds.d2[size_t(o)][size_t(d)] = Eigen::RowVectorXd::Zero(M);
                }
            }
            if (ix.T >= 0) {
                seeds.value[size_t(ix.T)] = Eigen::RowVectorXd::Zero(M);
                for (int d = 0; d < fw.n_dirs(); ++d) {
                    seeds.d1[size_t(ix.T)][size_t(d)] = Eigen::RowVectorXd::Zero(M);
                    seeds.d2[size_t(ix.T)][size_t(d)] = Eigen::RowVectorXd::Zero(M);
                }
            }
        }

        double sum_c2 = 0, sum_m2 = 0, sum_e2 = 0;
        for (long i = 0; i < M; ++i) {
            FieldDerivs f;
            f.u = fw.value(ix.u)[i];
            f.v = fw.value(ix.v)[i];
            f.p = fw.value(ix.p)[i];
            f.u_x = fw.d1(ix.u, dX)[i];
            f.u_y = fw.d1(ix.u, dY)[i];
            f.v_x = fw.d1(ix.v, dX)[i];
            f.v_y = fw.d1(ix.v, dY)[i];
            f.p_x = fw.d1(ix.p, dX)[i];
            f.p_y = fw.d1(ix.p, dY)[i];
            f.u_xx = fw.d2(ix.u, dX)[i];
            f.u_yy = fw.d2(ix.u, dY)[i];
            f.v_xx = fw.d2(ix.v, dX)[i];
            f.v_yy = fw.d2(ix.v, dY)[i];
            if (tdim) {
                f.u_t = fw.d1(ix.u, dT)[i];
                f.v_t = fw.d1(ix.v, dT)[i];
            }
            if (ix.T >= 0) {
                f.T = fw.value(ix.T)[i];
                f.T_x = fw.d1(ix.T, dX)[i];
                f.T_y = fw.d1(ix.T, dY)[i];
                f.T_xx = fw.d2(ix.T, dX)[i];
                f.T_yy = fw.d2(ix.T, dY)[i];
                if (tdim) f.T_t = fw.d1(ix.T, dT)[i];
            }
            const AdResidual r = pde_residual_ad(f, ph, col.unsteady);
            if (!std::isfinite(r.res_c)) throw NonFiniteLossError("ad_c", i);
            if (!std::isfinite(r.res_u) || !std::isfinite(r.res_v))
                throw NonFiniteLossError("ad_m", i);
            if (ph.thermal && !std::isfinite(r.res_T)) throw NonFiniteLossError("ad_e", i);
            sum_c2 += r.res_c * r.res_c;
            sum_m2 += r.res_u * r.res_u + r.res_v * r.res_v;
            sum_e2 += r.res_T * r.res_T;

            if (!grad) continue;
            const double ac = w.ad_c * 2.0 * r.res_c * invM;
            const double au = w.ad_m * 2.0 * r.res_u * invM;
            const double av = w.ad_m * 2.0 * r.res_v * invM;
            const double aT = ph.thermal ? w.ad_e * 2.0 * r.res_T * invM : 0.0;

            if (!ph.thermal) {
                seeds.value[size_t(ix.u)][i] += au * (2.0 * f.u_x + f.v_y) + av * f.v_x;
                seeds.value[size_t(ix.v)][i] += au * f.u_y + av * (f.u_x + 2.0 * f.v_y);
                seeds.d1[size_t(ix.u)][size_t(dX)][i] += ac + au * 2.0 * f.u + av * f.v;
                seeds.d1[size_t(ix.u)][size_t(dY)][i] += au * f.v;
                seeds.d1[size_t(ix.v)][size_t(dX)][i] += av * f.u;
                seeds.d1[size_t(ix.v)][size_t(dY)][i] += ac + au * f.u + av * 2.0 * f.v;
            } else {
                seeds.value[size_t(ix.u)][i] += au * f.u_x + av * f.v_x + aT * f.T_x;
                seeds.value[size_t(ix.v)][i] += au * f.u_y + av * f.v_y + aT * f.T_y;
                seeds.value[size_t(ix.T)][i] += -av;
                seeds.d1[size_t(ix.u)][size_t(dX)][i] += ac + au * f.u;
                seeds.d1[size_t(ix.u)][size_t(dY)][i] += au * f.v;
                seeds.d1[size_t(ix.v)][size_t(dX)][i] += av * f.u;
                seeds.d1[size_t(ix.v)][size_t(dY)][i] += ac + av * f.v;
                seeds.d1[size_t(ix.T)][size_t(dX)][i] += aT * f.u;
                seeds.d1[size_t(ix.T)][size_t(dY)][i] += aT * f.v;
                seeds.d2[size_t(ix.T)][size_t(dX)][i] += -aT * kappa;
                seeds.d2[size_t(ix.T)][size_t(dY)][i] += -aT * kappa;
                if (tdim) seeds.d1[size_t(ix.T)][size_t(dT)][i] += aT;
            }
            seeds.d1[size_t(ix.p)][size_t(dX)][i] += au;
            seeds.d1[size_t(ix.p)][size_t(dY)][i] += av;
            seeds.d2[size_t(ix.u)][size_t(dX)][i] += -au * nu;
            seeds.d2[size_t(ix.u)][size_t(dY)][i] += -au * nu;
            seeds.d2[size_t(ix.v)][size_t(dX)][i] += -av * nu;
            seeds.d2[size_t(ix.v)][size_t(dY)][i] += -av * nu;
            if (tdim) {
                seeds.d1[size_t(ix.u)][size_t(dT)][i] += au;
                seeds.d1[size_t(ix.v)][size_t(dT)][i] += av;
            }
        }
        out.ad_c = sum_c2 * invM;
        out.ad_m = sum_m2 * invM;
        out.ad_e = sum_e2 * invM;
        if (grad) fw.backward(model, seeds, *grad);
    }

    // ---------------- boundary conditions ----------------
    if (!col.boundary.empty() && w.bc > 0.0) {
        // split points by whether their condition needs derivatives
        std::vector<long> val_pts, der_pts;
        for (long i = 0; i < long(col.boundary.size()); ++i) {
            const BcSpec& s = col.boundary[size_t(i)].spec;
            if (std::holds_alternative<NeumannZeroBc>(s) || std::holds_alternative<OutflowBc>(s))
                der_pts.push_back(i);
            else
                val_pts.push_back(i);
        }
        const double invN = 1.0 / double(col.boundary.size());
        double sum2 = 0.0;

        EvalWorkspace local_ws;
        auto process = [&](const std::vector<long>& idx, int order) {
            if (idx.empty()) return;
            Eigen::MatrixXd X(model.input_dim(), long(idx.size()));
            for (long i = 0; i < long(idx.size()); ++i) {
                const BoundaryPoint& bp = col.boundary[size_t(idx[size_t(i)])];
                if (tdim) X(0, i) = bp.t;
                X(tdim, i) = bp.x;
                X(tdim + 1, i) = bp.y;
            }
            EvalWorkspace& wsp = opts.workspace ? *opts.workspace : local_ws;
            BatchForward& fw = order == 0 ? wsp.bc_val : wsp.bc_der;
            fw.run(model, X, order);
            BatchForward::Seeds seeds = fw.make_seeds();
            if (grad) {
                for (size_t o = 0; o < model.heads.size(); ++o) {
                    seeds.value[o] = Eigen::RowVectorXd::Zero(long(idx.size()));
                    for (int d = 0; d < fw.n_dirs(); ++d)
                        seeds.d1[o][size_t(d)] = Eigen::RowVectorXd::Zero(long(idx.size()));
                }
            }
            const int dX = tdim, dY = tdim + 1;
            for (long i = 0; i < long(idx.size()); ++i) {
                const BoundaryPoint& bp = col.boundary[size_t(idx[size_t(i)])];
                std::visit(
                    [&](const auto& s) {
                        using Tspec = std::decay_t<decltype(s)>;
                        auto add_value_res = [&](int o, double target) {
                            const double r = fw.value(o)[i] - target;
                            sum2 += r * r;
                            if (grad) seeds.value[size_t(o)][i] += w.bc * 2.0 * r * invN;
                        };
                        if constexpr (std::is_same_v<Tspec, DirichletBc>) {
                            if (s.u) add_value_res(ix.u, s.u->eval(bp.x, bp.y));
                            if (s.v) add_value_res(ix.v, s.v->eval(bp.x, bp.y));
                            if (s.p) add_value_res(ix.p, s.p->eval(bp.x, bp.y));
                            if (s.T && ix.T >= 0) add_value_res(ix.T, s.T->eval(bp.x, bp.y));
                        } else if constexpr (std::is_same_v<Tspec, PressurePinBc>) {
                            add_value_res(ix.p, s.value);
                        } else if constexpr (std::is_same_v<Tspec, NeumannZeroBc>) {
                            for (const auto& var : s.vars) {
                                int o = ix.u;
                                if (var == "v") o = ix.v;
                                else if (var == "p") o = ix.p;
                                else if (var == "T") o = ix.T;
                                else if (var != "u")
                                    throw ConfigError("unknown bc variable " + var);
                                const int d = s.dir == 'x' ? dX : dY;
                                const double r = fw.d1(o, d)[i];
                                sum2 += r * r;
                                if (grad) seeds.d1[size_t(o)][size_t(d)][i] += w.bc * 2.0 * r * invN;
                            }
                        } else if constexpr (std::is_same_v<Tspec, OutflowBc>) {
                            const double r1 = fw.d1(ix.u, dX)[i] / s.re - fw.value(ix.p)[i];
                            const double r2 = fw.d1(ix.v, dX)[i];
                            sum2 += r1 * r1 + r2 * r2;
                            if (grad) {
                                seeds.d1[size_t(ix.u)][size_t(dX)][i] += w.bc * 2.0 * r1 / s.re * invN;
                                seeds.value[size_t(ix.p)][i] -= w.bc * 2.0 * r1 * invN;
                                seeds.d1[size_t(ix.v)][size_t(dX)][i] += w.bc * 2.0 * r2 * invN;
                            }
                        }
                    },
                    bp.spec);
            }
            if (grad) fw.backward(model, seeds, *grad);
        };
        process(val_pts, 0);
        process(der_pts, 1);
        if (!std::isfinite(sum2)) throw NonFiniteLossError("bc", -1);
        out.bc = sum2 * invN;
    }

    // ---------------- initial conditions ----------------
    if (!col.initial.empty() && w.ic > 0.0) {
        const long M = long(col.initial.size());
        Eigen::MatrixXd X(model.input_dim(), M);
        for (long i = 0; i < M; ++i) {
            if (tdim) X(0, i) = col.t0;
            X(tdim, i) = col.initial[size_t(i)].x;
            X(tdim + 1, i) = col.initial[size_t(i)].y;
        }
        EvalWorkspace local_ws;
        BatchForward& fw = opts.workspace ? opts.workspace->ic : local_ws.ic;
        fw.run(model, X, 0);
        BatchForward::Seeds seeds = fw.make_seeds();
        if (grad) {
            seeds.value[size_t(ix.u)] = Eigen::RowVectorXd::Zero(M);
            seeds.value[size_t(ix.v)] = Eigen::RowVectorXd::Zero(M);
            if (ix.T >= 0) seeds.value[size_t(ix.T)] = Eigen::RowVectorXd::Zero(M);
        }
        double sum2 = 0.0;
        const double invM = 1.0 / double(M);
        for (long i = 0; i < M; ++i) {
            const InitialPoint& q = col.initial[size_t(i)];
            const double ru = fw.value(ix.u)[i] - q.u0;
            const double rv = fw.value(ix.v)[i] - q.v0;
            sum2 += ru * ru + rv * rv;
            if (grad) {
                seeds.value[size_t(ix.u)][i] += w.ic * 2.0 * ru * invM;
                seeds.value[size_t(ix.v)][i] += w.ic * 2.0 * rv * invM;
            }
            if (ph.thermal && ix.T >= 0) {
                const double rT = fw.value(ix.T)[i] - q.T0;
                sum2 += rT * rT;
                if (grad) seeds.value[size_t(ix.T)][i] += w.ic * 2.0 * rT * invM;
            }
        }
        if (!std::isfinite(sum2)) throw NonFiniteLossError("ic", -1);
        out.ic = sum2 * invM;
        if (grad) fw.backward(model, seeds, *grad);
    }

    // ---------------- weighted total and component map ----------------
    out.total = w.fvm_c * out.fvm_c + w.fvm_m * out.fvm_m + w.fvm_e * out.fvm_e +
                w.ad_c * out.ad_c + w.ad_m * out.ad_m + w.ad_e * out.ad_e +
                w.rc * (out.rc_p + out.rc_u + out.rc_v + out.rc_T) + w.bc * out.bc +
                w.ic * out.ic;
    if (!std::isfinite(out.total)) throw NonFiniteLossError("total", -1);

    auto put = [&](const char* name, double weight, double value) {
        if (weight > 0.0) out.components[name] = value;
    };
    put("fvm_c", w.fvm_c, out.fvm_c);
    put("fvm_m", w.fvm_m, out.fvm_m);
    put("fvm_e", ph.thermal ? w.fvm_e : 0.0, out.fvm_e);
    put("ad_c", ad_on ? w.ad_c : 0.0, out.ad_c);
    put("ad_m", ad_on ? w.ad_m : 0.0, out.ad_m);
    put("ad_e", ad_on && ph.thermal ? w.ad_e : 0.0, out.ad_e);
    if (rc_on) {
        out.components["rc_p"] = out.rc_p;
        out.components["rc_u"] = out.rc_u;
        out.components["rc_v"] = out.rc_v;
        if (ph.thermal) out.components["rc_T"] = out.rc_T;
    }
    put("bc", col.boundary.empty() ? 0.0 : w.bc, out.bc);
    put("ic", col.initial.empty() ? 0.0 : w.ic, out.ic);
    return out;
}

double fvm_residual_level(const NetworkModel& model, const CollocationSet& col,
                          const PhysicsParams& physics, const InitialCondition* ic) {
    LossOptions opts;
    opts.physics = physics;
    opts.weights.fvm_c = 1.0;
    opts.weights.fvm_m = 1.0;
    opts.weights.fvm_e = physics.thermal ? 1.0 : 0.0;
    opts.weights.bc = 0.0;
    opts.weights.rc = 0.0;
    opts.rc_active = false;
    opts.ic = ic;
    const LossBreakdown b = evaluate_loss(model, model, col, opts, nullptr);
    return b.fvm_c + b.fvm_m + b.fvm_e;
}

}  // namespace nspinn
