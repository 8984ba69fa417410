#include "nspinn/correction.hpp"

namespace nspinn {

CorrectionTerms correction_terms(const StencilEvaluation& cur, const StencilEvaluation& prev) {
    const double h = cur.h;
    if (h <= 0.0) throw ConfigError("correction requires h > 0");
    const double a = diag_coefficient(cur);
    if (a <= 0.0) throw ConfigError("correction requires a > 0");
    const double nu = cur.physics.momentum_nu();

    CorrectionTerms out;

    const double r_c = continuity_residual(cur);
    const double divp = div_prev_time(cur);
    const double sum_p_cur = cur.p[LOC_E] + cur.p[LOC_W] + cur.p[LOC_N] + cur.p[LOC_S];
    const double sum_p_prev = prev.p[LOC_E] + prev.p[LOC_W] + prev.p[LOC_N] + prev.p[LOC_S];
    out.R_p = (a * r_c - divp - h * (sum_p_cur - sum_p_prev)) / (-4.0 * h);

    const double a_NB = -nu;
    const double du_nb = (cur.u[LOC_E] - prev.u[LOC_E]) + (cur.u[LOC_W] - prev.u[LOC_W]) +
                         (cur.u[LOC_N] - prev.u[LOC_N]) + (cur.u[LOC_S] - prev.u[LOC_S]);
    const double dv_nb = (cur.v[LOC_E] - prev.v[LOC_E]) + (cur.v[LOC_W] - prev.v[LOC_W]) +
                         (cur.v[LOC_N] - prev.v[LOC_N]) + (cur.v[LOC_S] - prev.v[LOC_S]);
    const double db_u = b_source(cur, Component::U) - b_source(prev, Component::U);
    const double db_v = b_source(cur, Component::V) - b_source(prev, Component::V);
    out.R_u = -(a_NB * du_nb + db_u + momentum_residual(cur, Component::U)) / a;
    out.R_v = -(a_NB * dv_nb + db_v + momentum_residual(cur, Component::V)) / a;

    if (cur.physics.thermal) {
        const double a_T = diag_coefficient_energy(cur);
        const double aT_NB = -cur.physics.energy_nu();
        const double dT_nb = (cur.T[LOC_E] - prev.T[LOC_E]) + (cur.T[LOC_W] - prev.T[LOC_W]) +
                             (cur.T[LOC_N] - prev.T[LOC_N]) + (cur.T[LOC_S] - prev.T[LOC_S]);
        const double db_T = b_source_energy(cur) - b_source_energy(prev);
        out.R_T = -(aT_NB * dT_nb + db_T + energy_residual(cur)) / a_T;
    }
    return out;
}

RcPointValues rc_point(const StencilEvaluation& cur, const StencilEvaluation& prev, double alpha) {
    const CorrectionTerms R = correction_terms(cur, prev);
    RcPointValues e;
    e.e_p = cur.p[LOC_P] - prev.p[LOC_P] - alpha * R.R_p;
    e.e_u = cur.u[LOC_P] - prev.u[LOC_P] - alpha * R.R_u;
    e.e_v = cur.v[LOC_P] - prev.v[LOC_P] - alpha * R.R_v;
    if (cur.physics.thermal) e.e_T = cur.T[LOC_P] - prev.T[LOC_P] - alpha * R.R_T;
    return e;
}

RcLosses rc_losses(const std::vector<StencilEvaluation>& cur,
                   const std::vector<StencilEvaluation>& prev, double alpha) {
    if (cur.empty()) throw EmptyBatchError("rc_losses called with empty batch");
    if (cur.size() != prev.size())
        throw ConfigError("rc_losses: current and previous batches differ in size");
    RcLosses out;
    for (size_t i = 0; i < cur.size(); ++i) {
        const RcPointValues e = rc_point(cur[i], prev[i], alpha);
        out.rc_p += std::abs(e.e_p);
        out.rc_u += std::abs(e.e_u);
        out.rc_v += std::abs(e.e_v);
        out.rc_T += std::abs(e.e_T);
    }
    const double inv = 1.0 / double(cur.size());
    out.rc_p *= inv;
    out.rc_u *= inv;
    out.rc_v *= inv;
    out.rc_T *= inv;
    return out;
}

double temperature_correction(const std::vector<StencilEvaluation>& cur,
                              const std::vector<StencilEvaluation>& prev, double alpha) {
    if (cur.empty()) throw EmptyBatchError("temperature_correction called with empty batch");
    double acc = 0.0;
    for (size_t i = 0; i < cur.size(); ++i) {
        const CorrectionTerms R = correction_terms(cur[i], prev[i]);
        acc += std::abs(cur[i].T[LOC_P] - prev[i].T[LOC_P] - alpha * R.R_T);
    }
    return acc / double(cur.size());
}

}  // namespace nspinn
