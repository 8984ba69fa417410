#include "nspinn/fvm.hpp"

namespace nspinn {

StencilCoefficients StencilCoefficients::from(const StencilEvaluation& ev, double nu) {
    StencilCoefficients c;
    c.nu = nu;
    c.a_P = 4.0 * nu;
    c.a_NB = -nu;
    c.a_e = ev.u[LOC_e] * ev.h;
    c.a_w = -ev.u[LOC_w] * ev.h;
    c.a_n = ev.v[LOC_n] * ev.h;
    c.a_s = -ev.v[LOC_s] * ev.h;
    return c;
}

double continuity_residual(const StencilEvaluation& ev) {
    return ev.u[LOC_e] - ev.u[LOC_w] + ev.v[LOC_n] - ev.v[LOC_s];
}

double diag_coefficient(const StencilEvaluation& ev) {
    const double a_P = 4.0 * ev.physics.momentum_nu();
    if (!ev.unsteady) return a_P;
    if (ev.dt <= 0.0) throw ConfigError("unsteady stencil requires dt > 0");
    return ev.h * ev.h / ev.dt + a_P;
}

double diag_coefficient_energy(const StencilEvaluation& ev) {
    const double a_P = 4.0 * ev.physics.energy_nu();
    if (!ev.unsteady) return a_P;
    if (ev.dt <= 0.0) throw ConfigError("unsteady stencil requires dt > 0");
    return ev.h * ev.h / ev.dt + a_P;
}

double b_source(const StencilEvaluation& ev, Component c) {
    const double h = ev.h;
    double b = c == Component::U ? (ev.p[LOC_e] - ev.p[LOC_w]) * h
                                 : (ev.p[LOC_n] - ev.p[LOC_s]) * h;
    if (ev.unsteady) {
        if (ev.dt <= 0.0) throw ConfigError("unsteady stencil requires dt > 0");
        const double prev = c == Component::U ? ev.u_prev[PREV_P] : ev.v_prev[PREV_P];
        b -= prev / ev.dt * h * h;
    }
    return b;
}

double momentum_residual(const StencilEvaluation& ev, Component c) {
    const double nu = ev.physics.momentum_nu();
    const double h = ev.h;
    const double a = diag_coefficient(ev);
    const double* f = c == Component::U ? ev.u : ev.v;

    const double diffusion = -nu * (f[LOC_E] + f[LOC_W] + f[LOC_N] + f[LOC_S]);
    // sum a_nb phi_nb with a_e = u_e h, a_w = -u_w h, a_n = v_n h, a_s = -v_s h
    const double convection = h * (ev.u[LOC_e] * f[LOC_e] - ev.u[LOC_w] * f[LOC_w] +
                                   ev.v[LOC_n] * f[LOC_n] - ev.v[LOC_s] * f[LOC_s]);
    double r = a * f[LOC_P] + diffusion + convection + b_source(ev, c);
    if (c == Component::V && ev.physics.thermal) r -= ev.T[LOC_P] * h * h;
    return r;
}

double div_prev_time(const StencilEvaluation& ev) {
    if (!ev.unsteady) return 0.0;
    if (ev.dt <= 0.0) throw ConfigError("unsteady stencil requires dt > 0");
    const double h = ev.h;
    return ((ev.u_prev[PREV_e] - ev.u_prev[PREV_w]) + (ev.v_prev[PREV_n] - ev.v_prev[PREV_s])) *
           h * h / ev.dt;
}

double b_source_energy(const StencilEvaluation& ev) {
    if (!ev.unsteady) return 0.0;
    if (ev.dt <= 0.0) throw ConfigError("unsteady stencil requires dt > 0");
    return -ev.T_prev[PREV_P] / ev.dt * ev.h * ev.h;
}

double energy_residual(const StencilEvaluation& ev) {
    const double nu = ev.physics.energy_nu();
    const double h = ev.h;
    const double a = diag_coefficient_energy(ev);
    const double diffusion = -nu * (ev.T[LOC_E] + ev.T[LOC_W] + ev.T[LOC_N] + ev.T[LOC_S]);
    const double convection = h * (ev.u[LOC_e] * ev.T[LOC_e] - ev.u[LOC_w] * ev.T[LOC_w] +
                                   ev.v[LOC_n] * ev.T[LOC_n] - ev.v[LOC_s] * ev.T[LOC_s]);
    return a * ev.T[LOC_P] + diffusion + convection + b_source_energy(ev);
}

}  // namespace nspinn
