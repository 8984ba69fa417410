#pragma once

// Independent straight-line oracles for the discrete residual and correction
// formulas, plus analytic flow fields. Deliberately written as literal
// transliterations, separate from the library implementations they check.

#include <cmath>
#include <functional>

#include "nspinn/correction.hpp"
#include "nspinn/fvm.hpp"
#include "nspinn/network.hpp"
#include "nspinn/rng.hpp"

namespace oracle {

using nspinn::StencilEvaluation;

// locations: 0=P 1=E 2=W 3=N 4=S 5=e 6=w 7=n 8=s ; prev: 0=P 1=e 2=w 3=n 4=s

inline double continuity(const StencilEvaluation& q) {
    return q.u[5] - q.u[6] + q.v[7] - q.v[8];
}

inline double momentum_nu(const StencilEvaluation& q) {
    return q.physics.thermal ? std::sqrt(q.physics.pr / q.physics.ra) : 1.0 / q.physics.re;
}

inline double b_u(const StencilEvaluation& q) {
    const double dy = q.h, dx = q.h;
    double b = (q.p[5] - q.p[6]) * dy;
    if (q.unsteady) b = b - q.u_prev[0] / q.dt * dx * dy;
    return b;
}

inline double b_v(const StencilEvaluation& q) {
    const double dy = q.h, dx = q.h;
    double b = (q.p[7] - q.p[8]) * dx;
    if (q.unsteady) b = b - q.v_prev[0] / q.dt * dx * dy;
    return b;
}

inline double momentum_u(const StencilEvaluation& q) {
    const double nu = momentum_nu(q);
    const double dx = q.h, dy = q.h;
    const double a_P = 4.0 * nu;
    const double a_E = -nu, a_W = -nu, a_N = -nu, a_S = -nu;
    const double a_e = q.u[5] * dy;
    const double a_w = -q.u[6] * dy;
    const double a_n = q.v[7] * dx;
    const double a_s = -q.v[8] * dx;
    double lead = a_P;
    if (q.unsteady) lead = dx * dy / q.dt + a_P;
    return lead * q.u[0] + a_E * q.u[1] + a_W * q.u[2] + a_N * q.u[3] + a_S * q.u[4] +
           a_e * q.u[5] + a_w * q.u[6] + a_n * q.u[7] + a_s * q.u[8] + b_u(q);
}

inline double momentum_v(const StencilEvaluation& q) {
    const double nu = momentum_nu(q);
    const double dx = q.h, dy = q.h;
    const double a_P = 4.0 * nu;
    const double a_e = q.u[5] * dy;
    const double a_w = -q.u[6] * dy;
    const double a_n = q.v[7] * dx;
    const double a_s = -q.v[8] * dx;
    double lead = a_P;
    if (q.unsteady) lead = dx * dy / q.dt + a_P;
    double r = lead * q.v[0] - nu * (q.v[1] + q.v[2] + q.v[3] + q.v[4]) + a_e * q.v[5] +
               a_w * q.v[6] + a_n * q.v[7] + a_s * q.v[8] + b_v(q);
    if (q.physics.thermal) r = r - q.T[0] * dx * dy;
    return r;
}

inline double div_prev(const StencilEvaluation& q) {
    if (!q.unsteady) return 0.0;
    return ((q.u_prev[1] - q.u_prev[2]) + (q.v_prev[3] - q.v_prev[4])) * q.h * q.h / q.dt;
}

inline double b_T(const StencilEvaluation& q) {
    if (!q.unsteady) return 0.0;
    return -q.T_prev[0] / q.dt * q.h * q.h;
}

inline double energy(const StencilEvaluation& q) {
    const double nu = 1.0 / std::sqrt(q.physics.pr * q.physics.ra);
    const double dx = q.h, dy = q.h;
    double lead = 4.0 * nu;
    if (q.unsteady) lead = dx * dy / q.dt + 4.0 * nu;
    return lead * q.T[0] - nu * (q.T[1] + q.T[2] + q.T[3] + q.T[4]) + q.u[5] * dy * q.T[5] -
           q.u[6] * dy * q.T[6] + q.v[7] * dx * q.T[7] - q.v[8] * dx * q.T[8] + b_T(q);
}

struct Corrections {
    double R_p, R_u, R_v, R_T;
};

inline Corrections corrections(const StencilEvaluation& cur, const StencilEvaluation& prev) {
    const double h = cur.h;
    const double nu = momentum_nu(cur);
    double a = 4.0 * nu;
    if (cur.unsteady) a = h * h / cur.dt + 4.0 * nu;

    Corrections R{};
    const double sum_p_n = cur.p[1] + cur.p[2] + cur.p[3] + cur.p[4];
    const double sum_p_nm1 = prev.p[1] + prev.p[2] + prev.p[3] + prev.p[4];
    R.R_p = (a * continuity(cur) - div_prev(cur) - h * (sum_p_n - sum_p_nm1)) / (-4.0 * h);

    const double sum_du = -nu * ((cur.u[1] - prev.u[1]) + (cur.u[2] - prev.u[2]) +
                                 (cur.u[3] - prev.u[3]) + (cur.u[4] - prev.u[4]));
    R.R_u = -(sum_du + (b_u(cur) - b_u(prev)) + momentum_u(cur)) / a;
    const double sum_dv = -nu * ((cur.v[1] - prev.v[1]) + (cur.v[2] - prev.v[2]) +
                                 (cur.v[3] - prev.v[3]) + (cur.v[4] - prev.v[4]));
    R.R_v = -(sum_dv + (b_v(cur) - b_v(prev)) + momentum_v(cur)) / a;

    if (cur.physics.thermal) {
        const double nu_T = 1.0 / std::sqrt(cur.physics.pr * cur.physics.ra);
        double a_T = 4.0 * nu_T;
        if (cur.unsteady) a_T = h * h / cur.dt + 4.0 * nu_T;
        const double sum_dT = -nu_T * ((cur.T[1] - prev.T[1]) + (cur.T[2] - prev.T[2]) +
                                       (cur.T[3] - prev.T[3]) + (cur.T[4] - prev.T[4]));
        R.R_T = -(sum_dT + (b_T(cur) - b_T(prev)) + energy(cur)) / a_T;
    }
    return R;
}

struct RcValues {
    double rc_p, rc_u, rc_v, rc_T;
};

inline RcValues rc_values(const StencilEvaluation& cur, const StencilEvaluation& prev,
                          double alpha) {
    const Corrections R = corrections(cur, prev);
    RcValues e{};
    e.rc_p = std::abs(cur.p[0] - prev.p[0] - alpha * R.R_p);
    e.rc_u = std::abs(cur.u[0] - prev.u[0] - alpha * R.R_u);
    e.rc_v = std::abs(cur.v[0] - prev.v[0] - alpha * R.R_v);
    if (cur.physics.thermal) e.rc_T = std::abs(cur.T[0] - prev.T[0] - alpha * R.R_T);
    return e;
}

// ---------------------------------------------------------------------------
// Random stencils and analytic clamps
// ---------------------------------------------------------------------------

inline StencilEvaluation random_stencil(nspinn::Rng& rng, bool unsteady, bool thermal) {
    StencilEvaluation q;
    q.h = 0.01 + 0.2 * rng.uniform();
    q.dt = 0.01 + 0.5 * rng.uniform();
    q.unsteady = unsteady;
    q.physics.thermal = thermal;
    q.physics.re = 10.0 + 1000.0 * rng.uniform();
    q.physics.pr = 0.2 + rng.uniform();
    q.physics.ra = 1e3 + 1e6 * rng.uniform();
    for (int j = 0; j < 9; ++j) {
        q.u[j] = rng.uniform(-2, 2);
        q.v[j] = rng.uniform(-2, 2);
        q.p[j] = rng.uniform(-2, 2);
        q.T[j] = rng.uniform(-2, 2);
    }
    for (int j = 0; j < 5; ++j) {
        q.u_prev[j] = rng.uniform(-2, 2);
        q.v_prev[j] = rng.uniform(-2, 2);
        q.T_prev[j] = rng.uniform(-2, 2);
    }
    return q;
}

/// Fill a stencil from analytic field functions (steady clamp).
inline StencilEvaluation analytic_stencil(double x, double y, double h,
                                          const std::function<double(double, double)>& fu,
                                          const std::function<double(double, double)>& fv,
                                          const std::function<double(double, double)>& fp,
                                          double re) {
    StencilEvaluation q;
    q.h = h;
    q.unsteady = false;
    q.physics.re = re;
    const double xs[9] = {x, x + h, x - h, x, x, x + h / 2, x - h / 2, x, x};
    const double ys[9] = {y, y, y, y + h, y - h, y, y, y + h / 2, y - h / 2};
    for (int j = 0; j < 9; ++j) {
        q.u[j] = fu(xs[j], ys[j]);
        q.v[j] = fv(xs[j], ys[j]);
        q.p[j] = fp(xs[j], ys[j]);
    }
    return q;
}

struct Kovasznay {
    double re = 40.0;
    double lambda() const { return re / 2.0 - std::sqrt(re * re / 4.0 + 4.0 * M_PI * M_PI); }
    double u(double x, double y) const {
        return 1.0 - std::exp(lambda() * x) * std::cos(2.0 * M_PI * y);
    }
    double v(double x, double y) const {
        return lambda() / (2.0 * M_PI) * std::exp(lambda() * x) * std::sin(2.0 * M_PI * y);
    }
    double p(double x, double) const { return 0.5 * (1.0 - std::exp(2.0 * lambda() * x)); }
    // exact derivatives
    double u_x(double x, double y) const {
        return -lambda() * std::exp(lambda() * x) * std::cos(2.0 * M_PI * y);
    }
    double u_y(double x, double y) const {
        return 2.0 * M_PI * std::exp(lambda() * x) * std::sin(2.0 * M_PI * y);
    }
    double u_xx(double x, double y) const {
        return -lambda() * lambda() * std::exp(lambda() * x) * std::cos(2.0 * M_PI * y);
    }
    double u_yy(double x, double y) const {
        return 4.0 * M_PI * M_PI * std::exp(lambda() * x) * std::cos(2.0 * M_PI * y);
    }
    double v_x(double x, double y) const {
        return lambda() * lambda() / (2.0 * M_PI) * std::exp(lambda() * x) *
               std::sin(2.0 * M_PI * y);
    }
    double v_y(double x, double y) const {
        return lambda() * std::exp(lambda() * x) * std::cos(2.0 * M_PI * y);
    }
    double v_xx(double x, double y) const {
        return lambda() * lambda() * lambda() / (2.0 * M_PI) * std::exp(lambda() * x) *
               std::sin(2.0 * M_PI * y);
    }
    double v_yy(double x, double y) const {
        return -2.0 * M_PI * lambda() * std::exp(lambda() * x) * std::sin(2.0 * M_PI * y);
    }
    double p_x(double x, double) const { return -lambda() * std::exp(2.0 * lambda() * x); }
    double p_y(double, double) const { return 0.0; }
};

struct TaylorGreen {
    double u(double x, double y) const { return std::sin(x) * std::cos(y); }
    double v(double x, double y) const { return -std::cos(x) * std::sin(y); }
    double u_x(double x, double y) const { return std::cos(x) * std::cos(y); }
    double u_y(double x, double y) const { return -std::sin(x) * std::sin(y); }
    double v_x(double x, double y) const { return std::sin(x) * std::sin(y); }
    double v_y(double x, double y) const { return -std::cos(x) * std::cos(y); }
};

// ---------------------------------------------------------------------------
// Scalar re-implementation of the network forward pass
// ---------------------------------------------------------------------------

inline double silu_scalar(double z) { return z / (1.0 + std::exp(-z)); }

/// Straight-line per-point recomputation of one network output.
inline double scalar_forward(const nspinn::NetworkModel& m, const Eigen::VectorXd& x, int out) {
    const int d = m.embed.input_dim;
    Eigen::VectorXd xt(d);
    for (int i = 0; i < d; ++i) xt[i] = (x[i] - m.embed.shift[i]) * m.embed.scale[i];
    const Eigen::VectorXd gmask = m.embed.mask(m.anneal_step);
    Eigen::VectorXd e(m.embed.out_dim());
    for (int i = 0; i < d; ++i) e[i] = xt[i];
    for (int k = 0; k < m.embed.num_freqs; ++k) {
        double arg = 0.0;
        for (int i = 0; i < d; ++i) arg += gmask[k] * m.embed.freq(k, i) * xt[i];
        e[d + k] = std::cos(arg);
        e[d + m.embed.num_freqs + k] = std::sin(arg);
    }
    Eigen::VectorXd a = e;
    for (const auto& layer : m.trunk) {
        Eigen::VectorXd z = layer.W * a + layer.b;
        a.resize(z.size());
        for (long i = 0; i < z.size(); ++i) a[i] = silu_scalar(z[i]);
    }
    const auto& head = m.heads[size_t(out)];
    for (size_t l = 0; l + 1 < head.size(); ++l) {
        Eigen::VectorXd z = head[l].W * a + head[l].b;
        a.resize(z.size());
        for (long i = 0; i < z.size(); ++i) a[i] = silu_scalar(z[i]);
    }
    return (head.back().W * a + head.back().b)(0);
}

}  // namespace oracle
