#pragma once

#include <cmath>
#include <stdexcept>

#include "nspinn/network.hpp"

namespace nspinn {

/// Physical parameters of the governing equations. Plain Navier-Stokes uses
/// the Reynolds number; the buoyancy-coupled (thermal) system uses Prandtl
/// and Rayleigh numbers and adds a temperature field.
struct PhysicsParams {
    bool thermal = false;
    double re = 100.0;
    double pr = 0.71;
    double ra = 1e6;

    double momentum_nu() const { return thermal ? std::sqrt(pr / ra) : 1.0 / re; }
    double energy_nu() const { return 1.0 / std::sqrt(pr * ra); }
    int n_outputs() const { return thermal ? 4 : 3; }
};

/// Stencil location indices: cell centre, the four neighbour centres at
/// distance h, and the four face midpoints at distance h/2.
enum StencilLoc { LOC_P = 0, LOC_E, LOC_W, LOC_N, LOC_S, LOC_e, LOC_w, LOC_n, LOC_s };
constexpr int kStencilSize = 9;

/// Previous-time locations (unsteady only): {P, e, w, n, s}.
enum PrevLoc { PREV_P = 0, PREV_e, PREV_w, PREV_n, PREV_s };
constexpr int kPrevSize = 5;

/// Field samples on one control-volume stencil, plus the previous-time
/// samples needed by the implicit Euler terms and the previous-time
/// divergence. Temperature entries are ignored unless physics.thermal.
struct StencilEvaluation {
    double u[kStencilSize] = {};
    double v[kStencilSize] = {};
    double p[kStencilSize] = {};
    double T[kStencilSize] = {};
    double u_prev[kPrevSize] = {};
    double v_prev[kPrevSize] = {};
    double T_prev[kPrevSize] = {};
    double h = 0.0;
    double dt = 0.0;
    bool unsteady = false;
    PhysicsParams physics;
};

/// Convection/diffusion coefficients of the simplified finite-volume
/// momentum stencil (uniform grid, dx = dy = h). The diffusion coefficients
/// are constants; the face coefficients depend on the face velocities.
struct StencilCoefficients {
    double a_P = 0.0;   ///< 4*nu
    double a_NB = 0.0;  ///< -nu, shared by E/W/N/S
    double a_e = 0.0, a_w = 0.0, a_n = 0.0, a_s = 0.0;
    double nu = 0.0;

    static StencilCoefficients from(const StencilEvaluation& ev, double nu);
};

enum class Component { U, V };

/// r_c = u_e - u_w + v_n - v_s
double continuity_residual(const StencilEvaluation& ev);

/// Momentum residual (dx dy / dt + a_P) phi_P + sum a_NB phi_NB +
/// sum a_nb phi_nb + b_{P,phi}; steady evaluations drop the time terms.
/// The thermal system subtracts the buoyancy source T_P*h^2 from the
/// v-momentum residual.
double momentum_residual(const StencilEvaluation& ev, Component c);

/// b source: pressure-gradient plus implicit time-stepping contribution.
double b_source(const StencilEvaluation& ev, Component c);

/// Previous-time divergence term DIV_P (0 for steady evaluations).
double div_prev_time(const StencilEvaluation& ev);

/// Energy residual: same stencil structure as momentum with the thermal
/// diffusivity, no pressure term and no source.
double energy_residual(const StencilEvaluation& ev);

/// b source of the energy equation (time term only).
double b_source_energy(const StencilEvaluation& ev);

/// a = dx dy / dt + a_P (steady: a_P), the constant momentum diagonal.
double diag_coefficient(const StencilEvaluation& ev);

/// Energy-equation analogue of diag_coefficient.
double diag_coefficient_energy(const StencilEvaluation& ev);

}  // namespace nspinn
