#pragma once

#include "nspinn/bc.hpp"
#include "nspinn/fvm.hpp"
#include "nspinn/network.hpp"
#include "nspinn/sampling.hpp"

namespace nspinn {

/// Field values and exact coordinate derivatives at a single point, the
/// inputs of the strong-form residuals. Steady evaluations leave the time
/// derivatives zero; non-thermal ones leave the temperature entries zero.
struct FieldDerivs {
    double u = 0, v = 0, p = 0, T = 0;
    double u_t = 0, u_x = 0, u_y = 0, u_xx = 0, u_yy = 0;
    double v_t = 0, v_x = 0, v_y = 0, v_xx = 0, v_yy = 0;
    double p_x = 0, p_y = 0;
    double T_t = 0, T_x = 0, T_y = 0, T_xx = 0, T_yy = 0;
};

struct AdResidual {
    double res_c = 0, res_u = 0, res_v = 0, res_T = 0;
};

/// Strong-form PDE residuals from field derivatives. Navier-Stokes momentum
/// uses the conservative convection form expanded by the product rule;
/// the thermal system uses the advective form with buoyancy +T in the
/// v-momentum equation plus the energy residual.
AdResidual pde_residual_ad(const FieldDerivs& f, const PhysicsParams& physics, bool unsteady);

/// Evaluate the network and its derivatives at one point. `t` is ignored for
/// 2-input (steady) models.
FieldDerivs field_derivs(const NetworkModel& model, double t, double x, double y);

/// Network-level residual evaluation.
AdResidual pde_residual_ad(const NetworkModel& model, double t, double x, double y,
                           const PhysicsParams& physics);

/// Boundary residuals at one point: one scalar per constrained quantity.
/// Dirichlet entries produce (prediction - target), Neumann entries the
/// directional derivative, the outflow condition the pair
/// ((1/Re) du/dx - p, dv/dx) and the pressure pin (p - value).
std::vector<double> bc_residual(const FieldDerivs& f, double x, double y, const BcSpec& spec);
std::vector<double> bc_residual(const NetworkModel& model, const BoundaryPoint& bp);

}  // namespace nspinn
