#include "nspinn/adres.hpp"

namespace nspinn {

AdResidual pde_residual_ad(const FieldDerivs& f, const PhysicsParams& physics, bool unsteady) {
    AdResidual r;
    r.res_c = f.u_x + f.v_y;
    const double nu = physics.momentum_nu();
    if (!physics.thermal) {
        // conservative convection, expanded via the product rule
        r.res_u = 2.0 * f.u * f.u_x + f.v_y * f.u + f.v * f.u_y - nu * (f.u_xx + f.u_yy) + f.p_x;
        r.res_v = f.u_x * f.v + f.u * f.v_x + 2.0 * f.v * f.v_y - nu * (f.v_xx + f.v_yy) + f.p_y;
    } else {
        r.res_u = f.u * f.u_x + f.v * f.u_y - nu * (f.u_xx + f.u_yy) + f.p_x;
        r.res_v = f.u * f.v_x + f.v * f.v_y - nu * (f.v_xx + f.v_yy) + f.p_y - f.T;
        const double kappa = physics.energy_nu();
        r.res_T = f.u * f.T_x + f.v * f.T_y - kappa * (f.T_xx + f.T_yy);
    }
    if (unsteady) {
        r.res_u += f.u_t;
        r.res_v += f.v_t;
        if (physics.thermal) r.res_T += f.T_t;
    }
    return r;
}

FieldDerivs field_derivs(const NetworkModel& model, double t, double x, double y) {
    const bool has_t = model.input_dim() == 3;
    Eigen::MatrixXd X(model.input_dim(), 1);
    if (has_t)
        X << t, x, y;
    else
        X << x, y;
    BatchForward fw;
    fw.run(model, X, 2);
    const int dx = has_t ? 1 : 0;
    const int dy = has_t ? 2 : 1;

    FieldDerivs f;
    auto fill = [&](const std::string& name, double& val, double* dt_, double& dx_, double& dy_,
                    double* dxx, double* dyy) {
        const int o = model.output_index(name);
        val = fw.value(o)[0];
        if (dt_ && has_t) *dt_ = fw.d1(o, 0)[0];
        dx_ = fw.d1(o, dx)[0];
        dy_ = fw.d1(o, dy)[0];
        if (dxx) *dxx = fw.d2(o, dx)[0];
        if (dyy) *dyy = fw.d2(o, dy)[0];
    };
    fill("u", f.u, &f.u_t, f.u_x, f.u_y, &f.u_xx, &f.u_yy);
    fill("v", f.v, &f.v_t, f.v_x, f.v_y, &f.v_xx, &f.v_yy);
    double p_unused = 0;
    (void)p_unused;
    {
        const int o = model.output_index("p");
        f.p = fw.value(o)[0];
        f.p_x = fw.d1(o, dx)[0];
        f.p_y = fw.d1(o, dy)[0];
    }
    for (const auto& name : model.output_names) {
        if (name == "T") {
            fill("T", f.T, &f.T_t, f.T_x, f.T_y, &f.T_xx, &f.T_yy);
            break;
        }
    }
    return f;
}

AdResidual pde_residual_ad(const NetworkModel& model, double t, double x, double y,
                           const PhysicsParams& physics) {
    const FieldDerivs f = field_derivs(model, t, x, y);
    return pde_residual_ad(f, physics, model.input_dim() == 3);
}

std::vector<double> bc_residual(const FieldDerivs& f, double x, double y, const BcSpec& spec) {
    std::vector<double> res;
    std::visit(
        [&](const auto& s) {
            using Tspec = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<Tspec, DirichletBc>) {
                if (s.u) res.push_back(f.u - s.u->eval(x, y));
                if (s.v) res.push_back(f.v - s.v->eval(x, y));
                if (s.p) res.push_back(f.p - s.p->eval(x, y));
                if (s.T) res.push_back(f.T - s.T->eval(x, y));
            } else if constexpr (std::is_same_v<Tspec, NeumannZeroBc>) {
                for (const auto& var : s.vars) {
                    double d = 0.0;
                    if (var == "u") d = s.dir == 'x' ? f.u_x : f.u_y;
                    else if (var == "v") d = s.dir == 'x' ? f.v_x : f.v_y;
                    else if (var == "p") d = s.dir == 'x' ? f.p_x : f.p_y;
                    else if (var == "T") d = s.dir == 'x' ? f.T_x : f.T_y;
                    else throw ConfigError("unknown variable in boundary condition: " + var);
                    res.push_back(d);
                }
            } else if constexpr (std::is_same_v<Tspec, OutflowBc>) {
                res.push_back(f.u_x / s.re - f.p);
                res.push_back(f.v_x);
            } else {
                res.push_back(f.p - s.value);
            }
        },
        spec);
    return res;
}

std::vector<double> bc_residual(const NetworkModel& model, const BoundaryPoint& bp) {
    const FieldDerivs f = field_derivs(model, bp.t, bp.x, bp.y);
    return bc_residual(f, bp.x, bp.y, bp.spec);
}

}  // namespace nspinn
