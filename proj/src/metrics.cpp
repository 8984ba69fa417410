#include "nspinn/metrics.hpp"

#include "nspinn/adres.hpp"

namespace nspinn {

double relative_l2(const Eigen::VectorXd& pred, const Eigen::VectorXd& ref) {
    if (pred.size() != ref.size()) throw ConfigError("relative_l2: length mismatch");
    const double denom = ref.norm();
    if (denom == 0.0) throw ConfigError("relative_l2: reference field is all zero");
    return (pred - ref).norm() / denom;
}

double mse(const Eigen::VectorXd& pred, const Eigen::VectorXd& ref) {
    if (pred.size() != ref.size()) throw ConfigError("mse: length mismatch");
    if (ref.size() == 0) throw ConfigError("mse: empty fields");
    return (ref - pred).squaredNorm() / double(ref.size());
}

DerivedFields postprocess(const NetworkModel& model, double t, double x, double y, double p_inf) {
    const FieldDerivs f = field_derivs(model, t, x, y);
    DerivedFields d;
    d.u = f.u;
    d.v = f.v;
    d.p = f.p;
    d.T = f.T;
    d.vmag = std::sqrt(f.u * f.u + f.v * f.v);
    d.omega = f.v_x - f.u_y;
    d.cp = (f.p - p_inf) / 0.5;
    return d;
}

}  // namespace nspinn
