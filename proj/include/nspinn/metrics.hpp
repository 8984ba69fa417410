#pragma once

#include <Eigen/Dense>
#include <vector>

#include "nspinn/network.hpp"

namespace nspinn {

/// ||pred - ref||_2 / ||ref||_2. Errors out on an all-zero reference.
double relative_l2(const Eigen::VectorXd& pred, const Eigen::VectorXd& ref);

/// Mean squared error (1/N) sum (ref - pred)^2.
double mse(const Eigen::VectorXd& pred, const Eigen::VectorXd& ref);

/// Derived fields at one point: velocity magnitude, vorticity, and the
/// pressure coefficient (p - p_inf) / (rho U_inf^2 / 2) with rho = U_inf = 1.
struct DerivedFields {
    double u = 0, v = 0, p = 0, T = 0;
    double vmag = 0;
    double omega = 0;
    double cp = 0;
};

DerivedFields postprocess(const NetworkModel& model, double t, double x, double y,
                          double p_inf = 0.0);

}  // namespace nspinn
