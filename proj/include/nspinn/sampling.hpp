#pragma once

#include <array>
#include <vector>

#include "nspinn/bc.hpp"
#include "nspinn/errors.hpp"
#include "nspinn/geometry.hpp"

namespace nspinn {

struct GridResolution {
    int nx = 3, ny = 3;
};

/// Analytic initial-condition fields for unsteady cases.
struct InitialCondition {
    enum class Kind { Uniform, ParabolicChannel, ThermalInterface } kind = Kind::Uniform;
    // Uniform
    double u = 0.0, v = 0.0, T = 0.0;
    // ParabolicChannel: u(y) = 4*umax*(y-ylo)*(yhi-y)/(yhi-ylo)^2, v = 0
    double umax = 1.0, ylo = 0.0, yhi = 1.0;
    // ThermalInterface: u = v = 0, T = 0.5*(1 + tanh((yi(x) - y)/thickness)),
    // yi(x) = interface_y + amplitude*cos(2*pi*x / wavelength)
    double interface_y = 1.0, amplitude = 0.1, thickness = 0.05, wavelength = 1.0;

    void eval(double x, double y, double& u0, double& v0, double& T0) const;
    bool operator==(const InitialCondition&) const = default;
};

struct FvmPoint {
    double t = 0.0, x = 0.0, y = 0.0;
    bool prev_from_ic = false;  ///< first time layer draws t-dt samples from the IC
};

struct AdPoint {
    double t = 0.0, x = 0.0, y = 0.0;
};

struct BoundaryPoint {
    double t = 0.0, x = 0.0, y = 0.0;
    SegmentId segment;
    BcSpec spec;
};

struct InitialPoint {
    double x = 0.0, y = 0.0;
    double u0 = 0.0, v0 = 0.0, T0 = 0.0;
};

/// Classified sample points with stencil geometry. The four sets are
/// pairwise disjoint; every fvm point's eight stencil companions lie
/// strictly in fluid.
struct CollocationSet {
    std::vector<FvmPoint> fvm;
    std::vector<AdPoint> ad;
    std::vector<BoundaryPoint> boundary;
    std::vector<InitialPoint> initial;
    double h = 0.0;
    double dt = 0.0;
    double t0 = 0.0;
    bool unsteady = false;
    long n_solid = 0;  ///< grid nodes inside solids (diagnostic)

    long n_pde() const { return long(fvm.size()) + long(ad.size()); }
    long n_bc() const { return long(boundary.size()); }
    long n_ic() const { return long(initial.size()); }
    long n_rc() const { return long(fvm.size()); }
};

/// Spatial-only classification of the uniform grid (steady view).
struct SpatialClassification {
    std::vector<Point2> fvm;
    std::vector<Point2> ad;
    std::vector<std::pair<Point2, SegmentId>> boundary;
    long n_solid = 0;
    double h = 0.0;
};

/// Classify the uniform nx x ny grid over the geometry's rectangle. A fluid
/// grid node becomes an FVM point when all eight stencil companions
/// (+-h and +-h/2 along each axis) are strictly fluid, otherwise an AD
/// point. Boundary samples cover outer edges at grid nodes, the analytic
/// wall curves, and every solid surface at roughly h spacing.
SpatialClassification classify_grid(const Geometry& geom, GridResolution res);

/// Full collocation build: spatial classification replicated over time
/// layers (PDE residuals at t > t0, boundary conditions at every layer,
/// initial samples at t0), with boundary conditions resolved from `bcs`.
/// Steady geometries produce a single layer with t = 0.
CollocationSet classify_points(const Geometry& geom, GridResolution res,
                               const std::vector<BcEntry>& bcs = {},
                               const InitialCondition* ic = nullptr);

/// The nine stencil locations {P,E,W,N,S,e,w,n,s} for a point.
std::array<Point2, 9> stencil_coordinates(Point2 p, double h);

/// Previous-time spatial locations {P,e,w,n,s}.
std::array<Point2, 5> stencil_prev_coordinates(Point2 p, double h);

}  // namespace nspinn
