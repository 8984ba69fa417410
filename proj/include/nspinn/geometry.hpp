#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace nspinn {

struct Point2 {
    double x = 0.0, y = 0.0;
};

/// Tri-state point classification against a shape or the whole geometry.
enum class Region { Fluid, Boundary, Solid };

struct Circle {
    Point2 center;
    double radius = 0.0;
};

/// Simple polygon, vertices in order (either winding).
struct Polygon {
    std::vector<Point2> vertices;
};

/// NACA0012 profile (closed trailing edge) at a given chord placement.
struct Airfoil {
    Point2 leading_edge;
    double chord = 1.0;
    double aoa_deg = 0.0;  ///< positive = nose up, rotation about the leading edge
};

using Solid = std::variant<Circle, Polygon, Airfoil>;

/// Sinusoidal channel walls: fluid occupies |y| < half_width(x) with
/// half_width(x) = mean + amplitude * sin(pi * (x - phase)).
struct WavyWalls {
    double mean = 1.0;
    double amplitude = 0.2;
    double phase = 3.0;

    double half_width(double x) const {
        return mean + amplitude * std::sin(M_PI * (x - phase));
    }
};

struct TimeSpan {
    double t0 = 0.0, t1 = 1.0;
    int layers = 2;  ///< number of time samples including t0 and t1

    double dt() const { return (t1 - t0) / double(layers - 1); }
};

/// Case geometry: an axis-aligned bounding rectangle, optional solids, and
/// optional analytic channel walls. Containment is deterministic; a point is
/// in exactly one of {fluid, boundary, solid} under the boundary tolerance.
struct Geometry {
    double x0 = 0.0, x1 = 1.0, y0 = 0.0, y1 = 1.0;
    std::vector<Solid> solids;
    std::optional<WavyWalls> wavy;
    std::optional<TimeSpan> time;

    double diagonal() const { return std::hypot(x1 - x0, y1 - y0); }
    /// Boundary tolerance: 1e-9 of the domain diagonal.
    double boundary_tol() const { return 1e-9 * diagonal(); }
    bool unsteady() const { return time.has_value(); }

    /// Classify a point against the full geometry (outer rectangle, walls,
    /// and all solids). Points outside the rectangle count as Solid.
    Region classify(Point2 p) const;
};

/// Classify a point against one solid with tolerance band `tol`.
Region classify_solid(const Solid& solid, Point2 p, double tol);

/// NACA0012 half-thickness polynomial (closed trailing edge), xi = x/c in [0,1].
double naca0012_half_thickness(double xi);

/// True if `p` lies strictly inside the airfoil (boundary band excluded).
bool naca0012_contains(const Airfoil& foil, Point2 p, double tol = 0.0);

/// `n` points on the airfoil surface, uniformly parameterised over the upper
/// surface (leading to trailing edge) followed by the lower surface.
std::vector<Point2> naca0012_boundary_samples(const Airfoil& foil, int n);

/// Uniformly spaced samples on a circle boundary.
std::vector<Point2> circle_boundary_samples(const Circle& c, int n);

/// Samples along polygon edges, count proportional to edge length.
std::vector<Point2> polygon_boundary_samples(const Polygon& poly, int n);

/// Boundary samples for any solid.
std::vector<Point2> solid_boundary_samples(const Solid& solid, int n);

bool polygon_contains(const Polygon& poly, Point2 p);

struct EmptyDomainError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace nspinn
