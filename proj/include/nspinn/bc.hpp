#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace nspinn {

/// Boundary segment identifier. The outer rectangle contributes four
/// segments, analytic channel walls one combined segment, and each solid one
/// segment per list index.
struct SegmentId {
    enum Kind { Left, Right, Top, Bottom, Walls, SolidSurface, Pin } kind = Left;
    int solid = 0;

    bool operator==(const SegmentId&) const = default;
};

std::string segment_name(SegmentId s);

/// Quadratic profile in a single coordinate: c0 + c1*s + c2*s^2 with s = x
/// or s = y. Covers constants, linear shear and parabolic inlet profiles.
struct PolyProfile {
    double c0 = 0.0, c1 = 0.0, c2 = 0.0;
    char var = 'y';

    static PolyProfile constant(double c) { return PolyProfile{c, 0.0, 0.0, 'y'}; }
    double eval(double x, double y) const {
        const double s = var == 'x' ? x : y;
        return c0 + s * (c1 + s * c2);
    }
    bool operator==(const PolyProfile&) const = default;
};

/// Dirichlet values per constrained variable; absent entries are
/// unconstrained.
struct DirichletBc {
    std::optional<PolyProfile> u, v, p, T;
    bool operator==(const DirichletBc&) const = default;
};

/// Zero directional derivative for the listed variables.
struct NeumannZeroBc {
    std::vector<std::string> vars;
    char dir = 'x';
    bool operator==(const NeumannZeroBc&) const = default;
};

/// Outflow coupling (1/Re) du/dx = p together with dv/dx = 0.
struct OutflowBc {
    double re = 100.0;
    bool operator==(const OutflowBc&) const = default;
};

/// Pressure gauge pin p = value at a reference point.
struct PressurePinBc {
    double value = 0.0;
    double x = 0.0, y = 0.0;  ///< reference point
    bool operator==(const PressurePinBc&) const = default;
};

using BcSpec = std::variant<DirichletBc, NeumannZeroBc, OutflowBc, PressurePinBc>;

/// One (segment -> conditions) entry of a case definition. A segment carries
/// exactly one entry; the entry may combine several elementary conditions
/// (e.g. zero-gradient velocities plus a pressure value at an outlet).
struct BcEntry {
    SegmentId segment;
    std::vector<BcSpec> specs;
};

}  // namespace nspinn
