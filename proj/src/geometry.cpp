#include "nspinn/geometry.hpp"

#include <algorithm>

namespace nspinn {

double naca0012_half_thickness(double xi) {
    if (xi < 0.0 || xi > 1.0) return 0.0;
    const double s = std::sqrt(xi);
    // closed trailing edge variant (last coefficient -0.1036)
    return 5.0 * 0.12 *
           (0.2969 * s - 0.1260 * xi - 0.3516 * xi * xi + 0.2843 * xi * xi * xi -
            0.1036 * xi * xi * xi * xi);
}

namespace {

/// Transform a point into the airfoil chord frame (leading edge at origin,
/// chord along +x). Positive angle of attack rotates the incoming point by
/// +aoa so the profile itself stays axis-aligned.
Point2 to_chord_frame(const Airfoil& foil, Point2 p) {
    const double a = foil.aoa_deg * M_PI / 180.0;
    const double dx = p.x - foil.leading_edge.x;
    const double dy = p.y - foil.leading_edge.y;
    return Point2{std::cos(a) * dx - std::sin(a) * dy, std::sin(a) * dx + std::cos(a) * dy};
}

Point2 from_chord_frame(const Airfoil& foil, Point2 q) {
    const double a = foil.aoa_deg * M_PI / 180.0;
    return Point2{foil.leading_edge.x + std::cos(a) * q.x + std::sin(a) * q.y,
                  foil.leading_edge.y - std::sin(a) * q.x + std::cos(a) * q.y};
}

Region classify_circle(const Circle& c, Point2 p, double tol) {
    const double d = std::hypot(p.x - c.center.x, p.y - c.center.y);
    if (std::abs(d - c.radius) <= tol) return Region::Boundary;
    return d < c.radius ? Region::Solid : Region::Fluid;
}

double segment_distance(Point2 a, Point2 b, Point2 p) {
    const double vx = b.x - a.x, vy = b.y - a.y;
    const double len2 = vx * vx + vy * vy;
    double t = len2 > 0.0 ? ((p.x - a.x) * vx + (p.y - a.y) * vy) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    return std::hypot(p.x - (a.x + t * vx), p.y - (a.y + t * vy));
}

Region classify_polygon(const Polygon& poly, Point2 p, double tol) {
    double dmin = std::numeric_limits<double>::max();
    for (size_t i = 0; i < poly.vertices.size(); ++i) {
        const Point2 a = poly.vertices[i];
        const Point2 b = poly.vertices[(i + 1) % poly.vertices.size()];
        dmin = std::min(dmin, segment_distance(a, b, p));
    }
    if (dmin <= tol) return Region::Boundary;
    return polygon_contains(poly, p) ? Region::Solid : Region::Fluid;
}

Region classify_airfoil(const Airfoil& foil, Point2 p, double tol) {
    const Point2 q = to_chord_frame(foil, p);
    const double xi = q.x / foil.chord;
    // quick reject outside an inflated chord box
    if (xi < -0.5 || xi > 1.5 || std::abs(q.y) > 0.5 * foil.chord) return Region::Fluid;
    const double yt = foil.chord * naca0012_half_thickness(std::clamp(xi, 0.0, 1.0));
    // distance to the profile in the chord frame, approximated vertically away
    // from the leading/trailing edge caps
    if (xi >= 0.0 && xi <= 1.0) {
        if (std::abs(std::abs(q.y) - yt) <= tol) return Region::Boundary;
        if (std::abs(q.y) < yt) return Region::Solid;
        // the leading/trailing edge points themselves have yt == 0
        if (yt == 0.0 && std::abs(q.y) <= tol) return Region::Boundary;
        return Region::Fluid;
    }
    // ahead of the leading edge / behind the trailing edge
    const double xe = xi < 0.0 ? 0.0 : foil.chord;
    if (std::hypot(q.x - xe, q.y) <= tol) return Region::Boundary;
    return Region::Fluid;
}

}  // namespace

bool polygon_contains(const Polygon& poly, Point2 p) {
    // even-odd ray casting
    bool inside = false;
    const size_t n = poly.vertices.size();
    for (size_t i = 0, j = n - 1; i < n; j = i++) {
        const Point2& a = poly.vertices[i];
        const Point2& b = poly.vertices[j];
        if ((a.y > p.y) != (b.y > p.y)) {
            const double xcross = a.x + (p.y - a.y) / (b.y - a.y) * (b.x - a.x);
            if (p.x < xcross) inside = !inside;
        }
    }
    return inside;
}

Region classify_solid(const Solid& solid, Point2 p, double tol) {
    return std::visit(
        [&](const auto& s) -> Region {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, Circle>) return classify_circle(s, p, tol);
            else if constexpr (std::is_same_v<T, Polygon>) return classify_polygon(s, p, tol);
            else return classify_airfoil(s, p, tol);
        },
        solid);
}

bool naca0012_contains(const Airfoil& foil, Point2 p, double tol) {
    return classify_airfoil(foil, p, tol) == Region::Solid;
}

std::vector<Point2> naca0012_boundary_samples(const Airfoil& foil, int n) {
    std::vector<Point2> pts;
    pts.reserve(size_t(n));
    const int upper = (n + 1) / 2;
    const int lower = n - upper;
    for (int i = 0; i < upper; ++i) {
        const double xi = upper > 1 ? double(i) / double(upper - 1) : 0.0;
        const double yt = foil.chord * naca0012_half_thickness(xi);
        pts.push_back(from_chord_frame(foil, Point2{xi * foil.chord, yt}));
    }
    for (int i = 0; i < lower; ++i) {
        const double xi = lower > 1 ? double(i + 1) / double(lower + 1) : 0.5;
        const double yt = foil.chord * naca0012_half_thickness(xi);
        pts.push_back(from_chord_frame(foil, Point2{xi * foil.chord, -yt}));
    }
    return pts;
}

std::vector<Point2> circle_boundary_samples(const Circle& c, int n) {
    std::vector<Point2> pts;
    pts.reserve(size_t(n));
    for (int i = 0; i < n; ++i) {
        const double th = 2.0 * M_PI * double(i) / double(n);
        pts.push_back(Point2{c.center.x + c.radius * std::cos(th),
                             c.center.y + c.radius * std::sin(th)});
    }
    return pts;
}

std::vector<Point2> polygon_boundary_samples(const Polygon& poly, int n) {
    std::vector<Point2> pts;
    const size_t ne = poly.vertices.size();
    double perimeter = 0.0;
    for (size_t i = 0; i < ne; ++i) {
        const Point2 a = poly.vertices[i];
        const Point2 b = poly.vertices[(i + 1) % ne];
        perimeter += std::hypot(b.x - a.x, b.y - a.y);
    }
    for (size_t i = 0; i < ne; ++i) {
        const Point2 a = poly.vertices[i];
        const Point2 b = poly.vertices[(i + 1) % ne];
        const double len = std::hypot(b.x - a.x, b.y - a.y);
        const int k = std::max(1, int(std::lround(double(n) * len / perimeter)));
        for (int j = 0; j < k; ++j) {
            const double t = double(j) / double(k);
            pts.push_back(Point2{a.x + t * (b.x - a.x), a.y + t * (b.y - a.y)});
        }
    }
    return pts;
}

std::vector<Point2> solid_boundary_samples(const Solid& solid, int n) {
    return std::visit(
        [&](const auto& s) -> std::vector<Point2> {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, Circle>) return circle_boundary_samples(s, n);
            else if constexpr (std::is_same_v<T, Polygon>) return polygon_boundary_samples(s, n);
            else return naca0012_boundary_samples(s, n);
        },
        solid);
}

Region Geometry::classify(Point2 p) const {
    const double tol = boundary_tol();
    // outer rectangle
    if (p.x < x0 - tol || p.x > x1 + tol || p.y < y0 - tol || p.y > y1 + tol)
        return Region::Solid;
    const bool on_outer = std::abs(p.x - x0) <= tol || std::abs(p.x - x1) <= tol ||
                          std::abs(p.y - y0) <= tol || std::abs(p.y - y1) <= tol;
    if (wavy) {
        const double hw = wavy->half_width(p.x);
        if (std::abs(std::abs(p.y) - hw) <= tol) return Region::Boundary;
        if (std::abs(p.y) > hw) return Region::Solid;
    }
    for (const auto& s : solids) {
        const Region r = classify_solid(s, p, tol);
        if (r != Region::Fluid) return r;
    }
    if (on_outer) return Region::Boundary;
    return Region::Fluid;
}

}  // namespace nspinn
