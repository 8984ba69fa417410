#include <doctest.h>

#include "nspinn/rng.hpp"
#include "nspinn/fvm.hpp"
#include "nspinn/sampling.hpp"

using namespace nspinn;

namespace {

/// Brute-force classification oracle: re-derives the fvm/ad/solid counts
/// point by point straight from the classification rule.
struct EnumCounts {
    long fvm = 0, ad = 0, solid = 0, boundary_nodes = 0;
};

EnumCounts enumerate_grid(const Geometry& g, int nx, int ny) {
    EnumCounts c;
    const double h = (g.x1 - g.x0) / double(nx - 1);
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            const Point2 p{g.x0 + i * h, g.y0 + j * h};
            const Region r = g.classify(p);
            if (r == Region::Solid) {
                ++c.solid;
                continue;
            }
            if (r == Region::Boundary) {
                ++c.boundary_nodes;
                continue;
            }
            const double off[8][2] = {{h, 0},     {-h, 0},     {0, h},     {0, -h},
                                      {h / 2, 0}, {-h / 2, 0}, {0, h / 2}, {0, -h / 2}};
            bool all_fluid = true;
            for (const auto& d : off)
                if (g.classify(Point2{p.x + d[0], p.y + d[1]}) != Region::Fluid) all_fluid = false;
            if (all_fluid)
                ++c.fvm;
            else
                ++c.ad;
        }
    }
    return c;
}

}  // namespace

TEST_CASE("unit square 11x11: 49 fvm and 32 ad points") {
    Geometry g{0, 1, 0, 1};
    const SpatialClassification sc = classify_grid(g, {11, 11});
    CHECK(sc.fvm.size() == 49);
    CHECK(sc.ad.size() == 32);
    CHECK(sc.h == doctest::Approx(0.1));
    long outer = 0;
    for (const auto& [p, seg] : sc.boundary) {
        (void)p;
        if (seg.kind != SegmentId::SolidSurface) ++outer;
    }
    CHECK(outer == 4 * 11 - 4);
}

TEST_CASE("rectangle formula |fvm| = (n-4)^2 for several n") {
    for (int n : {5, 7, 9, 11, 15}) {
        Geometry g{0, 1, 0, 1};
        const SpatialClassification sc = classify_grid(g, {n, n});
        CHECK(long(sc.fvm.size()) == long(n - 4) * (n - 4));
        CHECK(long(sc.ad.size()) == long(n - 2) * (n - 2) - long(n - 4) * (n - 4));
    }
}

TEST_CASE("central solid square matches the enumeration oracle") {
    Geometry g{0, 1, 0, 1};
    g.solids = {Polygon{{{0.4, 0.4}, {0.6, 0.4}, {0.6, 0.6}, {0.4, 0.6}}}};
    const SpatialClassification sc = classify_grid(g, {21, 21});
    const EnumCounts ec = enumerate_grid(g, 21, 21);
    CHECK(long(sc.fvm.size()) == ec.fvm);
    CHECK(long(sc.ad.size()) == ec.ad);
    CHECK(sc.n_solid == ec.solid);
    CHECK(ec.fvm + ec.ad + ec.solid + ec.boundary_nodes == 21 * 21);
}

TEST_CASE("cylinder geometry matches the enumeration oracle") {
    Geometry g{0, 4, 0, 4};
    g.solids = {Circle{{2, 2}, 0.5}};
    const SpatialClassification sc = classify_grid(g, {41, 41});
    const EnumCounts ec = enumerate_grid(g, 41, 41);
    CHECK(long(sc.fvm.size()) == ec.fvm);
    CHECK(long(sc.ad.size()) == ec.ad);
    CHECK(sc.n_solid == ec.solid);
}

TEST_CASE("empty fluid domain raises the dedicated error") {
    Geometry g{0, 1, 0, 1};
    g.solids = {Polygon{{{-0.1, -0.1}, {1.1, -0.1}, {1.1, 1.1}, {-0.1, 1.1}}}};
    CHECK_THROWS_AS(classify_grid(g, {11, 11}), EmptyDomainError);
}

TEST_CASE("resolution below 3x3 is rejected") {
    Geometry g{0, 1, 0, 1};
    CHECK_THROWS_AS(classify_grid(g, {2, 2}), ConfigError);
}

TEST_CASE("non-uniform spacing is rejected") {
    Geometry g{0, 2, 0, 1};
    CHECK_THROWS_AS(classify_grid(g, {11, 11}), ConfigError);
}

TEST_CASE("stencil coordinates") {
    const auto s = stencil_coordinates(Point2{0.5, 0.5}, 0.2);
    CHECK(s[LOC_e].x == doctest::Approx(0.6));
    CHECK(s[LOC_e].y == doctest::Approx(0.5));
    CHECK(s[LOC_w].x == doctest::Approx(0.4));
    CHECK(s[LOC_n].y == doctest::Approx(0.6));
    CHECK(s[LOC_s].y == doctest::Approx(0.4));
    CHECK(s[LOC_E].x == doctest::Approx(0.7));
    CHECK(s[LOC_W].x == doctest::Approx(0.3));
    CHECK(s[LOC_N].y == doctest::Approx(0.7));
    CHECK(s[LOC_S].y == doctest::Approx(0.3));
    CHECK_THROWS_AS(stencil_coordinates(Point2{0, 0}, 0.0), ConfigError);

    const auto prev = stencil_prev_coordinates(Point2{0.5, 0.5}, 0.2);
    CHECK(prev[PREV_P].x == doctest::Approx(0.5));
    CHECK(prev[PREV_e].x == doctest::Approx(0.6));
}

TEST_CASE("unsteady collocation replicates layers and uses the IC for the first") {
    Geometry g{0, 1, 0, 1};
    g.time = TimeSpan{1.0, 1.2, 5};  // dt = 0.05
    InitialCondition ic;
    ic.kind = InitialCondition::Kind::Uniform;
    ic.u = 1.0;
    CollocationSet col = classify_points(g, {7, 7}, {}, &ic);
    CHECK(col.unsteady);
    CHECK(col.dt == doctest::Approx(0.05));
    CHECK(col.t0 == doctest::Approx(1.0));
    CHECK(col.fvm.size() == 4 * 9);  // 4 PDE layers, 9 fvm each
    long first_layer = 0;
    for (const auto& p : col.fvm)
        if (p.prev_from_ic) {
            ++first_layer;
            CHECK(p.t == doctest::Approx(1.05));
        }
    CHECK(first_layer == 9);
    CHECK(col.initial.size() == 25);
    CHECK(col.initial.front().u0 == 1.0);
}

TEST_CASE("monotonicity: shrinking a solid never removes fvm points") {
    Geometry big{0, 1, 0, 1};
    big.solids = {Circle{{0.5, 0.5}, 0.21}};
    Geometry small = big;
    small.solids = {Circle{{0.5, 0.5}, 0.12}};
    const SpatialClassification a = classify_grid(big, {21, 21});
    const SpatialClassification b = classify_grid(small, {21, 21});
    auto contains = [](const std::vector<Point2>& v, Point2 p) {
        for (const auto& q : v)
            if (q.x == p.x && q.y == p.y) return true;
        return false;
    };
    for (const auto& p : a.fvm) CHECK(contains(b.fvm, p));
    CHECK(b.fvm.size() >= a.fvm.size());
}

TEST_CASE("classification is deterministic and idempotent") {
    Geometry g{0, 1, 0, 1};
    g.solids = {Circle{{0.3, 0.6}, 0.15}};
    const SpatialClassification a = classify_grid(g, {31, 31});
    const SpatialClassification b = classify_grid(g, {31, 31});
    REQUIRE(a.fvm.size() == b.fvm.size());
    for (size_t i = 0; i < a.fvm.size(); ++i) {
        CHECK(a.fvm[i].x == b.fvm[i].x);
        CHECK(a.fvm[i].y == b.fvm[i].y);
    }
}

// ---------------------------------------------------------------------------
// NACA0012
// ---------------------------------------------------------------------------

TEST_CASE("naca0012: far upstream point is outside") {
    Airfoil foil{{0, 0}, 1.0, 0.0};
    CHECK_FALSE(naca0012_contains(foil, Point2{-5.0, 0.0}));
    CHECK_FALSE(naca0012_contains(foil, Point2{0.5, 0.5}));
    CHECK(naca0012_contains(foil, Point2{0.3, 0.0}));
}

TEST_CASE("naca0012: leading edge lies on the boundary under tolerance") {
    Airfoil foil{{1.0, 2.0}, 1.0, 0.0};
    const double tol = 1e-9;
    CHECK(classify_solid(Solid{foil}, Point2{1.0, 2.0}, tol) == Region::Boundary);
    CHECK(classify_solid(Solid{foil}, Point2{2.0, 2.0}, tol) == Region::Boundary);  // TE
}

TEST_CASE("naca0012 containment agrees with a dense polygon oracle") {
    Airfoil foil{{0.0, 0.0}, 1.0, 7.0};
    const int half = 5000;  // 1e4 vertices total
    Polygon poly;
    poly.vertices.reserve(2 * half);
    const double a = -foil.aoa_deg * M_PI / 180.0;
    auto emit = [&](double xi, double sign) {
        const double yt = sign * naca0012_half_thickness(xi);
        poly.vertices.push_back(
            Point2{std::cos(a) * xi - std::sin(a) * yt, std::sin(a) * xi + std::cos(a) * yt});
    };
    for (int i = 0; i < half; ++i) emit(double(i) / (half - 1), +1.0);
    for (int i = half - 1; i > 0; --i) emit(double(i) / (half - 1), -1.0);

    Rng rng(2024);
    const double band = 1e-6;
    long checked = 0, mismatches = 0;
    for (long k = 0; k < 100000; ++k) {
        const Point2 p{rng.uniform(-0.3, 1.3), rng.uniform(-0.4, 0.4)};
        const Region r = classify_solid(Solid{foil}, p, band);
        if (r == Region::Boundary) continue;  // tolerance band skipped
        ++checked;
        if (polygon_contains(poly, p) != (r == Region::Solid)) ++mismatches;
    }
    CHECK(mismatches == 0);
    CHECK(checked > 90000);
}

TEST_CASE("naca0012 boundary samples lie on the profile") {
    Airfoil foil{{1.0, 1.0}, 0.8, 12.0};
    const auto pts = naca0012_boundary_samples(foil, 64);
    CHECK(pts.size() == 64);
    for (const auto& p : pts) CHECK(classify_solid(Solid{foil}, p, 1e-9) == Region::Boundary);
}

TEST_CASE("wavy channel classification: fluid bounded by the wall curves") {
    Geometry g{0.0, 5.3, -1.2, 1.2};
    g.wavy = WavyWalls{1.0, 0.2, 3.0};
    const SpatialClassification sc = classify_grid(g, {160, 73});
    CHECK(sc.fvm.size() > 0);
    CHECK(sc.ad.size() > 0);
    for (const auto& p : sc.fvm) CHECK(std::abs(p.y) < g.wavy->half_width(p.x));
    long wall_samples = 0;
    for (const auto& [p, seg] : sc.boundary)
        if (seg.kind == SegmentId::Walls) {
            ++wall_samples;
            CHECK(std::abs(std::abs(p.y) - g.wavy->half_width(p.x)) < 1e-12);
        }
    CHECK(wall_samples == 2 * 160);
}
