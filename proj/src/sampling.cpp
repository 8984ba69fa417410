#include "nspinn/sampling.hpp"

#include <algorithm>
#include <cmath>

namespace nspinn {

std::string segment_name(SegmentId s) {
    switch (s.kind) {
        case SegmentId::Left: return "left";
        case SegmentId::Right: return "right";
        case SegmentId::Top: return "top";
        case SegmentId::Bottom: return "bottom";
        case SegmentId::Walls: return "walls";
        case SegmentId::SolidSurface: return "solid:" + std::to_string(s.solid);
        case SegmentId::Pin: return "pin";
    }
    return "?";
}

void InitialCondition::eval(double x, double y, double& u0, double& v0, double& T0) const {
    switch (kind) {
        case Kind::Uniform:
            u0 = u;
            v0 = v;
            T0 = T;
            return;
        case Kind::ParabolicChannel: {
            const double span = yhi - ylo;
            u0 = 4.0 * umax * (y - ylo) * (yhi - y) / (span * span);
            v0 = 0.0;
            T0 = 0.0;
            return;
        }
        case Kind::ThermalInterface: {
            const double yi = interface_y + amplitude * std::cos(2.0 * M_PI * x / wavelength);
            u0 = 0.0;
            v0 = 0.0;
            T0 = 0.5 * (1.0 + std::tanh((yi - y) / thickness));
            return;
        }
    }
}

std::array<Point2, 9> stencil_coordinates(Point2 p, double h) {
    if (h <= 0.0) throw ConfigError("stencil spacing must be > 0");
    return {Point2{p.x, p.y},           Point2{p.x + h, p.y},       Point2{p.x - h, p.y},
            Point2{p.x, p.y + h},       Point2{p.x, p.y - h},       Point2{p.x + h / 2, p.y},
            Point2{p.x - h / 2, p.y},   Point2{p.x, p.y + h / 2},   Point2{p.x, p.y - h / 2}};
}

std::array<Point2, 5> stencil_prev_coordinates(Point2 p, double h) {
    if (h <= 0.0) throw ConfigError("stencil spacing must be > 0");
    return {Point2{p.x, p.y}, Point2{p.x + h / 2, p.y}, Point2{p.x - h / 2, p.y},
            Point2{p.x, p.y + h / 2}, Point2{p.x, p.y - h / 2}};
}

SpatialClassification classify_grid(const Geometry& geom, GridResolution res) {
    if (res.nx < 3 || res.ny < 3) throw ConfigError("grid resolution must be at least 3x3");
    const double hx = (geom.x1 - geom.x0) / double(res.nx - 1);
    const double hy = (geom.y1 - geom.y0) / double(res.ny - 1);
    if (std::abs(hx - hy) > 1e-9 * std::max(hx, hy))
        throw ConfigError("grid must be uniform: dx != dy for the requested resolution");
    const double h = hx;

    SpatialClassification out;
    out.h = h;

    auto grid_x = [&](int i) { return geom.x0 + double(i) * h; };
    auto grid_y = [&](int j) { return geom.y0 + double(j) * h; };

    for (int j = 0; j < res.ny; ++j) {
        for (int i = 0; i < res.nx; ++i) {
            const Point2 p{grid_x(i), grid_y(j)};
            const Region r = geom.classify(p);
            if (r == Region::Solid) {
                ++out.n_solid;
                continue;
            }
            if (r == Region::Boundary) continue;  // sampled by the edge pass below
            bool all_fluid = true;
            for (const Point2& q : stencil_coordinates(p, h)) {
                if (q.x == p.x && q.y == p.y) continue;
                if (geom.classify(q) != Region::Fluid) {
                    all_fluid = false;
                    break;
                }
            }
            if (all_fluid)
                out.fvm.push_back(p);
            else
                out.ad.push_back(p);
        }
    }
    if (out.fvm.empty() && out.ad.empty())
        throw EmptyDomainError("geometry has no interior fluid points at this resolution");

    // Outer edges at grid nodes. Horizontal edges own the corner nodes so
    // every node is emitted exactly once.
    auto push_edge_point = [&](Point2 p, SegmentId seg) {
        if (geom.classify(p) == Region::Boundary) out.boundary.emplace_back(p, seg);
    };
    const bool clips_outer_y = geom.wavy.has_value();
    for (int i = 0; i < res.nx; ++i) {
        if (!clips_outer_y) {
            push_edge_point(Point2{grid_x(i), geom.y0}, SegmentId{SegmentId::Bottom, 0});
            push_edge_point(Point2{grid_x(i), geom.y1}, SegmentId{SegmentId::Top, 0});
        }
    }
    for (int j = 1; j + 1 < res.ny; ++j) {
        push_edge_point(Point2{geom.x0, grid_y(j)}, SegmentId{SegmentId::Left, 0});
        push_edge_point(Point2{geom.x1, grid_y(j)}, SegmentId{SegmentId::Right, 0});
    }
    if (clips_outer_y) {
        // wall curves sampled at the grid abscissae, plus the edge nodes the
        // curves cut off are attributed to the inlet/outlet columns above
        for (int i = 0; i < res.nx; ++i) {
            const double x = grid_x(i);
            const double hw = geom.wavy->half_width(x);
            out.boundary.emplace_back(Point2{x, hw}, SegmentId{SegmentId::Walls, 0});
            out.boundary.emplace_back(Point2{x, -hw}, SegmentId{SegmentId::Walls, 0});
        }
    }

    // Solid surfaces at roughly h spacing.
    for (size_t k = 0; k < geom.solids.size(); ++k) {
        const auto probe = solid_boundary_samples(geom.solids[k], 256);
        double perimeter = 0.0;
        for (size_t i = 0; i < probe.size(); ++i) {
            const Point2 a = probe[i];
            const Point2 b = probe[(i + 1) % probe.size()];
            perimeter += std::hypot(b.x - a.x, b.y - a.y);
        }
        const int n = std::max(16, int(std::lround(perimeter / h)));
        for (const Point2& p : solid_boundary_samples(geom.solids[k], n))
            out.boundary.emplace_back(p, SegmentId{SegmentId::SolidSurface, int(k)});
    }
    return out;
}

namespace {

const BcEntry* find_entry(const std::vector<BcEntry>& bcs, SegmentId seg) {
    for (const auto& e : bcs)
        if (e.segment == seg) return &e;
    return nullptr;
}

}  // namespace

CollocationSet classify_points(const Geometry& geom, GridResolution res,
                               const std::vector<BcEntry>& bcs, const InitialCondition* ic) {
    const SpatialClassification sp = classify_grid(geom, res);

    CollocationSet col;
    col.h = sp.h;
    col.n_solid = sp.n_solid;
    col.unsteady = geom.unsteady();

    std::vector<double> pde_times;   // layers carrying PDE residuals
    std::vector<double> bc_times;    // layers carrying boundary conditions
    if (col.unsteady) {
        const TimeSpan& ts = *geom.time;
        if (ts.layers < 2) throw ConfigError("unsteady case needs at least 2 time layers");
        col.dt = ts.dt();
        col.t0 = ts.t0;
        for (int k = 0; k < ts.layers; ++k) {
            const double t = ts.t0 + double(k) * col.dt;
            bc_times.push_back(t);
            if (k >= 1) pde_times.push_back(t);
        }
    } else {
        pde_times.push_back(0.0);
        bc_times.push_back(0.0);
    }

    for (size_t li = 0; li < pde_times.size(); ++li) {
        const double t = pde_times[li];
        const bool first_layer = col.unsteady && li == 0;
        for (const Point2& p : sp.fvm) col.fvm.push_back(FvmPoint{t, p.x, p.y, first_layer});
        for (const Point2& p : sp.ad) col.ad.push_back(AdPoint{t, p.x, p.y});
    }

    const DirichletBc default_spec{};  // unconstrained placeholder
    for (const double t : bc_times) {
        for (const auto& [p, seg] : sp.boundary) {
            const BcEntry* entry = find_entry(bcs, seg);
            if (!entry || entry->specs.empty()) {
                col.boundary.push_back(BoundaryPoint{t, p.x, p.y, seg, BcSpec{default_spec}});
                continue;
            }
            for (const BcSpec& spec : entry->specs)
                col.boundary.push_back(BoundaryPoint{t, p.x, p.y, seg, spec});
        }
        if (const BcEntry* pin_entry = find_entry(bcs, SegmentId{SegmentId::Pin, 0})) {
            for (const BcSpec& spec : pin_entry->specs) {
                const auto& pp = std::get<PressurePinBc>(spec);
                col.boundary.push_back(
                    BoundaryPoint{t, pp.x, pp.y, SegmentId{SegmentId::Pin, 0}, spec});
            }
        }
    }

    if (col.unsteady) {
        InitialCondition def;
        const InitialCondition& icond = ic ? *ic : def;
        auto add_initial = [&](Point2 p) {
            InitialPoint q;
            q.x = p.x;
            q.y = p.y;
            icond.eval(p.x, p.y, q.u0, q.v0, q.T0);
            col.initial.push_back(q);
        };
        for (const Point2& p : sp.fvm) add_initial(p);
        for (const Point2& p : sp.ad) add_initial(p);
    }
    return col;
}

}  // namespace nspinn
