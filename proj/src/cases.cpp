#include "nspinn/cases.hpp"

#include <fstream>
#include <json.hpp>
#include <set>
#include <sstream>

namespace nspinn {

using nlohmann::json;

// ---------------------------------------------------------------------------
// JSON serialisation
// ---------------------------------------------------------------------------

namespace {

json poly_to_json(const PolyProfile& p) {
    return json{{"c0", p.c0}, {"c1", p.c1}, {"c2", p.c2}, {"var", std::string(1, p.var)}};
}

PolyProfile poly_from_json(const json& j) {
    if (j.is_number()) return PolyProfile::constant(j.get<double>());
    PolyProfile p;
    p.c0 = j.value("c0", 0.0);
    p.c1 = j.value("c1", 0.0);
    p.c2 = j.value("c2", 0.0);
    p.var = j.value("var", std::string("y")).at(0);
    return p;
}

json segment_to_json(SegmentId s) {
    return json(segment_name(s));
}

SegmentId segment_from_json(const json& j) {
    const std::string s = j.get<std::string>();
    if (s == "left") return {SegmentId::Left, 0};
    if (s == "right") return {SegmentId::Right, 0};
    if (s == "top") return {SegmentId::Top, 0};
    if (s == "bottom") return {SegmentId::Bottom, 0};
    if (s == "walls") return {SegmentId::Walls, 0};
    if (s == "pin") return {SegmentId::Pin, 0};
    if (s.rfind("solid:", 0) == 0) return {SegmentId::SolidSurface, std::stoi(s.substr(6))};
    throw ConfigError("unknown boundary segment '" + s + "'");
}

json spec_to_json(const BcSpec& spec) {
    json j;
    std::visit(
        [&](const auto& s) {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, DirichletBc>) {
                j["type"] = "dirichlet";
                if (s.u) j["u"] = poly_to_json(*s.u);
                if (s.v) j["v"] = poly_to_json(*s.v);
                if (s.p) j["p"] = poly_to_json(*s.p);
                if (s.T) j["T"] = poly_to_json(*s.T);
            } else if constexpr (std::is_same_v<T, NeumannZeroBc>) {
                j["type"] = "neumann_zero";
                j["vars"] = s.vars;
                j["dir"] = std::string(1, s.dir);
            } else if constexpr (std::is_same_v<T, OutflowBc>) {
                j["type"] = "outflow";
                j["re"] = s.re;
            } else {
                j["type"] = "pressure_pin";
                j["value"] = s.value;
                j["point"] = {s.x, s.y};
            }
        },
        spec);
    return j;
}

BcSpec spec_from_json(const json& j) {
    const std::string type = j.at("type").get<std::string>();
    if (type == "dirichlet") {
        DirichletBc d;
        if (j.contains("u")) d.u = poly_from_json(j["u"]);
        if (j.contains("v")) d.v = poly_from_json(j["v"]);
        if (j.contains("p")) d.p = poly_from_json(j["p"]);
        if (j.contains("T")) d.T = poly_from_json(j["T"]);
        return d;
    }
    if (type == "neumann_zero") {
        NeumannZeroBc n;
        n.vars = j.at("vars").get<std::vector<std::string>>();
        n.dir = j.value("dir", std::string("x")).at(0);
        return n;
    }
    if (type == "outflow") return OutflowBc{j.at("re").get<double>()};
    if (type == "pressure_pin") {
        PressurePinBc p;
        p.value = j.value("value", 0.0);
        p.x = j.at("point").at(0).get<double>();
        p.y = j.at("point").at(1).get<double>();
        return p;
    }
    throw ConfigError("unknown bc type '" + type + "'");
}

json solid_to_json(const Solid& s) {
    json j;
    std::visit(
        [&](const auto& v) {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, Circle>) {
                j["type"] = "circle";
                j["center"] = {v.center.x, v.center.y};
                j["radius"] = v.radius;
            } else if constexpr (std::is_same_v<T, Polygon>) {
                j["type"] = "polygon";
                json verts = json::array();
                for (const auto& p : v.vertices) verts.push_back({p.x, p.y});
                j["vertices"] = verts;
            } else {
                j["type"] = "airfoil";
                j["leading_edge"] = {v.leading_edge.x, v.leading_edge.y};
                j["chord"] = v.chord;
                j["aoa_deg"] = v.aoa_deg;
            }
        },
        s);
    return j;
}

Solid solid_from_json(const json& j) {
    const std::string type = j.at("type").get<std::string>();
    if (type == "circle")
        return Circle{{j.at("center").at(0).get<double>(), j.at("center").at(1).get<double>()},
                      j.at("radius").get<double>()};
    if (type == "polygon") {
        Polygon p;
        for (const auto& v : j.at("vertices")) p.vertices.push_back({v.at(0), v.at(1)});
        return p;
    }
    if (type == "airfoil")
        return Airfoil{{j.at("leading_edge").at(0).get<double>(),
                        j.at("leading_edge").at(1).get<double>()},
                       j.at("chord").get<double>(), j.at("aoa_deg").get<double>()};
    throw ConfigError("unknown solid type '" + type + "'");
}

json ic_to_json(const InitialCondition& ic) {
    json j;
    switch (ic.kind) {
        case InitialCondition::Kind::Uniform:
            j["kind"] = "uniform";
            j["u"] = ic.u;
            j["v"] = ic.v;
            j["T"] = ic.T;
            break;
        case InitialCondition::Kind::ParabolicChannel:
            j["kind"] = "parabolic_channel";
            j["umax"] = ic.umax;
            j["ylo"] = ic.ylo;
            j["yhi"] = ic.yhi;
            break;
        case InitialCondition::Kind::ThermalInterface:
            j["kind"] = "thermal_interface";
            j["interface_y"] = ic.interface_y;
            j["amplitude"] = ic.amplitude;
            j["thickness"] = ic.thickness;
            j["wavelength"] = ic.wavelength;
            break;
    }
    return j;
}

InitialCondition ic_from_json(const json& j) {
    InitialCondition ic;
    const std::string kind = j.value("kind", std::string("uniform"));
    if (kind == "uniform") {
        ic.kind = InitialCondition::Kind::Uniform;
        ic.u = j.value("u", 0.0);
        ic.v = j.value("v", 0.0);
        ic.T = j.value("T", 0.0);
    } else if (kind == "parabolic_channel") {
        ic.kind = InitialCondition::Kind::ParabolicChannel;
        ic.umax = j.value("umax", 1.0);
        ic.ylo = j.value("ylo", 0.0);
        ic.yhi = j.value("yhi", 1.0);
    } else if (kind == "thermal_interface") {
        ic.kind = InitialCondition::Kind::ThermalInterface;
        ic.interface_y = j.value("interface_y", 1.0);
        ic.amplitude = j.value("amplitude", 0.1);
        ic.thickness = j.value("thickness", 0.05);
        ic.wavelength = j.value("wavelength", 1.0);
    } else {
        throw ConfigError("unknown initial condition kind '" + kind + "'");
    }
    return ic;
}

json config_to_json_obj(const CaseConfig& c) {
    json j;
    j["case"] = c.case_id;
    if (c.physics.thermal)
        j["physics"] = {{"pr", c.physics.pr}, {"ra", c.physics.ra}};
    else
        j["physics"] = {{"re", c.physics.re}};

    json g;
    g["domain"] = {c.geometry.x0, c.geometry.x1, c.geometry.y0, c.geometry.y1};
    if (!c.geometry.solids.empty()) {
        json solids = json::array();
        for (const auto& s : c.geometry.solids) solids.push_back(solid_to_json(s));
        g["solids"] = solids;
    }
    if (c.geometry.wavy)
        g["wavy_walls"] = {{"mean", c.geometry.wavy->mean},
                           {"amplitude", c.geometry.wavy->amplitude},
                           {"phase", c.geometry.wavy->phase}};
    if (c.geometry.time)
        g["time"] = {{"t0", c.geometry.time->t0},
                     {"t1", c.geometry.time->t1},
                     {"layers", c.geometry.time->layers}};
    j["geometry"] = g;

    json bcs = json::array();
    for (const auto& e : c.bcs) {
        json entry;
        entry["segment"] = segment_to_json(e.segment);
        json specs = json::array();
        for (const auto& s : e.specs) specs.push_back(spec_to_json(s));
        entry["specs"] = specs;
        bcs.push_back(entry);
    }
    j["bcs"] = bcs;
    if (c.geometry.time) j["ic"] = ic_to_json(c.ic);
    j["grid"] = {{"nx", c.grid.nx}, {"ny", c.grid.ny}};
    j["model"] = {{"trunk_widths", c.model.trunk_widths},
                  {"head_widths", c.model.head_widths},
                  {"num_freqs", c.model.num_freqs},
                  {"freq_sigma", c.model.freq_sigma},
                  {"anneal_steps", c.model.anneal_steps}};
    j["train"] = {{"init_lr", c.init_lr},
                  {"max_steps", c.max_steps},
                  {"warmup_steps", c.warmup_steps},
                  {"batch_fvm", c.batch_fvm},
                  {"snapshot_every", c.snapshot_every},
                  {"metrics_every", c.metrics_every},
                  {"checkpoint_every", c.checkpoint_every},
                  {"alpha", c.alpha},
                  {"seed", c.seed}};
    j["weights"] = {{"fvm_c", c.weights.fvm_c}, {"fvm_m", c.weights.fvm_m},
                    {"fvm_e", c.weights.fvm_e}, {"ad_c", c.weights.ad_c},
                    {"ad_m", c.weights.ad_m},   {"ad_e", c.weights.ad_e},
                    {"rc", c.weights.rc},       {"bc", c.weights.bc},
                    {"ic", c.weights.ic}};
    if (c.p_inf) j["p_inf"] = *c.p_inf;
    if (c.eval_window)
        j["eval_window"] = {(*c.eval_window)[0], (*c.eval_window)[1], (*c.eval_window)[2],
                            (*c.eval_window)[3]};
    return j;
}

void apply_json_to_config(const json& j, CaseConfig& c) {
    if (j.contains("case")) c.case_id = j["case"].get<std::string>();
    if (j.contains("physics")) {
        const json& p = j["physics"];
        if (p.contains("re")) {
            c.physics.thermal = false;
            c.physics.re = p["re"].get<double>();
        }
        if (p.contains("pr") || p.contains("ra")) {
            c.physics.thermal = true;
            c.physics.pr = p.value("pr", c.physics.pr);
            c.physics.ra = p.value("ra", c.physics.ra);
        }
    }
    if (j.contains("geometry")) {
        const json& g = j["geometry"];
        if (g.contains("domain")) {
            c.geometry.x0 = g["domain"].at(0).get<double>();
            c.geometry.x1 = g["domain"].at(1).get<double>();
            c.geometry.y0 = g["domain"].at(2).get<double>();
            c.geometry.y1 = g["domain"].at(3).get<double>();
        }
        if (g.contains("solids")) {
            c.geometry.solids.clear();
            for (const auto& s : g["solids"]) c.geometry.solids.push_back(solid_from_json(s));
        }
        if (g.contains("wavy_walls")) {
            WavyWalls w;
            w.mean = g["wavy_walls"].value("mean", 1.0);
            w.amplitude = g["wavy_walls"].value("amplitude", 0.2);
            w.phase = g["wavy_walls"].value("phase", 3.0);
            c.geometry.wavy = w;
        }
        if (g.contains("time")) {
            TimeSpan t;
            t.t0 = g["time"].value("t0", 0.0);
            t.t1 = g["time"].value("t1", 1.0);
            t.layers = g["time"].value("layers", 2);
            c.geometry.time = t;
        }
    }
    if (j.contains("bcs")) {
        c.bcs.clear();
        for (const auto& e : j["bcs"]) {
            BcEntry entry;
            entry.segment = segment_from_json(e.at("segment"));
            for (const auto& s : e.at("specs")) entry.specs.push_back(spec_from_json(s));
            c.bcs.push_back(entry);
        }
    }
    if (j.contains("ic")) c.ic = ic_from_json(j["ic"]);
    if (j.contains("grid")) {
        c.grid.nx = j["grid"].value("nx", c.grid.nx);
        c.grid.ny = j["grid"].value("ny", c.grid.ny);
    }
    if (j.contains("model")) {
        const json& m = j["model"];
        if (m.contains("trunk_widths")) c.model.trunk_widths = m["trunk_widths"].get<std::vector<int>>();
        if (m.contains("head_widths")) c.model.head_widths = m["head_widths"].get<std::vector<int>>();
        c.model.num_freqs = m.value("num_freqs", c.model.num_freqs);
        c.model.freq_sigma = m.value("freq_sigma", c.model.freq_sigma);
        c.model.anneal_steps = m.value("anneal_steps", c.model.anneal_steps);
    }
    if (j.contains("train")) {
        const json& t = j["train"];
        c.init_lr = t.value("init_lr", c.init_lr);
        c.max_steps = t.value("max_steps", c.max_steps);
        c.warmup_steps = t.value("warmup_steps", c.warmup_steps);
        c.batch_fvm = t.value("batch_fvm", c.batch_fvm);
        c.snapshot_every = t.value("snapshot_every", c.snapshot_every);
        c.metrics_every = t.value("metrics_every", c.metrics_every);
        c.checkpoint_every = t.value("checkpoint_every", c.checkpoint_every);
        c.alpha = t.value("alpha", c.alpha);
        c.seed = t.value("seed", c.seed);
    }
    if (j.contains("weights")) {
        const json& w = j["weights"];
        c.weights.fvm_c = w.value("fvm_c", c.weights.fvm_c);
        c.weights.fvm_m = w.value("fvm_m", c.weights.fvm_m);
        c.weights.fvm_e = w.value("fvm_e", c.weights.fvm_e);
        c.weights.ad_c = w.value("ad_c", c.weights.ad_c);
        c.weights.ad_m = w.value("ad_m", c.weights.ad_m);
        c.weights.ad_e = w.value("ad_e", c.weights.ad_e);
        c.weights.rc = w.value("rc", c.weights.rc);
        c.weights.bc = w.value("bc", c.weights.bc);
        c.weights.ic = w.value("ic", c.weights.ic);
    }
    if (j.contains("p_inf")) c.p_inf = j["p_inf"].get<double>();
    if (j.contains("eval_window")) {
        const json& w = j["eval_window"];
        c.eval_window = {{w.at(0).get<double>(), w.at(1).get<double>(), w.at(2).get<double>(),
                          w.at(3).get<double>()}};
    }
}

}  // namespace

// ---------------------------------------------------------------------------
// CaseConfig methods
// ---------------------------------------------------------------------------

ModelSpec CaseConfig::model_spec() const {
    ModelSpec ms;
    ms.input_dim = geometry.unsteady() ? 3 : 2;
    ms.outputs = physics.thermal ? std::vector<std::string>{"u", "v", "p", "T"}
                                 : std::vector<std::string>{"u", "v", "p"};
    ms.trunk_widths = model.trunk_widths;
    ms.head_widths = model.head_widths;
    ms.num_freqs = model.num_freqs;
    ms.freq_sigma = model.freq_sigma;
    ms.anneal_steps = model.anneal_steps >= 0 ? model.anneal_steps : max_steps / 5;
    ms.seed = seed;

    // map the domain (and time span) to [-1, 1] per input
    const int d = ms.input_dim;
    ms.shift.resize(d);
    ms.scale.resize(d);
    int at = 0;
    if (geometry.unsteady()) {
        ms.shift[at] = 0.5 * (geometry.time->t0 + geometry.time->t1);
        ms.scale[at] = 2.0 / std::max(1e-12, geometry.time->t1 - geometry.time->t0);
        ++at;
    }
    ms.shift[at] = 0.5 * (geometry.x0 + geometry.x1);
    ms.scale[at] = 2.0 / (geometry.x1 - geometry.x0);
    ++at;
    ms.shift[at] = 0.5 * (geometry.y0 + geometry.y1);
    ms.scale[at] = 2.0 / (geometry.y1 - geometry.y0);
    return ms;
}

TrainConfig CaseConfig::train_config() const {
    TrainConfig t;
    t.max_steps = max_steps;
    t.init_lr = init_lr;
    t.warmup_steps = warmup_steps;
    t.batch_fvm = batch_fvm;
    t.snapshot_every = snapshot_every;
    t.metrics_every = metrics_every;
    t.seed = seed;
    t.alpha = alpha;
    t.weights = weights;
    t.physics = physics;
    t.ic = ic;
    return t;
}

CollocationSet CaseConfig::build_collocation() const {
    return classify_points(geometry, grid, bcs, geometry.unsteady() ? &ic : nullptr);
}

void CaseConfig::validate() const {
    weights.validate();
    if (alpha <= 0.0 || alpha > 1.0) throw ConfigError("relaxation factor must be in (0, 1]");
    if (max_steps < 1) throw ConfigError("max_steps must be >= 1");
    if (grid.nx < 3 || grid.ny < 3) throw ConfigError("grid resolution must be at least 3x3");
    const double hx = (geometry.x1 - geometry.x0) / double(grid.nx - 1);
    const double hy = (geometry.y1 - geometry.y0) / double(grid.ny - 1);
    if (std::abs(hx - hy) > 1e-9 * std::max(hx, hy))
        throw ConfigError("grid must be uniform (dx == dy)");

    // bc coverage: every geometric segment carries exactly one entry
    std::vector<SegmentId> required;
    if (geometry.wavy) {
        required.push_back({SegmentId::Walls, 0});
        required.push_back({SegmentId::Left, 0});
        required.push_back({SegmentId::Right, 0});
    } else {
        required.push_back({SegmentId::Left, 0});
        required.push_back({SegmentId::Right, 0});
        required.push_back({SegmentId::Top, 0});
        required.push_back({SegmentId::Bottom, 0});
    }
    for (size_t k = 0; k < geometry.solids.size(); ++k)
        required.push_back({SegmentId::SolidSurface, int(k)});
    for (const auto& seg : required) {
        int found = 0;
        for (const auto& e : bcs)
            if (e.segment == seg) ++found;
        if (found != 1)
            throw ConfigError("boundary segment '" + segment_name(seg) +
                              (found == 0 ? "' has no boundary condition"
                                          : "' has multiple boundary condition entries"));
    }
}

bool operator==(const CaseConfig& a, const CaseConfig& b) {
    return to_config_json(a) == to_config_json(b);
}

// ---------------------------------------------------------------------------
// Registry
// ---------------------------------------------------------------------------

namespace {

PolyProfile const_p(double v) { return PolyProfile::constant(v); }

DirichletBc velocity_bc(double u, double v) {
    DirichletBc d;
    d.u = const_p(u);
    d.v = const_p(v);
    return d;
}

DirichletBc no_slip() { return velocity_bc(0.0, 0.0); }

CaseConfig base_defaults() {
    CaseConfig c;
    c.model.trunk_widths = {64, 64};
    c.model.head_widths = {64};
    c.model.num_freqs = 32;
    c.model.freq_sigma = 2.0;
    c.metrics_every = 100;
    return c;
}

CaseConfig make_ldc() {
    CaseConfig c = base_defaults();
    c.case_id = "ldc";
    c.physics.re = 20000.0;
    c.geometry = Geometry{0.0, 1.0, 0.0, 1.0};
    c.grid = {258, 258};
    DirichletBc lid = velocity_bc(1.0, 0.0);
    c.bcs = {{SegmentId{SegmentId::Top, 0}, {lid}},
             {SegmentId{SegmentId::Bottom, 0}, {no_slip()}},
             {SegmentId{SegmentId::Left, 0}, {no_slip()}},
             {SegmentId{SegmentId::Right, 0}, {no_slip()}},
             {SegmentId{SegmentId::Pin, 0}, {PressurePinBc{0.0, 0.5, 0.5}}}};
    c.init_lr = 1e-3;
    c.max_steps = 100000;
    c.alpha = 0.65;
    c.weights.fvm_c = 3.0;
    c.weights.fvm_m = 3.0;
    c.weights.rc = 3.0;
    c.weights.bc = 1.0;
    return c;
}

CaseConfig make_wavy() {
    CaseConfig c = base_defaults();
    c.case_id = "wavy";
    c.physics.re = 100.0;
    c.geometry = Geometry{0.0, 5.3, -1.2, 1.2};
    c.geometry.wavy = WavyWalls{1.0, 0.2, 3.0};
    c.grid = {160, 73};  // h = 1/30
    DirichletBc inlet;
    inlet.u = PolyProfile{1.5, 0.0, -1.5, 'y'};  // -(3/2)(y^2 - 1)
    inlet.v = const_p(0.0);
    DirichletBc outlet_p;
    outlet_p.p = const_p(0.0);
    c.bcs = {{SegmentId{SegmentId::Walls, 0}, {no_slip()}},
             {SegmentId{SegmentId::Left, 0}, {inlet}},
             {SegmentId{SegmentId::Right, 0},
              {NeumannZeroBc{{"u", "v"}, 'x'}, BcSpec{outlet_p}}}};
    c.init_lr = 5e-3;
    c.max_steps = 50000;
    c.alpha = 0.95;
    c.weights.fvm_c = 1.0;
    c.weights.fvm_m = 1.0;
    c.weights.ad_c = 1.0;
    c.weights.ad_m = 1.0;
    c.weights.rc = 1.0;
    c.weights.bc = 1.0;
    return c;
}

CaseConfig make_airfoil() {
    CaseConfig c = base_defaults();
    c.case_id = "airfoil";
    c.physics.re = 1000.0;
    c.geometry = Geometry{0.0, 8.0, 0.0, 4.0};
    c.geometry.solids = {Airfoil{{3.0, 2.0}, 1.0, 7.0}};
    c.grid = {801, 401};  // h = 0.01
    DirichletBc stream = velocity_bc(1.0, 0.0);
    DirichletBc outlet_p;
    outlet_p.p = const_p(0.0);
    c.bcs = {{SegmentId{SegmentId::Left, 0}, {stream}},
             {SegmentId{SegmentId::Top, 0}, {stream}},
             {SegmentId{SegmentId::Bottom, 0}, {stream}},
             {SegmentId{SegmentId::Right, 0},
              {NeumannZeroBc{{"u", "v"}, 'x'}, BcSpec{outlet_p}}},
             {SegmentId{SegmentId::SolidSurface, 0}, {no_slip()}}};
    c.init_lr = 5e-3;
    c.max_steps = 50000;
    c.alpha = 0.95;
    c.weights.fvm_c = 10.0;
    c.weights.fvm_m = 1.0;
    c.weights.ad_c = 0.001;
    c.weights.ad_m = 0.001;
    c.weights.rc = 10.0;
    c.weights.bc = 1.0;
    c.p_inf = 1.0;
    c.eval_window = {{2.5, 4.5, 1.0, 3.0}};
    return c;
}

Polygon square_at(double cx, double cy, double side) {
    const double r = side / 2.0;
    return Polygon{{{cx - r, cy - r}, {cx + r, cy - r}, {cx + r, cy + r}, {cx - r, cy + r}}};
}

CaseConfig make_squares(bool channel) {
    CaseConfig c = base_defaults();
    c.case_id = channel ? "squares_channel" : "squares_open";
    c.physics.re = channel ? 40.0 : 25.0;
    DirichletBc stream = velocity_bc(1.0, 0.0);
    DirichletBc outlet_p;
    outlet_p.p = const_p(0.0);
    if (channel) {
        c.geometry = Geometry{0.0, 17.6, 0.0, 3.28};
        c.grid = {881, 165};  // h = 0.02
        const double cy = 1.64;
        c.geometry.solids = {square_at(4.0, cy, 1.0), square_at(6.5, cy, 1.0),
                             square_at(9.0, cy, 1.0)};
        DirichletBc inlet;
        inlet.u = PolyProfile{0.0, 4.0 / 3.28, -4.0 / (3.28 * 3.28), 'y'};  // parabola, peak 1
        inlet.v = const_p(0.0);
        c.bcs = {{SegmentId{SegmentId::Left, 0}, {inlet}},
                 {SegmentId{SegmentId::Top, 0}, {no_slip()}},
                 {SegmentId{SegmentId::Bottom, 0}, {no_slip()}},
                 {SegmentId{SegmentId::Right, 0},
                  {NeumannZeroBc{{"u", "v"}, 'x'}, BcSpec{outlet_p}}}};
    } else {
        c.geometry = Geometry{0.0, 20.0, 0.0, 10.0};
        c.grid = {1001, 501};  // h = 0.02
        const double cy = 5.0;
        c.geometry.solids = {square_at(5.0, cy, 1.0), square_at(8.0, cy, 1.0),
                             square_at(11.0, cy, 1.0)};
        c.bcs = {{SegmentId{SegmentId::Left, 0}, {stream}},
                 {SegmentId{SegmentId::Top, 0}, {stream}},
                 {SegmentId{SegmentId::Bottom, 0}, {stream}},
                 {SegmentId{SegmentId::Right, 0},
                  {NeumannZeroBc{{"u", "v"}, 'x'}, BcSpec{outlet_p}}}};
    }
    for (size_t k = 0; k < c.geometry.solids.size(); ++k)
        c.bcs.push_back({SegmentId{SegmentId::SolidSurface, int(k)}, {no_slip()}});
    c.init_lr = 5e-3;
    c.max_steps = 50000;
    c.alpha = 0.85;
    c.weights.fvm_c = 10.0;
    c.weights.fvm_m = 1.0;
    c.weights.ad_c = 0.01;
    c.weights.ad_m = 0.001;
    c.weights.rc = 15.0;
    c.weights.bc = 1.0;
    c.p_inf = 1.0;
    return c;
}

CaseConfig make_cylinder(bool unsteady) {
    CaseConfig c = base_defaults();
    c.case_id = unsteady ? "cylinder_unsteady" : "cylinder_steady";
    c.physics.re = unsteady ? 100.0 : 40.0;
    c.geometry = Geometry{0.0, 16.4, 0.0, 4.1};
    c.geometry.solids = {Circle{{2.0, 2.0}, 0.5}};
    const double H = 4.1, uref = 0.3;
    if (unsteady) {
        c.geometry.time = TimeSpan{0.0, 2.0, 21};
        c.grid = {165, 42};  // h = 0.1, desk scale
        c.ic.kind = InitialCondition::Kind::ParabolicChannel;
        c.ic.umax = uref;
        c.ic.ylo = 0.0;
        c.ic.yhi = H;
        c.batch_fvm = 4096;
    } else {
        c.grid = {329, 83};  // h = 0.05
    }
    DirichletBc inlet;
    inlet.u = PolyProfile{0.0, 4.0 * uref / H, -4.0 * uref / (H * H), 'y'};
    inlet.v = const_p(0.0);
    c.bcs = {{SegmentId{SegmentId::Left, 0}, {inlet}},
             {SegmentId{SegmentId::Top, 0}, {no_slip()}},
             {SegmentId{SegmentId::Bottom, 0}, {no_slip()}},
             {SegmentId{SegmentId::Right, 0}, {OutflowBc{c.physics.re}}},
             {SegmentId{SegmentId::SolidSurface, 0}, {no_slip()}}};
    c.init_lr = 5e-3;
    c.max_steps = unsteady ? 100000 : 50000;
    c.alpha = 0.90;
    c.weights.fvm_c = 1.0;
    c.weights.fvm_m = 1.0;
    c.weights.ad_c = 0.001;
    c.weights.ad_m = 0.001;
    c.weights.rc = 50.0;
    c.weights.bc = 1.0;
    if (unsteady) c.weights.ic = 50.0;
    c.p_inf = 0.0;
    return c;
}

CaseConfig make_rt() {
    CaseConfig c = base_defaults();
    c.case_id = "rayleigh_taylor";
    c.physics.thermal = true;
    c.physics.pr = 0.71;
    c.physics.ra = 1e6;
    c.geometry = Geometry{0.0, 1.0, 0.0, 2.0};
    c.geometry.time = TimeSpan{0.0, 6.0, 61};
    c.grid = {128, 255};  // h = 1/127
    c.ic.kind = InitialCondition::Kind::ThermalInterface;
    c.ic.interface_y = 1.0;
    c.ic.amplitude = 0.1;
    c.ic.thickness = 0.05;
    c.ic.wavelength = 1.0;
    DirichletBc bottom = no_slip();
    bottom.T = const_p(1.0);
    DirichletBc top = no_slip();
    top.T = const_p(0.0);
    NeumannZeroBc insulated{{"T"}, 'x'};
    c.bcs = {{SegmentId{SegmentId::Bottom, 0}, {bottom}},
             {SegmentId{SegmentId::Top, 0}, {top}},
             {SegmentId{SegmentId::Left, 0}, {no_slip(), BcSpec{insulated}}},
             {SegmentId{SegmentId::Right, 0}, {no_slip(), BcSpec{insulated}}},
             {SegmentId{SegmentId::Pin, 0}, {PressurePinBc{0.0, 0.5, 1.0}}}};
    c.init_lr = 3e-3;
    c.max_steps = 150000;
    c.alpha = 0.95;
    c.weights.fvm_c = 1.0;
    c.weights.fvm_m = 1.0;
    c.weights.fvm_e = 1.0;
    c.weights.rc = 5.0;
    c.weights.bc = 1.0;
    c.weights.ic = 5.0;
    c.batch_fvm = 4096;
    return c;
}

}  // namespace

const std::vector<std::string>& case_registry() {
    static const std::vector<std::string> ids = {"ldc",          "wavy",
                                                 "airfoil",      "squares_open",
                                                 "squares_channel", "cylinder_steady",
                                                 "cylinder_unsteady", "rayleigh_taylor"};
    return ids;
}

CaseConfig build_case(const std::string& case_id, const std::string& overrides_json) {
    CaseConfig c;
    if (case_id == "ldc") c = make_ldc();
    else if (case_id == "wavy") c = make_wavy();
    else if (case_id == "airfoil") c = make_airfoil();
    else if (case_id == "squares_open") c = make_squares(false);
    else if (case_id == "squares_channel") c = make_squares(true);
    else if (case_id == "cylinder_steady") c = make_cylinder(false);
    else if (case_id == "cylinder_unsteady") c = make_cylinder(true);
    else if (case_id == "rayleigh_taylor") c = make_rt();
    else throw ConfigError("unknown case id '" + case_id + "'");

    if (!overrides_json.empty()) {
        json j;
        try {
            j = json::parse(overrides_json, nullptr, true, true);
        } catch (const json::exception& e) {
            throw ConfigError(std::string("invalid override JSON: ") + e.what());
        }
        apply_json_to_config(j, c);
    }
    c.validate();
    return c;
}

std::string to_config_json(const CaseConfig& cfg) { return config_to_json_obj(cfg).dump(2); }

CaseConfig from_config_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text, nullptr, true, true);  // comments allowed
    } catch (const json::exception& e) {
        throw ConfigError(std::string("invalid config JSON: ") + e.what());
    }
    if (!j.contains("case")) throw ConfigError("config is missing the 'case' key");
    const std::string id = j["case"].get<std::string>();
    CaseConfig c = build_case(id);
    apply_json_to_config(j, c);
    c.validate();
    return c;
}

CaseConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return from_config_json(ss.str());
}

std::uint64_t config_hash(const CaseConfig& cfg) {
    const std::string s = config_to_json_obj(cfg).dump();
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char ch : s) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    return h;
}

}  // namespace nspinn
