#include "nspinn/runio.hpp"

#include <bit>
#include <chrono>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <json.hpp>

#include "nspinn/metrics.hpp"

namespace nspinn {

using nlohmann::json;

static_assert(std::endian::native == std::endian::little,
              "checkpoint format assumes a little-endian host");

namespace {
constexpr char kMagic[4] = {'N', 'S', 'P', 'N'};
constexpr std::uint32_t kFormatVersion = 1;

json matrix_to_json(const Eigen::MatrixXd& m) {
    json rows = json::array();
    for (long i = 0; i < m.rows(); ++i) {
        json r = json::array();
        for (long j = 0; j < m.cols(); ++j) r.push_back(m(i, j));
        rows.push_back(r);
    }
    return rows;
}

Eigen::MatrixXd matrix_from_json(const json& j, long cols_hint) {
    const long rows = long(j.size());
    Eigen::MatrixXd m(rows, rows > 0 ? long(j.at(0).size()) : cols_hint);
    for (long i = 0; i < rows; ++i)
        for (long c = 0; c < m.cols(); ++c) m(i, c) = j.at(size_t(i)).at(size_t(c)).get<double>();
    return m;
}

json vector_to_json(const Eigen::VectorXd& v) {
    json a = json::array();
    for (long i = 0; i < v.size(); ++i) a.push_back(v[i]);
    return a;
}

Eigen::VectorXd vector_from_json(const json& j) {
    Eigen::VectorXd v(long(j.size()));
    for (long i = 0; i < v.size(); ++i) v[i] = j.at(size_t(i)).get<double>();
    return v;
}
}  // namespace

void save_checkpoint(const NetworkModel& model, const std::string& path) {
    json header;
    header["format_version"] = kFormatVersion;
    header["input_dim"] = model.input_dim();
    std::vector<int> trunk_widths;
    for (const auto& l : model.trunk) trunk_widths.push_back(l.out_dim());
    std::vector<int> head_widths;
    if (!model.heads.empty())
        for (size_t l = 0; l + 1 < model.heads[0].size(); ++l)
            head_widths.push_back(model.heads[0][size_t(l)].out_dim());
    header["trunk_widths"] = trunk_widths;
    header["head_widths"] = head_widths;
    header["output_names"] = model.output_names;
    header["embedding"] = {{"num_freqs", model.embed.num_freqs},
                           {"sigma", model.embed.sigma},
                           {"seed", model.embed.seed},
                           {"anneal_steps", model.embed.anneal_steps},
                           {"shift", vector_to_json(model.embed.shift)},
                           {"scale", vector_to_json(model.embed.scale)},
                           {"freq", matrix_to_json(model.embed.freq)}};
    header["anneal_step"] = model.anneal_step;
    header["rng_seed"] = model.init_seed;
    const Eigen::VectorXd params = model.flatten();
    header["param_count"] = params.size();

    const std::string htext = header.dump();
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw CheckpointError("cannot open checkpoint for writing: " + path);
    out.write(kMagic, 4);
    const std::uint32_t ver = kFormatVersion;
    out.write(reinterpret_cast<const char*>(&ver), sizeof(ver));
    const std::uint64_t hlen = htext.size();
    out.write(reinterpret_cast<const char*>(&hlen), sizeof(hlen));
    out.write(htext.data(), long(htext.size()));
    out.write(reinterpret_cast<const char*>(params.data()),
              long(params.size()) * long(sizeof(double)));
    if (!out) throw CheckpointError("failed writing checkpoint: " + path);
}

NetworkModel load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw CheckpointError("cannot open checkpoint: " + path);
    char magic[4];
    std::uint32_t ver = 0;
    std::uint64_t hlen = 0;
    in.read(magic, 4);
    in.read(reinterpret_cast<char*>(&ver), sizeof(ver));
    if (!in || std::memcmp(magic, kMagic, 4) != 0)
        throw CheckpointError("not a checkpoint file: " + path);
    if (ver != kFormatVersion)
        throw CheckpointError("unsupported checkpoint version " + std::to_string(ver));
    in.read(reinterpret_cast<char*>(&hlen), sizeof(hlen));
    std::string htext(hlen, '\0');
    in.read(htext.data(), long(hlen));
    if (!in) throw CheckpointError("truncated checkpoint header: " + path);
    json header;
    try {
        header = json::parse(htext);
    } catch (const json::exception& e) {
        throw CheckpointError(std::string("corrupt checkpoint header: ") + e.what());
    }

    ModelSpec spec;
    spec.input_dim = header.at("input_dim").get<int>();
    spec.outputs = header.at("output_names").get<std::vector<std::string>>();
    spec.trunk_widths = header.at("trunk_widths").get<std::vector<int>>();
    spec.head_widths = header.at("head_widths").get<std::vector<int>>();
    const json& em = header.at("embedding");
    spec.num_freqs = em.at("num_freqs").get<int>();
    spec.freq_sigma = em.at("sigma").get<double>();
    spec.anneal_steps = em.at("anneal_steps").get<long>();
    spec.seed = header.at("rng_seed").get<std::uint64_t>();
    spec.shift = vector_from_json(em.at("shift"));
    spec.scale = vector_from_json(em.at("scale"));

    NetworkModel model = NetworkModel::create(spec);
    model.embed.seed = em.at("seed").get<std::uint64_t>();
    model.embed.freq = matrix_from_json(em.at("freq"), spec.input_dim);
    model.anneal_step = header.at("anneal_step").get<long>();

    const long n = header.at("param_count").get<long>();
    if (n != model.parameter_count())
        throw CheckpointError("checkpoint parameter count mismatch");
    Eigen::VectorXd params(n);
    in.read(reinterpret_cast<char*>(params.data()), n * long(sizeof(double)));
    if (!in) throw CheckpointError("truncated checkpoint parameters: " + path);
    model.unflatten(params);
    return model;
}

// ---------------------------------------------------------------------------
// Export
// ---------------------------------------------------------------------------

namespace {

std::string fmt17(double x) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

}  // namespace

void export_fields_csv(const NetworkModel& model, const ExportSpec& spec, std::ostream& out) {
    if (spec.nx < 1 || spec.ny < 1) throw ConfigError("export grid must be at least 1x1");
    const bool unsteady = !spec.times.empty();
    if (unsteady && model.input_dim() != 3)
        throw ConfigError("time list given but the checkpoint is a steady model");
    const bool has_T = [&] {
        for (const auto& n : model.output_names)
            if (n == "T") return true;
        return false;
    }();

    out << "x,y";
    if (unsteady) out << ",t";
    out << ",u,v,p";
    if (has_T) out << ",T";
    out << ",V,omega";
    if (spec.p_inf) out << ",cp";
    out << "\n";

    std::vector<double> times = unsteady ? spec.times : std::vector<double>{0.0};
    for (double t : times) {
        for (long j = 0; j < spec.ny; ++j) {
            const double y =
                spec.ny == 1 ? spec.y0 : spec.y0 + (spec.y1 - spec.y0) * double(j) / double(spec.ny - 1);
            for (long i = 0; i < spec.nx; ++i) {
                const double x =
                    spec.nx == 1 ? spec.x0
                                 : spec.x0 + (spec.x1 - spec.x0) * double(i) / double(spec.nx - 1);
                const DerivedFields d =
                    postprocess(model, t, x, y, spec.p_inf ? *spec.p_inf : 0.0);
                out << fmt17(x) << ',' << fmt17(y);
                if (unsteady) out << ',' << fmt17(t);
                out << ',' << fmt17(d.u) << ',' << fmt17(d.v) << ',' << fmt17(d.p);
                if (has_T) out << ',' << fmt17(d.T);
                out << ',' << fmt17(d.vmag) << ',' << fmt17(d.omega);
                if (spec.p_inf) out << ',' << fmt17(d.cp);
                out << "\n";
            }
        }
    }
}

void export_fields_csv(const NetworkModel& model, const ExportSpec& spec,
                       const std::string& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw ConfigError("cannot open export file: " + path);
    export_fields_csv(model, spec, out);
}

void export_fields_vtk(const NetworkModel& model, const ExportSpec& spec,
                       const std::string& path_prefix) {
    const bool unsteady = !spec.times.empty();
    std::vector<double> times = unsteady ? spec.times : std::vector<double>{0.0};
    const double dx = spec.nx > 1 ? (spec.x1 - spec.x0) / double(spec.nx - 1) : 1.0;
    const double dy = spec.ny > 1 ? (spec.y1 - spec.y0) / double(spec.ny - 1) : 1.0;
    for (size_t ti = 0; ti < times.size(); ++ti) {
        const std::string path =
            unsteady ? path_prefix + "_t" + std::to_string(ti) + ".vtk" : path_prefix + ".vtk";
        std::ofstream out(path, std::ios::trunc);
        if (!out) throw ConfigError("cannot open vtk file: " + path);
        out << "# vtk DataFile Version 3.0\nfields\nASCII\nDATASET STRUCTURED_POINTS\n";
        out << "DIMENSIONS " << spec.nx << ' ' << spec.ny << " 1\n";
        out << "ORIGIN " << spec.x0 << ' ' << spec.y0 << " 0\n";
        out << "SPACING " << dx << ' ' << dy << " 1\n";
        out << "POINT_DATA " << spec.nx * spec.ny << "\n";
        std::vector<DerivedFields> d;
        d.reserve(size_t(spec.nx * spec.ny));
        for (long j = 0; j < spec.ny; ++j)
            for (long i = 0; i < spec.nx; ++i)
                d.push_back(postprocess(model, times[ti], spec.x0 + double(i) * dx,
                                        spec.y0 + double(j) * dy,
                                        spec.p_inf ? *spec.p_inf : 0.0));
        auto scalar = [&](const char* name, auto get) {
            out << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
            for (const auto& f : d) out << fmt17(get(f)) << "\n";
        };
        scalar("p", [](const DerivedFields& f) { return f.p; });
        scalar("vmag", [](const DerivedFields& f) { return f.vmag; });
        scalar("omega", [](const DerivedFields& f) { return f.omega; });
        out << "VECTORS velocity double\n";
        for (const auto& f : d) out << fmt17(f.u) << ' ' << fmt17(f.v) << " 0\n";
    }
}

// ---------------------------------------------------------------------------
// Evaluation
// ---------------------------------------------------------------------------

std::map<std::string, VariableErrors> evaluate_against_reference(const NetworkModel& model,
                                                                 const ReferenceTable& ref) {
    const bool has_t = model.input_dim() == 3;
    int cx = -1, cy = -1, ct = -1;
    std::vector<std::pair<std::string, int>> vars;
    for (size_t j = 0; j < ref.columns.size(); ++j) {
        const std::string& name = ref.columns[j];
        if (name == "x") cx = int(j);
        else if (name == "y") cy = int(j);
        else if (name == "t") ct = int(j);
        else vars.emplace_back(name, int(j));
    }
    if (cx < 0 || cy < 0) throw SchemaError("field reference needs x and y columns");
    if (has_t && ct < 0) throw SchemaError("unsteady checkpoint needs a t column in the reference");
    if (vars.empty()) throw SchemaError("field reference has no variable columns");

    const long n = ref.count();
    std::map<std::string, Eigen::VectorXd> pred;
    for (const auto& [name, _] : vars) pred[name] = Eigen::VectorXd(n);

    Eigen::MatrixXd X(model.input_dim(), n);
    for (long i = 0; i < n; ++i) {
        int at = 0;
        if (has_t) X(at++, i) = ct >= 0 ? ref.rows(i, ct) : 0.0;
        X(at++, i) = ref.rows(i, cx);
        X(at, i) = ref.rows(i, cy);
    }
    BatchForward fw;
    fw.run(model, X, 0);

    std::map<std::string, VariableErrors> out;
    for (const auto& [name, col] : vars) {
        int o = -1;
        for (size_t k = 0; k < model.output_names.size(); ++k)
            if (model.output_names[k] == name) o = int(k);
        if (o < 0) continue;  // reference column the model does not predict
        Eigen::VectorXd predicted = fw.value(o).transpose();
        Eigen::VectorXd reference = ref.rows.col(col);
        if (name == "p") {
            predicted.array() -= predicted.mean();
            reference.array() -= reference.mean();
        }
        VariableErrors e;
        e.rel_l2 = relative_l2(predicted, reference);
        e.mse = mse(predicted, reference);
        out[name] = e;
    }
    if (out.empty()) throw SchemaError("no reference columns match the model outputs");
    return out;
}

VariableErrors evaluate_profile(const NetworkModel& model, const ReferenceTable& ref,
                                const std::string& var, double at, double t) {
    if (!ref.is_profile()) throw SchemaError("profile evaluation needs a two-column table");
    const std::string coord = ref.columns[0];
    if (coord != "x" && coord != "y")
        throw SchemaError("profile coordinate column must be named x or y");
    const long n = ref.count();
    Eigen::MatrixXd X(model.input_dim(), n);
    const bool has_t = model.input_dim() == 3;
    for (long i = 0; i < n; ++i) {
        int k = 0;
        if (has_t) X(k++, i) = t;
        const double s = ref.rows(i, 0);
        if (coord == "y") {
            X(k++, i) = at;
            X(k, i) = s;
        } else {
            X(k++, i) = s;
            X(k, i) = at;
        }
    }
    BatchForward fw;
    fw.run(model, X, 0);
    const int o = model.output_index(var);
    Eigen::VectorXd predicted = fw.value(o).transpose();
    Eigen::VectorXd reference = ref.rows.col(1);
    if (var == "p") {
        predicted.array() -= predicted.mean();
        reference.array() -= reference.mean();
    }
    VariableErrors e;
    e.rel_l2 = relative_l2(predicted, reference);
    e.mse = mse(predicted, reference);
    return e;
}

std::string errors_report_json(const std::map<std::string, VariableErrors>& errors) {
    json j;
    for (const auto& [name, e] : errors) j[name] = {{"rel_l2", e.rel_l2}, {"mse", e.mse}};
    return j.dump(2);
}

// ---------------------------------------------------------------------------
// Run directory pieces
// ---------------------------------------------------------------------------

MetricsWriter::MetricsWriter(const std::string& path) : path_(path) {
    std::ofstream out(path_, std::ios::trunc);
    if (!out) throw ConfigError("cannot open metrics stream: " + path_);
}

void MetricsWriter::write(const StepRecord& rec) {
    json j;
    j["step"] = rec.step;
    j["lr"] = rec.lr;
    j["loss_total"] = rec.loss.total;
    json comp;
    for (const auto& [name, value] : rec.loss.components) comp[name] = value;
    j["components"] = comp;
    j["wall_ms"] = rec.wall_ms;
    std::ofstream out(path_, std::ios::app);
    out << j.dump() << "\n";
}

std::string iso_timestamp() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t tt = std::chrono::system_clock::to_time_t(now);
    char buf[32];
    std::tm tm{};
    gmtime_r(&tt, &tm);
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

void RunManifest::write_atomic(const std::string& path) const {
    json j;
    j["case"] = case_id;
    j["config_hash"] = config_hash;
    j["seed"] = seed;
    j["started_at"] = started_at;
    j["finished_at"] = finished_at;
    j["artifacts"] = artifacts;
    j["final_metrics"] = final_metrics;
    j["aborted"] = aborted;
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::trunc);
        if (!out) throw ConfigError("cannot write manifest: " + tmp);
        out << j.dump(2) << "\n";
    }
    std::filesystem::rename(tmp, path);
}

RunLock::RunLock(const std::string& dir) {
    std::filesystem::create_directories(dir);
    path_ = dir + "/.lock";
    if (std::filesystem::exists(path_))
        throw ConfigError("run directory is locked by another writer: " + dir);
    std::ofstream out(path_, std::ios::trunc);
    out << "pid " << ::getpid() << "\n";
}

RunLock::~RunLock() {
    std::error_code ec;
    std::filesystem::remove(path_, ec);
}

}  // namespace nspinn
