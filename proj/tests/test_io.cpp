#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "nspinn/runio.hpp"

using namespace nspinn;
namespace fs = std::filesystem;

namespace {

NetworkModel demo_model(std::uint64_t seed = 12) {
    ModelSpec spec;
    spec.input_dim = 2;
    spec.outputs = {"u", "v", "p"};
    spec.trunk_widths = {7, 7};
    spec.head_widths = {5};
    spec.num_freqs = 3;
    spec.freq_sigma = 1.4;
    spec.anneal_steps = 50;
    spec.seed = seed;
    spec.shift = Eigen::VectorXd::Constant(2, 0.5);
    spec.scale = Eigen::VectorXd::Constant(2, 2.0);
    return NetworkModel::create(spec);
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct TmpDir {
    fs::path path;
    TmpDir() : path(fs::temp_directory_path() / ("nspinn_test_" + std::to_string(::getpid()))) {
        fs::create_directories(path);
    }
    ~TmpDir() { fs::remove_all(path); }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

}  // namespace

TEST_CASE("checkpoint round-trips bit-exactly") {
    TmpDir tmp;
    NetworkModel m = demo_model();
    m.anneal_step = 23;
    const std::string p1 = tmp.file("a.bin");
    save_checkpoint(m, p1);
    NetworkModel r = load_checkpoint(p1);
    CHECK(r.flatten() == m.flatten());
    CHECK(r.embed.freq == m.embed.freq);
    CHECK(r.embed.shift == m.embed.shift);
    CHECK(r.embed.scale == m.embed.scale);
    CHECK(r.anneal_step == 23);
    CHECK(r.output_names == m.output_names);
    // a second save must produce byte-identical files
    const std::string p2 = tmp.file("b.bin");
    save_checkpoint(r, p2);
    CHECK(read_file(p1) == read_file(p2));
}

TEST_CASE("corrupt and mismatched checkpoints are rejected") {
    TmpDir tmp;
    const std::string p = tmp.file("bad.bin");
    {
        std::ofstream out(p, std::ios::binary);
        out << "not a checkpoint at all";
    }
    CHECK_THROWS_AS(load_checkpoint(p), CheckpointError);
    CHECK_THROWS_AS(load_checkpoint(tmp.file("missing.bin")), CheckpointError);
}

TEST_CASE("csv export: 3x3 grid emits 9 rows plus a header") {
    NetworkModel m = demo_model();
    ExportSpec spec;
    spec.nx = 3;
    spec.ny = 3;
    std::stringstream out;
    export_fields_csv(m, spec, out);
    std::string line;
    long lines = 0;
    std::getline(out, line);
    CHECK(line == "x,y,u,v,p,V,omega");
    while (std::getline(out, line))
        if (!line.empty()) ++lines;
    CHECK(lines == 9);
}

TEST_CASE("csv export is deterministic and self-consistent") {
    TmpDir tmp;
    NetworkModel m = demo_model();
    ExportSpec spec;
    spec.nx = 5;
    spec.ny = 4;
    export_fields_csv(m, spec, tmp.file("f1.csv"));
    export_fields_csv(m, spec, tmp.file("f2.csv"));
    CHECK(read_file(tmp.file("f1.csv")) == read_file(tmp.file("f2.csv")));

    // V column equals sqrt(u^2 + v^2) of the same row to the last digit
    std::ifstream in(tmp.file("f1.csv"));
    std::string line;
    std::getline(in, line);  // header
    while (std::getline(in, line)) {
        std::stringstream ss(line);
        std::string cell;
        std::vector<double> cells;
        while (std::getline(ss, cell, ',')) cells.push_back(std::stod(cell));
        REQUIRE(cells.size() == 7);
        const double u = cells[2], v = cells[3], V = cells[5];
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.17g", std::sqrt(u * u + v * v));
        char buf2[32];
        std::snprintf(buf2, sizeof(buf2), "%.17g", V);
        CHECK(std::string(buf) == buf2);
    }
}

TEST_CASE("row order is lexicographic in (t, y, x)") {
    NetworkModel m = demo_model();
    ExportSpec spec;
    spec.nx = 3;
    spec.ny = 2;
    std::stringstream out;
    export_fields_csv(m, spec, out);
    std::string line;
    std::getline(out, line);
    double last_y = -1e300, last_x = -1e300;
    while (std::getline(out, line)) {
        std::stringstream ss(line);
        std::string sx, sy;
        std::getline(ss, sx, ',');
        std::getline(ss, sy, ',');
        const double x = std::stod(sx), y = std::stod(sy);
        if (y == last_y) CHECK(x > last_x);
        else CHECK(y > last_y);
        last_x = x;
        last_y = y;
    }
}

TEST_CASE("evaluate against a reference: self-comparison is exact") {
    TmpDir tmp;
    NetworkModel m = demo_model();
    ExportSpec spec;
    spec.nx = 4;
    spec.ny = 4;
    export_fields_csv(m, spec, tmp.file("self.csv"));
    const ReferenceTable ref = reference_ingest(tmp.file("self.csv"));
    const auto errors = evaluate_against_reference(m, ref);
    REQUIRE(errors.count("u") == 1);
    CHECK(errors.at("u").rel_l2 == doctest::Approx(0.0));
    CHECK(errors.at("u").mse == doctest::Approx(0.0));
    CHECK(errors.at("v").rel_l2 == doctest::Approx(0.0));
    CHECK(errors.at("p").mse == doctest::Approx(0.0));
}

TEST_CASE("evaluate detects a single perturbed row with hand-computed errors") {
    NetworkModel m = demo_model();
    // build a 2-row reference by direct evaluation, then perturb one u cell
    Eigen::MatrixXd X(2, 2);
    X << 0.2, 0.7, 0.3, 0.9;
    BatchForward fw;
    fw.run(m, X, 0);
    const double u0 = fw.value(0)[0], u1 = fw.value(0)[1];
    std::stringstream csv;
    csv << std::setprecision(17);
    csv << "x,y,u\n";
    csv << "0.2,0.3," << u0 + 0.1 << "\n";
    csv << "0.7,0.9," << u1 << "\n";
    const ReferenceTable ref = reference_ingest_text(csv.str());
    const auto errors = evaluate_against_reference(m, ref);
    const double ref_norm = std::sqrt((u0 + 0.1) * (u0 + 0.1) + u1 * u1);
    CHECK(errors.at("u").rel_l2 == doctest::Approx(0.1 / ref_norm).epsilon(1e-12));
    CHECK(errors.at("u").mse == doctest::Approx(0.01 / 2.0).epsilon(1e-12));
}

TEST_CASE("pressure comparison subtracts the means first") {
    NetworkModel m = demo_model();
    Eigen::MatrixXd X(2, 3);
    X << 0.1, 0.5, 0.9, 0.2, 0.5, 0.8;
    BatchForward fw;
    fw.run(m, X, 0);
    std::stringstream csv;
    csv << std::setprecision(17);
    csv << "x,y,p\n";
    for (int i = 0; i < 3; ++i)
        csv << X(0, i) << "," << X(1, i) << "," << fw.value(2)[i] + 5.0 << "\n";  // shifted gauge
    const ReferenceTable ref = reference_ingest_text(csv.str());
    const auto errors = evaluate_against_reference(m, ref);
    CHECK(errors.at("p").rel_l2 == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("profile evaluation against a synthetic table") {
    NetworkModel m = demo_model();
    // u(0.5, y) at three y values
    Eigen::MatrixXd X(2, 3);
    X << 0.5, 0.5, 0.5, 0.1, 0.5, 0.9;
    BatchForward fw;
    fw.run(m, X, 0);
    std::stringstream csv;
    csv << "y,u\n";
    for (int i = 0; i < 3; ++i) csv << X(1, i) << "," << fw.value(0)[i] << "\n";
    const ReferenceTable ref = reference_ingest_text(csv.str());
    const VariableErrors e = evaluate_profile(m, ref, "u", 0.5);
    CHECK(e.rel_l2 == doctest::Approx(0.0));
}

TEST_CASE("metrics stream emits one json object per record") {
    TmpDir tmp;
    MetricsWriter w(tmp.file("metrics.jsonl"));
    StepRecord rec;
    rec.step = 100;
    rec.lr = 1e-3;
    rec.loss.total = 0.5;
    rec.loss.components["fvm_c"] = 0.25;
    rec.wall_ms = 12.5;
    w.write(rec);
    rec.step = 200;
    w.write(rec);
    std::ifstream in(tmp.file("metrics.jsonl"));
    std::string line;
    long lines = 0;
    while (std::getline(in, line)) {
        ++lines;
        CHECK(line.find("\"step\"") != std::string::npos);
        CHECK(line.find("\"loss_total\"") != std::string::npos);
        CHECK(line.find("\"fvm_c\"") != std::string::npos);
    }
    CHECK(lines == 2);
}

TEST_CASE("manifest writes atomically and the lock blocks writers") {
    TmpDir tmp;
    const std::string dir = tmp.file("run1");
    {
        RunLock lock(dir);
        CHECK_THROWS_AS([[maybe_unused]] RunLock second{dir}, ConfigError);  // second writer blocked
        RunManifest man;
        man.case_id = "ldc";
        man.config_hash = "abc";
        man.seed = 7;
        man.started_at = iso_timestamp();
        man.finished_at = iso_timestamp();
        man.final_metrics["loss_total"] = 0.125;
        man.write_atomic(dir + "/manifest.json");
        CHECK(fs::exists(dir + "/manifest.json"));
        CHECK_FALSE(fs::exists(dir + "/manifest.json.tmp"));
    }
    // lock released on destruction
    RunLock again(dir);
}

TEST_CASE("vtk writer produces a structured-points file") {
    TmpDir tmp;
    NetworkModel m = demo_model();
    ExportSpec spec;
    spec.nx = 3;
    spec.ny = 3;
    export_fields_vtk(m, spec, tmp.file("out"));
    const std::string text = read_file(tmp.file("out.vtk"));
    CHECK(text.find("DATASET STRUCTURED_POINTS") != std::string::npos);
    CHECK(text.find("VECTORS velocity double") != std::string::npos);
}
