#include <doctest.h>

#include "nspinn/cases.hpp"
#include "nspinn/reference.hpp"

using namespace nspinn;

TEST_CASE("ldc defaults follow the registered table") {
    const CaseConfig c = build_case("ldc");
    CHECK(c.physics.re == doctest::Approx(20000.0));
    CHECK(c.alpha == doctest::Approx(0.65));
    CHECK(c.max_steps == 100000);
    CHECK(c.init_lr == doctest::Approx(1e-3));
    CHECK(c.weights.fvm_c == doctest::Approx(3.0));
    CHECK(c.weights.fvm_m == doctest::Approx(3.0));
    CHECK(c.weights.rc == doctest::Approx(3.0));
    CHECK(c.weights.bc == doctest::Approx(1.0));
    CHECK(c.weights.ad_c == 0.0);
    CHECK(c.weights.ic == 0.0);
}

TEST_CASE("rayleigh-taylor defaults") {
    const CaseConfig c = build_case("rayleigh_taylor");
    CHECK(c.physics.thermal);
    CHECK(c.physics.pr == doctest::Approx(0.71));
    CHECK(c.physics.ra == doctest::Approx(1e6));
    CHECK(c.weights.rc == doctest::Approx(5.0));
    CHECK(c.weights.ic == doctest::Approx(5.0));
    CHECK(c.weights.fvm_e == doctest::Approx(1.0));
    CHECK(c.alpha == doctest::Approx(0.95));
    CHECK(c.init_lr == doctest::Approx(3e-3));
    CHECK(c.max_steps == 150000);
}

TEST_CASE("cylinder and wavy defaults") {
    const CaseConfig cyl = build_case("cylinder_unsteady");
    CHECK(cyl.weights.rc == doctest::Approx(50.0));
    CHECK(cyl.weights.ic == doctest::Approx(50.0));
    CHECK(cyl.weights.ad_c == doctest::Approx(0.001));
    CHECK(cyl.alpha == doctest::Approx(0.90));
    CHECK(cyl.geometry.time.has_value());

    const CaseConfig w = build_case("wavy");
    CHECK(w.physics.re == doctest::Approx(100.0));
    CHECK(w.alpha == doctest::Approx(0.95));
    CHECK(w.weights.ad_c == doctest::Approx(1.0));

    const CaseConfig sq = build_case("squares_channel");
    CHECK(sq.physics.re == doctest::Approx(40.0));
    CHECK(sq.alpha == doctest::Approx(0.85));
    CHECK(sq.weights.rc == doctest::Approx(15.0));
    CHECK(sq.weights.fvm_c == doctest::Approx(10.0));
}

TEST_CASE("build_case with overrides keeps invariants") {
    const CaseConfig c = build_case("ldc", R"({"physics": {"re": 100},
                                               "grid": {"nx": 101, "ny": 101}})");
    CHECK(c.physics.re == doctest::Approx(100.0));
    CHECK(c.grid.nx == 101);
    c.validate();
}

TEST_CASE("unknown case and invalid overrides are rejected") {
    CHECK_THROWS_AS(build_case("no_such_case"), ConfigError);
    CHECK_THROWS_AS(build_case("ldc", R"({"grid": {"nx": 50}})"), ConfigError);  // dx != dy
    CHECK_THROWS_AS(build_case("ldc", R"({"train": {"alpha": 1.5}})"), ConfigError);
    CHECK_THROWS_AS(build_case("ldc", R"({"weights": {"fvm_c": 0, "fvm_m": 0}})"), ConfigError);
}

TEST_CASE("config json round-trip is identity") {
    for (const auto& id : case_registry()) {
        const CaseConfig a = build_case(id);
        const CaseConfig b = from_config_json(to_config_json(a));
        CHECK(a == b);
        CHECK(config_hash(a) == config_hash(b));
    }
}

TEST_CASE("config hash changes when any field changes") {
    const CaseConfig a = build_case("ldc");
    CaseConfig b = a;
    b.seed += 1;
    CHECK(config_hash(a) != config_hash(b));
    CaseConfig c = a;
    c.weights.rc += 0.5;
    CHECK(config_hash(a) != config_hash(c));
}

TEST_CASE("every case builds, classifies and yields a finite loss") {
    for (const auto& id : case_registry()) {
        CAPTURE(id);
        // shrink the discretisation so the smoke stays fast; keep geometry
        CaseConfig c = build_case(id);
        const double aspect = (c.geometry.y1 - c.geometry.y0) / (c.geometry.x1 - c.geometry.x0);
        int nx = 21;
        int ny = 1 + int(std::lround(double(nx - 1) * aspect));
        while (ny < 3 ||
               std::abs((c.geometry.x1 - c.geometry.x0) / double(nx - 1) -
                        (c.geometry.y1 - c.geometry.y0) / double(ny - 1)) >
                   1e-10 * (c.geometry.x1 - c.geometry.x0) / double(nx - 1)) {
            ++nx;
            ny = 1 + int(std::lround(double(nx - 1) * aspect));
            REQUIRE(nx < 300);
        }
        c.grid = {nx, ny};
        if (c.geometry.time) c.geometry.time->layers = 3;
        c.model.trunk_widths = {8, 8};
        c.model.head_widths = {8};
        c.model.num_freqs = 4;
        c.model.anneal_steps = 10;
        c.batch_fvm = 64;
        c.max_steps = 10;
        c.validate();

        CollocationSet col = c.build_collocation();
        CHECK(col.n_pde() > 0);
        CHECK(col.n_bc() > 0);

        NetworkModel model = NetworkModel::create(c.model_spec());
        Trainer t(std::move(model), std::move(col), c.train_config());
        const StepRecord rec = t.step();
        CHECK(std::isfinite(rec.loss.total));
        const StepRecord rec2 = t.step();  // second step activates rc terms
        CHECK(std::isfinite(rec2.loss.total));
    }
}

TEST_CASE("bc coverage invariant holds for every registered case") {
    for (const auto& id : case_registry()) {
        const CaseConfig c = build_case(id);
        CHECK_NOTHROW(c.validate());
        // dropping any entry breaks coverage
        if (!c.bcs.empty()) {
            CaseConfig broken = c;
            // removing a pin is allowed; remove a geometric segment instead
            for (size_t i = 0; i < broken.bcs.size(); ++i) {
                if (broken.bcs[i].segment.kind != SegmentId::Pin) {
                    broken.bcs.erase(broken.bcs.begin() + long(i));
                    break;
                }
            }
            CHECK_THROWS_AS(broken.validate(), ConfigError);
        }
    }
}

// ---------------------------------------------------------------------------
// reference ingestion
// ---------------------------------------------------------------------------

TEST_CASE("classical cavity centerline table loads with 17 rows") {
    const ReferenceTable t =
        reference_ingest(std::string(NSPINN_DATA_DIR) + "/ghia1982_re100_u_centerline.csv",
                         {"y", "u"});
    CHECK(t.count() == 17);
    CHECK(t.is_profile());
    for (long i = 1; i < t.count(); ++i) CHECK(t.rows(i, 0) > t.rows(i - 1, 0));
    // end points: no-slip floor and the moving lid
    CHECK(t.rows(0, 0) == doctest::Approx(0.0));
    CHECK(t.rows(0, 1) == doctest::Approx(0.0));
    CHECK(t.rows(16, 0) == doctest::Approx(1.0));
    CHECK(t.rows(16, 1) == doctest::Approx(1.0));
}

TEST_CASE("empty reference file is a schema error") {
    CHECK_THROWS_AS(reference_ingest_text(""), SchemaError);
    CHECK_THROWS_AS(reference_ingest_text("y,u\n"), SchemaError);
}

TEST_CASE("schema mismatch and bad cells are rejected") {
    CHECK_THROWS_AS(reference_ingest_text("a,b\n1,2\n", {"y", "u"}), SchemaError);
    CHECK_THROWS_AS(reference_ingest_text("y,u\n1,abc\n"), SchemaError);
    CHECK_THROWS_AS(reference_ingest_text("y,u\n1,2,3\n"), SchemaError);
}

TEST_CASE("unsorted profile rows are sorted; re-ingest is idempotent") {
    const ReferenceTable t = reference_ingest_text("y,u\n0.5,2\n0.1,1\n0.9,3\n");
    CHECK(t.rows(0, 0) == doctest::Approx(0.1));
    CHECK(t.rows(1, 0) == doctest::Approx(0.5));
    CHECK(t.rows(2, 0) == doctest::Approx(0.9));
    // duplicate coordinates are non-monotone
    CHECK_THROWS_AS(reference_ingest_text("y,u\n0.5,2\n0.5,1\n"), SchemaError);
}

TEST_CASE("profile interpolation is piecewise linear") {
    const ReferenceTable t = reference_ingest_text("y,u\n0,0\n1,2\n");
    CHECK(t.interpolate(0.25) == doctest::Approx(0.5));
    CHECK(t.interpolate(-1) == doctest::Approx(0.0));  // clamped
    CHECK(t.interpolate(2) == doctest::Approx(2.0));
}
