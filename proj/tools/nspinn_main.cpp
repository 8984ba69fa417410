#include <CLI11.hpp>
#include <json.hpp>
#include <cstdlib>
#include <filesystem>
#include <iostream>

#include "nspinn/runio.hpp"

using namespace nspinn;
namespace fs = std::filesystem;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNanAbort = 3;

std::string default_run_root() {
    if (const char* env = std::getenv("NSPINN_RUN_ROOT")) return env;
    return "runs";
}

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

struct RunFlags {
    std::string config_path, case_id, out_dir, override_json;
    double re = -1, pr = -1, ra = -1, lr = -1, alpha = -1;
    long nx = -1, ny = -1, nt = -1, max_iter = -1, batch = -1, seed = -1;
    double lambda_rc = -1, lambda_fvm_c = -1, lambda_fvm_m = -1, lambda_fvm_e = -1;
    double lambda_ad_c = -1, lambda_ad_m = -1, lambda_bc = -1, lambda_ic = -1;
    double t1 = -1;
};

CaseConfig resolve_config(const RunFlags& f) {
    CaseConfig cfg;
    if (!f.config_path.empty()) {
        cfg = load_config_file(f.config_path);
        if (!f.case_id.empty() && f.case_id != cfg.case_id)
            throw ConfigError("--case disagrees with the config file");
    } else if (!f.case_id.empty()) {
        cfg = build_case(f.case_id);
    } else {
        throw ConfigError("either --config or --case is required");
    }
    if (!f.override_json.empty()) {
        nlohmann::json merged = nlohmann::json::parse(to_config_json(cfg));
        merged.merge_patch(nlohmann::json::parse(f.override_json, nullptr, true, true));
        cfg = from_config_json(merged.dump());
    }
    // flags win over config file values
    if (f.re >= 0) cfg.physics.re = f.re;
    if (f.pr >= 0) cfg.physics.pr = f.pr, cfg.physics.thermal = true;
    if (f.ra >= 0) cfg.physics.ra = f.ra, cfg.physics.thermal = true;
    if (f.nx > 0) cfg.grid.nx = int(f.nx);
    if (f.ny > 0) cfg.grid.ny = int(f.ny);
    if (f.nt > 0 && cfg.geometry.time) cfg.geometry.time->layers = int(f.nt);
    if (f.t1 >= 0 && cfg.geometry.time) cfg.geometry.time->t1 = f.t1;
    if (f.max_iter > 0) cfg.max_steps = f.max_iter;
    if (f.batch >= 0) cfg.batch_fvm = f.batch;
    if (f.seed >= 0) cfg.seed = std::uint64_t(f.seed);
    if (f.lr > 0) cfg.init_lr = f.lr;
    if (f.alpha > 0) cfg.alpha = f.alpha;
    if (f.lambda_rc >= 0) cfg.weights.rc = f.lambda_rc;
    if (f.lambda_fvm_c >= 0) cfg.weights.fvm_c = f.lambda_fvm_c;
    if (f.lambda_fvm_m >= 0) cfg.weights.fvm_m = f.lambda_fvm_m;
    if (f.lambda_fvm_e >= 0) cfg.weights.fvm_e = f.lambda_fvm_e;
    if (f.lambda_ad_c >= 0) cfg.weights.ad_c = f.lambda_ad_c;
    if (f.lambda_ad_m >= 0) cfg.weights.ad_m = f.lambda_ad_m;
    if (f.lambda_bc >= 0) cfg.weights.bc = f.lambda_bc;
    if (f.lambda_ic >= 0) cfg.weights.ic = f.lambda_ic;
    cfg.validate();
    return cfg;
}

int cmd_run(const RunFlags& flags) {
    CaseConfig cfg;
    try {
        cfg = resolve_config(flags);
    } catch (const std::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    }

    const std::string hash = hex64(config_hash(cfg));
    std::string dir = flags.out_dir;
    if (dir.empty())
        dir = default_run_root() + "/" + cfg.case_id + "-" + std::to_string(cfg.seed) + "-" +
              hash.substr(0, 8);

    try {
        RunLock lock(dir);
        RunManifest manifest;
        manifest.case_id = cfg.case_id;
        manifest.config_hash = hash;
        manifest.seed = cfg.seed;
        manifest.started_at = iso_timestamp();
        manifest.artifacts["config"] = dir + "/config.json";
        manifest.artifacts["checkpoint"] = dir + "/checkpoint.bin";
        manifest.artifacts["metrics"] = dir + "/metrics.jsonl";

        {
            std::ofstream out(dir + "/config.json", std::ios::trunc);
            out << to_config_json(cfg) << "\n";
        }

        NetworkModel model = NetworkModel::create(cfg.model_spec());
        CollocationSet col = cfg.build_collocation();
        std::cout << "case " << cfg.case_id << ": " << col.fvm.size() << " fvm, "
                  << col.ad.size() << " ad, " << col.boundary.size() << " bc, "
                  << col.initial.size() << " ic points; " << model.parameter_count()
                  << " parameters\n";

        Trainer trainer(std::move(model), std::move(col), cfg.train_config());
        MetricsWriter metrics(dir + "/metrics.jsonl");
        const long ck_every = cfg.checkpoint_every;

        try {
            for (long k = 0; k < cfg.max_steps; ++k) {
                const StepRecord rec = trainer.step();
                if (rec.step % cfg.metrics_every == 0 || rec.step + 1 == cfg.max_steps) {
                    metrics.write(rec);
                    std::cout << "step " << rec.step << " lr " << rec.lr << " loss "
                              << rec.loss.total << "\n";
                }
                if (ck_every > 0 && rec.step > 0 && rec.step % ck_every == 0)
                    save_checkpoint(trainer.model(), dir + "/checkpoint.bin");
            }
        } catch (const NonFiniteLossError& e) {
            std::cerr << "aborted: " << e.what() << "\n";
            manifest.aborted = true;
            manifest.finished_at = iso_timestamp();
            manifest.final_metrics["steps_completed"] = double(trainer.step_count());
            manifest.write_atomic(dir + "/manifest.json");
            return kExitNanAbort;
        }

        save_checkpoint(trainer.model(), dir + "/checkpoint.bin");
        manifest.finished_at = iso_timestamp();
        manifest.final_metrics["loss_total"] = trainer.last_record().loss.total;
        for (const auto& [name, value] : trainer.last_record().loss.components)
            manifest.final_metrics["loss_" + name] = value;
        manifest.final_metrics["fvm_residual"] = trainer.fvm_residual();
        manifest.write_atomic(dir + "/manifest.json");
        std::cout << "run complete: " << dir << "\n";
        return 0;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Physics-informed neural solver for 2-D incompressible flows"};
    app.require_subcommand(1);

    RunFlags rf;
    auto* run = app.add_subcommand("run", "train a case and write run artifacts");
    run->add_option("--config", rf.config_path, "config file (JSON, comments allowed)");
    run->add_option("--case", rf.case_id, "registered case id");
    run->add_option("--out", rf.out_dir, "run directory (default $NSPINN_RUN_ROOT/<auto>)");
    run->add_option("--re", rf.re, "Reynolds number");
    run->add_option("--pr", rf.pr, "Prandtl number");
    run->add_option("--ra", rf.ra, "Rayleigh number");
    run->add_option("--nx", rf.nx, "grid points in x");
    run->add_option("--ny", rf.ny, "grid points in y");
    run->add_option("--nt", rf.nt, "time layers");
    run->add_option("--t1", rf.t1, "end of the time span");
    run->add_option("--max-iter", rf.max_iter, "training iterations");
    run->add_option("--batch", rf.batch, "fvm minibatch size (0 = full batch)");
    run->add_option("--seed", rf.seed, "RNG seed");
    run->add_option("--lr", rf.lr, "initial learning rate");
    run->add_option("--alpha", rf.alpha, "correction relaxation factor");
    run->add_option("--lambda-rc", rf.lambda_rc, "correction loss weight");
    run->add_option("--lambda-fvm-c", rf.lambda_fvm_c, "fvm continuity weight");
    run->add_option("--lambda-fvm-m", rf.lambda_fvm_m, "fvm momentum weight");
    run->add_option("--lambda-fvm-e", rf.lambda_fvm_e, "fvm energy weight");
    run->add_option("--lambda-ad-c", rf.lambda_ad_c, "ad continuity weight");
    run->add_option("--lambda-ad-m", rf.lambda_ad_m, "ad momentum weight");
    run->add_option("--lambda-bc", rf.lambda_bc, "boundary loss weight");
    run->add_option("--lambda-ic", rf.lambda_ic, "initial-condition loss weight");
    run->add_option("--override", rf.override_json, "raw JSON merged into the config");

    std::string ck_path, out_path, ref_path, bbox_str, times_str, profile_var;
    long enx = 0, eny = 0;
    double p_inf_flag = std::nan("");
    double at_value = 0.5, at_time = 0.0;
    bool want_vtk = false;

    auto* exp = app.add_subcommand("export", "sample a checkpoint onto a grid (CSV/VTK)");
    exp->add_option("--checkpoint", ck_path, "checkpoint file")->required();
    exp->add_option("--out", out_path, "output CSV path")->required();
    exp->add_option("--nx", enx, "grid points in x")->required();
    exp->add_option("--ny", eny, "grid points in y")->required();
    exp->add_option("--bbox", bbox_str, "x0,x1,y0,y1 (default unit square)");
    exp->add_option("--times", times_str, "comma-separated time values (unsteady)");
    exp->add_option("--p-inf", p_inf_flag, "free-stream pressure: adds a cp column");
    exp->add_flag("--vtk", want_vtk, "also write legacy VTK next to the CSV");

    auto* eval = app.add_subcommand("evaluate", "compare a checkpoint against reference data");
    eval->add_option("--checkpoint", ck_path, "checkpoint file")->required();
    eval->add_option("--reference", ref_path, "reference CSV")->required();
    eval->add_option("--out", out_path, "report JSON path (default stdout)");
    eval->add_option("--profile", profile_var, "profile variable (two-column references)");
    eval->add_option("--at", at_value, "fixed coordinate of the profile line");
    eval->add_option("--time", at_time, "time of the comparison (unsteady)");

    auto* cases = app.add_subcommand("cases", "list the registered cases");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) return cmd_run(rf);

        if (exp->parsed()) {
            NetworkModel model = load_checkpoint(ck_path);
            ExportSpec spec;
            spec.nx = enx;
            spec.ny = eny;
            if (!bbox_str.empty()) {
                if (std::sscanf(bbox_str.c_str(), "%lf,%lf,%lf,%lf", &spec.x0, &spec.x1, &spec.y0,
                                &spec.y1) != 4)
                    throw ConfigError("--bbox must be x0,x1,y0,y1");
            }
            if (!times_str.empty()) {
                std::stringstream ss(times_str);
                std::string tok;
                while (std::getline(ss, tok, ',')) spec.times.push_back(std::stod(tok));
            }
            if (!std::isnan(p_inf_flag)) spec.p_inf = p_inf_flag;
            export_fields_csv(model, spec, out_path);
            if (want_vtk) {
                const auto dot = out_path.find_last_of('.');
                export_fields_vtk(model, spec,
                                  dot == std::string::npos ? out_path : out_path.substr(0, dot));
            }
            std::cout << "wrote " << out_path << "\n";
            return 0;
        }

        if (eval->parsed()) {
            NetworkModel model = load_checkpoint(ck_path);
            ReferenceTable ref = reference_ingest(ref_path);
            std::string report;
            if (ref.is_profile()) {
                if (profile_var.empty())
                    throw ConfigError("two-column reference needs --profile <var>");
                const VariableErrors e = evaluate_profile(model, ref, profile_var, at_value, at_time);
                report = errors_report_json({{profile_var, e}});
            } else {
                report = errors_report_json(evaluate_against_reference(model, ref));
            }
            if (out_path.empty()) {
                std::cout << report << "\n";
            } else {
                std::ofstream out(out_path, std::ios::trunc);
                out << report << "\n";
                std::cout << "wrote " << out_path << "\n";
            }
            return 0;
        }

        if (cases->parsed()) {
            for (const auto& id : case_registry()) {
                const CaseConfig c = build_case(id);
                std::cout << id << ": " << (c.physics.thermal
                                                ? "Pr=" + std::to_string(c.physics.pr) +
                                                      " Ra=" + std::to_string(c.physics.ra)
                                                : "Re=" + std::to_string(c.physics.re))
                          << ", grid " << c.grid.nx << "x" << c.grid.ny
                          << (c.geometry.time ? " (unsteady)" : "") << ", max_iter "
                          << c.max_steps << "\n";
            }
            return 0;
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const CheckpointError& e) {
        std::cerr << "checkpoint error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const SchemaError& e) {
        std::cerr << "reference error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
