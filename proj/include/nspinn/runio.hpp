#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "nspinn/cases.hpp"
#include "nspinn/network.hpp"
#include "nspinn/reference.hpp"
#include "nspinn/training.hpp"

namespace nspinn {

// ---------------------------------------------------------------------------
// Checkpoint file: magic + version, JSON header (format version, input dim,
// layer widths, output names, embedding spec, RNG seed, schedule state),
// then the flat parameter vector as little-endian 64-bit floats.
// ---------------------------------------------------------------------------

void save_checkpoint(const NetworkModel& model, const std::string& path);
NetworkModel load_checkpoint(const std::string& path);

struct CheckpointError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Field export
// ---------------------------------------------------------------------------

struct ExportSpec {
    long nx = 0, ny = 0;
    double x0 = 0, x1 = 1, y0 = 0, y1 = 1;
    std::vector<double> times;       ///< empty = steady (no t column)
    std::optional<double> p_inf;     ///< emit a cp column when set
};

/// CSV with header x,y[,t],u,v,p[,T],V,omega[,cp]; rows ordered
/// lexicographically by (t, y, x); 17 significant digits.
void export_fields_csv(const NetworkModel& model, const ExportSpec& spec, std::ostream& out);
void export_fields_csv(const NetworkModel& model, const ExportSpec& spec,
                       const std::string& path);

/// Legacy-VTK structured points writer (one file per time value).
void export_fields_vtk(const NetworkModel& model, const ExportSpec& spec,
                       const std::string& path_prefix);

// ---------------------------------------------------------------------------
// Evaluation against reference data
// ---------------------------------------------------------------------------

struct VariableErrors {
    double rel_l2 = 0.0;
    double mse = 0.0;
};

/// Field-table comparison: evaluates the model at every reference sample
/// point and reports errors per shared variable column. Pressure fields are
/// mean-subtracted on both sides before the comparison (gauge freedom).
std::map<std::string, VariableErrors> evaluate_against_reference(const NetworkModel& model,
                                                                 const ReferenceTable& ref);

/// Profile comparison, e.g. u(at, y) against a (y,u) table: evaluates the
/// model along the line and reports errors for the profiled variable.
VariableErrors evaluate_profile(const NetworkModel& model, const ReferenceTable& ref,
                                const std::string& var, double at, double t = 0.0);

std::string errors_report_json(const std::map<std::string, VariableErrors>& errors);

// ---------------------------------------------------------------------------
// Run directory: metrics stream, manifest, lock file
// ---------------------------------------------------------------------------

class MetricsWriter {
public:
    explicit MetricsWriter(const std::string& path);
    void write(const StepRecord& rec);

private:
    std::string path_;
};

struct RunManifest {
    std::string case_id;
    std::string config_hash;  ///< hex
    std::uint64_t seed = 0;
    std::string started_at, finished_at;
    std::map<std::string, std::string> artifacts;
    std::map<std::string, double> final_metrics;
    bool aborted = false;

    void write_atomic(const std::string& path) const;
};

std::string iso_timestamp();

/// Exclusive lock file in a run directory; released on destruction.
class RunLock {
public:
    explicit RunLock(const std::string& dir);
    ~RunLock();
    RunLock(const RunLock&) = delete;
    RunLock& operator=(const RunLock&) = delete;

private:
    std::string path_;
};

}  // namespace nspinn
