#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "nspinn/network.hpp"

namespace nspinn {

/// Validated reference data table loaded from a CSV file with a header row.
/// Two-column tables are treated as profiles (monotone coordinate, linear
/// interpolation); wider tables as field samples.
struct ReferenceTable {
    std::vector<std::string> columns;
    Eigen::MatrixXd rows;  ///< one sample per row

    bool is_profile() const { return columns.size() == 2; }
    long count() const { return rows.rows(); }
    int column_index(const std::string& name) const;
    Eigen::VectorXd column(const std::string& name) const;

    /// Piecewise-linear interpolation of a profile at coordinate s
    /// (clamped at the ends).
    double interpolate(double s) const;
};

struct SchemaError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Parse a reference CSV. If `schema` is non-empty the header must match it
/// exactly. Profile tables are sorted by their coordinate column; duplicate
/// coordinates are a schema error.
ReferenceTable reference_ingest(const std::string& path,
                                const std::vector<std::string>& schema = {});
ReferenceTable reference_ingest_text(const std::string& text,
                                     const std::vector<std::string>& schema = {});

}  // namespace nspinn
