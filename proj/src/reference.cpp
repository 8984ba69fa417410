#include "nspinn/reference.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <sstream>

namespace nspinn {

int ReferenceTable::column_index(const std::string& name) const {
    for (size_t i = 0; i < columns.size(); ++i)
        if (columns[i] == name) return int(i);
    throw SchemaError("reference table has no column '" + name + "'");
}

Eigen::VectorXd ReferenceTable::column(const std::string& name) const {
    return rows.col(column_index(name));
}

double ReferenceTable::interpolate(double s) const {
    if (!is_profile()) throw SchemaError("interpolate() requires a two-column profile table");
    const auto& c = rows.col(0);
    const auto& v = rows.col(1);
    const long n = rows.rows();
    if (s <= c[0]) return v[0];
    if (s >= c[n - 1]) return v[n - 1];
    long lo = 0, hi = n - 1;
    while (hi - lo > 1) {
        const long mid = (lo + hi) / 2;
        (c[mid] <= s ? lo : hi) = mid;
    }
    const double t = (s - c[lo]) / (c[hi] - c[lo]);
    return v[lo] + t * (v[hi] - v[lo]);
}

static std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) {
        // trim whitespace
        const auto b = cell.find_first_not_of(" \t\r");
        const auto e = cell.find_last_not_of(" \t\r");
        out.push_back(b == std::string::npos ? "" : cell.substr(b, e - b + 1));
    }
    return out;
}

ReferenceTable reference_ingest_text(const std::string& text,
                                     const std::vector<std::string>& schema) {
    std::stringstream in(text);
    std::string line;
    ReferenceTable t;
    std::vector<std::vector<double>> data;
    long lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        if (line[0] == '#') continue;
        const auto cells = split_csv(line);
        if (t.columns.empty()) {
            t.columns = cells;
            if (t.columns.size() < 2) throw SchemaError("reference header needs >= 2 columns");
            if (!schema.empty() && t.columns != schema) {
                std::string want;
                for (const auto& s : schema) want += (want.empty() ? "" : ",") + s;
                throw SchemaError("reference header does not match expected schema (" + want + ")");
            }
            continue;
        }
        if (cells.size() != t.columns.size())
            throw SchemaError("row " + std::to_string(lineno) + " has " +
                              std::to_string(cells.size()) + " cells, expected " +
                              std::to_string(t.columns.size()));
        std::vector<double> row;
        for (const auto& c : cells) {
            try {
                size_t used = 0;
                row.push_back(std::stod(c, &used));
                if (used != c.size()) throw std::invalid_argument(c);
            } catch (const std::exception&) {
                throw SchemaError("non-numeric cell '" + c + "' at row " + std::to_string(lineno));
            }
        }
        data.push_back(std::move(row));
    }
    if (t.columns.empty()) throw SchemaError("reference file is empty");
    if (data.empty()) throw SchemaError("reference file has a header but no data rows");

    t.rows.resize(long(data.size()), long(t.columns.size()));
    for (long i = 0; i < t.rows.rows(); ++i)
        for (long j = 0; j < t.rows.cols(); ++j) t.rows(i, j) = data[size_t(i)][size_t(j)];

    if (t.is_profile()) {
        std::vector<long> order(size_t(t.rows.rows()));
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(),
                         [&](long a, long b) { return t.rows(a, 0) < t.rows(b, 0); });
        Eigen::MatrixXd sorted(t.rows.rows(), t.rows.cols());
        for (long i = 0; i < t.rows.rows(); ++i) sorted.row(i) = t.rows.row(order[size_t(i)]);
        t.rows = sorted;
        for (long i = 1; i < t.rows.rows(); ++i)
            if (t.rows(i, 0) == t.rows(i - 1, 0))
                throw SchemaError("profile coordinate is not strictly monotone");
    }
    return t;
}

ReferenceTable reference_ingest(const std::string& path, const std::vector<std::string>& schema) {
    std::ifstream in(path);
    if (!in) throw SchemaError("cannot open reference file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return reference_ingest_text(ss.str(), schema);
}

}  // namespace nspinn
