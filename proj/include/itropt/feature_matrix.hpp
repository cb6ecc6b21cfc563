#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace itropt {

/// Rows of per-window feature vectors with class labels (1-based) and the
/// trial each window came from.
struct FeatureMatrix {
    struct Row {
        std::vector<double> values;
        int label = 0;  // 1..n_classes
        int trial_id = 0;
    };
    std::vector<Row> rows;
    std::vector<std::string> feature_names;
    int n_classes = 0;

    void validate() const {
        for (std::size_t i = 0; i < rows.size(); ++i) {
            if (rows[i].values.size() != feature_names.size())
                throw std::runtime_error("feature matrix row " + std::to_string(i) +
                                         ": value count does not match feature names");
            if (rows[i].label < 1 || rows[i].label > n_classes)
                throw std::runtime_error("feature matrix row " + std::to_string(i) +
                                         ": label " + std::to_string(rows[i].label) +
                                         " outside 1.." + std::to_string(n_classes));
        }
    }
};

namespace detail {

inline std::string format_full(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

inline double parse_double(const std::string& s, const std::string& where) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw std::runtime_error("non-numeric value '" + s + "' at " + where);
    }
}

}  // namespace detail

/// Writes `f_1,...,f_m,label,trial_id` then one row per window. Doubles go
/// out as %.17g so load(save(m)) is bit-exact.
inline void save_features(const FeatureMatrix& m, const std::string& path) {
    m.validate();
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    for (const auto& name : m.feature_names) out << name << ',';
    out << "label,trial_id\n";
    for (const auto& row : m.rows) {
        for (double v : row.values) out << detail::format_full(v) << ',';
        out << row.label << ',' << row.trial_id << '\n';
    }
}

inline FeatureMatrix load_features(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open: " + path);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("empty feature file: " + path);
    auto header = detail::split_csv(line);
    if (header.size() < 2 || header[header.size() - 2] != "label" ||
        header.back() != "trial_id")
        throw std::runtime_error("malformed feature header in " + path);

    FeatureMatrix m;
    m.feature_names.assign(header.begin(), header.end() - 2);
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        auto cells = detail::split_csv(line);
        if (cells.size() != header.size())
            throw std::runtime_error(path + ":" + std::to_string(line_no) +
                                     ": expected " + std::to_string(header.size()) +
                                     " cells, got " + std::to_string(cells.size()));
        FeatureMatrix::Row row;
        for (std::size_t c = 0; c + 2 < cells.size(); ++c)
            row.values.push_back(detail::parse_double(
                cells[c], path + ":" + std::to_string(line_no) + " col " + std::to_string(c + 1)));
        row.label = static_cast<int>(detail::parse_double(cells[cells.size() - 2], "label"));
        row.trial_id = static_cast<int>(detail::parse_double(cells.back(), "trial_id"));
        m.rows.push_back(std::move(row));
    }
    int max_label = 0;
    for (const auto& r : m.rows) max_label = std::max(max_label, r.label);
    m.n_classes = max_label;
    return m;
}

}  // namespace itropt
