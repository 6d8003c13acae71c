#pragma once

// Matrix file format: {"dim": n, "entries": [[re, im], ...] row-major, "label": "..."}.

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "semibound/errors.hpp"
#include "semibound/linalg.hpp"

namespace semibound {

inline nlohmann::json to_json(const OperatorMatrix& a) {
    nlohmann::json entries = nlohmann::json::array();
    const Matrix& m = a.matrix();
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j) entries.push_back({m(i, j).real(), m(i, j).imag()});
    nlohmann::json out{{"dim", a.dim()}, {"entries", std::move(entries)}};
    if (!a.label().empty()) out["label"] = a.label();
    return out;
}

inline OperatorMatrix operator_from_json(const nlohmann::json& j) {
    try {
        const auto dim = j.at("dim").get<Eigen::Index>();
        const auto& raw = j.at("entries");
        if (!raw.is_array()) throw StructuralError("matrix file: entries must be an array");
        std::vector<Complex> entries;
        entries.reserve(raw.size());
        for (const auto& e : raw) {
            if (e.is_number()) {
                entries.emplace_back(e.get<double>(), 0.0);
            } else if (e.is_array() && e.size() == 2) {
                entries.emplace_back(e[0].get<double>(), e[1].get<double>());
            } else {
                throw StructuralError("matrix file: each entry must be [re, im] or a real number");
            }
        }
        return OperatorMatrix::from_row_major(dim, entries, j.value("label", std::string{}));
    } catch (const nlohmann::json::exception& e) {
        throw StructuralError(std::string("matrix file: ") + e.what());
    }
}

/// Writes to a sibling temporary and renames, so readers never see a partial file.
inline void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot open " + tmp.string() + " for writing");
        out << content;
        if (!out.flush()) throw Error("write failed: " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw StructuralError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline OperatorMatrix load_matrix(const std::filesystem::path& path) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_file(path));
    } catch (const nlohmann::json::parse_error& e) {
        throw StructuralError(path.string() + ": " + e.what());
    }
    return operator_from_json(j);
}

inline void save_matrix(const std::filesystem::path& path, const OperatorMatrix& a) {
    write_file_atomic(path, to_json(a).dump() + "\n");
}

} // namespace semibound
