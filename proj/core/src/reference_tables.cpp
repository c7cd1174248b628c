#include "idxcast/reference_tables.hpp"

#include <algorithm>
#include <cctype>

namespace idxcast {
namespace {

using tune::HyperparamPoint;
using tune::ModelKind;

HyperparamPoint forest_point(std::int64_t window, std::int64_t depth, const char* features, std::int64_t leaf,
                             std::int64_t split, std::int64_t trees) {
    return {{"window_size", window},      {"max_depth", depth},         {"max_features", std::string(features)},
            {"min_samples_leaf", leaf},   {"min_samples_split", split}, {"n_estimators", trees}};
}

HyperparamPoint lstm_point(std::int64_t window, std::int64_t epochs, double l1, double l2, std::int64_t batch,
                           std::int64_t units) {
    return {{"window_size", window}, {"epochs", epochs},    {"l1", l1},
            {"l2", l2},              {"batch_size", batch}, {"units", units}};
}

}  // namespace

const std::vector<ReferenceRow>& reference_rows() {
    static const std::vector<ReferenceRow> rows{
        {"SP500", "D1", ModelKind::Forest, forest_point(2, 20, "Log2", 1, 2, 217), 0.66, 755.2},
        {"SP500", "D2", ModelKind::Forest, forest_point(2, 14, "Log2", 3, 2, 213), 0.74, 467.5},
        {"SP500", "D3", ModelKind::Forest, forest_point(1, 10, "None", 4, 4, 196), 0.93, 63.13},
        {"RUT", "D1", ModelKind::Forest, forest_point(2, 20, "Auto", 1, 13, 363), 0.75, 317.89},
        {"RUT", "D2", ModelKind::Forest, forest_point(2, 20, "None", 3, 6, 356), 0.81, 91.93},
        {"RUT", "D3", ModelKind::Forest, forest_point(1, 30, "Log2", 3, 2, 165), 0.89, 36.84},
        {"SP500", "D1", ModelKind::Lstm, lstm_point(5, 1, 0.1, 0.04, 32, 32), 0.94, 58.37},
        {"SP500", "D2", ModelKind::Lstm, lstm_point(5, 2, 0.1, 0.05, 32, 32), 0.96, 55.56},
        {"SP500", "D3", ModelKind::Lstm, lstm_point(6, 4, 0.1, 0.05, 32, 32), 0.98, 53.60},
        {"RUT", "D1", ModelKind::Lstm, lstm_point(1, 1, 0.1, 0.01, 32, 32), 0.89, 54.82},
        {"RUT", "D2", ModelKind::Lstm, lstm_point(2, 2, 0.1, 0.01, 32, 32), 0.97, 42.00},
        {"RUT", "D3", ModelKind::Lstm, lstm_point(3, 3, 0.1, 0.05, 32, 32), 0.98, 33.15},
    };
    return rows;
}

std::optional<std::string> canonical_index(std::string_view name) {
    std::string key;
    for (char c : name) {
        if (std::isalnum(static_cast<unsigned char>(c))) key.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
    }
    if (key == "SP500" || key == "SP" || key == "SPX" || key == "GSPC" || key == "SANDP500") return "SP500";
    if (key == "RUT" || key == "RUSSELL2000" || key == "R2000" || key == "RUSSELL") return "RUT";
    return std::nullopt;
}

std::optional<ReferenceRow> find_reference(std::string_view index, std::string_view slice, tune::ModelKind model) {
    const auto canon = canonical_index(index);
    if (!canon) return std::nullopt;
    const auto& rows = reference_rows();
    auto it = std::find_if(rows.begin(), rows.end(), [&](const ReferenceRow& r) {
        return r.index == *canon && r.slice == slice && r.model == model;
    });
    if (it == rows.end()) return std::nullopt;
    return *it;
}

}  // namespace idxcast
