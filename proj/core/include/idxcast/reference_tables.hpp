#pragma once

#include "idxcast/hyperparams.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace idxcast {

/// Published best configuration and score for one (index, regime, model).
struct ReferenceRow {
    std::string index;  ///< "SP500" or "RUT"
    std::string slice;  ///< D1, D2, D3
    tune::ModelKind model;
    tune::HyperparamPoint hyperparams;
    double r2;
    double mse;
};

const std::vector<ReferenceRow>& reference_rows();

/// Maps user index labels (SP500, S&P, GSPC, RUT, Russell2000, ...) onto the
/// reference table's labels.
std::optional<std::string> canonical_index(std::string_view name);

std::optional<ReferenceRow> find_reference(std::string_view index, std::string_view slice, tune::ModelKind model);

}  // namespace idxcast
