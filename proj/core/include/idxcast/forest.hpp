#pragma once

#include "idxcast/common.hpp"
#include "idxcast/preprocess.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace idxcast::forest {

using preprocess::FeatureMatrix;
using preprocess::WindowedDataset;

enum class MaxFeatures { All, Log2, Sqrt };

std::string_view to_string(MaxFeatures mf);
/// Accepts All/Auto/None (all features), Log2, Sqrt; case-insensitive.
MaxFeatures parse_max_features(std::string_view text);
std::size_t feature_count(MaxFeatures mf, std::size_t n_features);

struct ForestConfig {
    std::size_t n_estimators = 100;
    /// Maximum number of node levels on any root-to-leaf path; the root is
    /// level 1, so max_depth = 1 yields a single leaf. Empty means unlimited.
    std::optional<std::size_t> max_depth;
    MaxFeatures max_features = MaxFeatures::All;
    std::size_t min_samples_leaf = 1;
    std::size_t min_samples_split = 2;
    std::uint64_t seed = 0;
    /// Disabling bagging grows every tree on the full training set.
    bool bootstrap = true;
    std::size_t threads = 1;

    void validate() const;
};

/// Flat node storage; children refer to indices in Tree::nodes.
struct TreeNode {
    static constexpr std::int32_t kLeaf = -1;

    std::int32_t feature = kLeaf;
    double threshold = 0.0;  ///< samples with x[feature] <= threshold go left
    std::int32_t left = -1;
    std::int32_t right = -1;
    double value = 0.0;  ///< mean target of the samples reaching the node
    std::size_t n_samples = 0;
    std::size_t depth = 1;

    bool is_leaf() const { return feature == kLeaf; }
    bool operator==(const TreeNode&) const = default;
};

struct Tree {
    std::vector<TreeNode> nodes;  ///< nodes[0] is the root

    double predict(std::span<const double> x) const;
    std::size_t depth() const;
    bool operator==(const Tree&) const = default;
};

struct ForestModel {
    ForestConfig config;
    std::size_t n_features = 0;
    std::vector<Tree> trees;
    std::vector<std::vector<std::size_t>> oob_indices;
};

struct Split {
    std::size_t feature = 0;
    double threshold = 0.0;
    double sse_reduction = 0.0;
};

/// n indices drawn uniformly with replacement.
std::vector<std::size_t> bootstrap_sample(std::size_t n, Rng& rng);

/**
 * Best SSE-reducing split over `candidate_features`, restricted to the rows
 * listed in `samples`.
 *
 * Thresholds are midpoints between consecutive distinct values. Both children
 * must keep at least `min_samples_leaf` rows. Ties go to the lowest feature
 * index, then the lowest threshold; gains within a relative 1e-12 of each
 * other count as ties.
 */
std::optional<Split> best_split(const FeatureMatrix& features, std::span<const double> targets,
                                std::span<const std::size_t> samples,
                                std::span<const std::size_t> candidate_features,
                                std::size_t min_samples_leaf);

/// Convenience overload over every row.
std::optional<Split> best_split(const FeatureMatrix& features, std::span<const double> targets,
                                std::span<const std::size_t> candidate_features,
                                std::size_t min_samples_leaf);

/// Grows one tree on `samples` (rows may repeat) with an RNG for feature subsets.
Tree grow_tree(const FeatureMatrix& features, std::span<const double> targets,
               std::vector<std::size_t> samples, const ForestConfig& config, Rng& rng);

ForestModel fit_forest(const WindowedDataset& data, const ForestConfig& config);

double predict_forest(const ForestModel& model, std::span<const double> row);
std::vector<double> predict_forest(const ForestModel& model, const FeatureMatrix& features);

nlohmann::json to_json(const ForestConfig& config);
ForestConfig forest_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ForestModel& model);
ForestModel forest_model_from_json(const nlohmann::json& j);

}  // namespace idxcast::forest
