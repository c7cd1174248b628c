#include "idxcast/forest.hpp"

#include "idxcast/parallel.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>

namespace idxcast::forest {
namespace {

constexpr double kTieTolerance = 1e-12;

bool all_equal(std::span<const double> targets, std::span<const std::size_t> samples) {
    for (std::size_t s : samples) {
        if (targets[s] != targets[samples.front()]) return false;
    }
    return true;
}

double mean_of(std::span<const double> targets, std::span<const std::size_t> samples) {
    double sum = 0.0;
    for (std::size_t s : samples) sum += targets[s];
    return sum / static_cast<double>(samples.size());
}

std::vector<std::size_t> pick_features(std::size_t n_features, std::size_t k, Rng& rng) {
    std::vector<std::size_t> all(n_features);
    std::iota(all.begin(), all.end(), 0);
    if (k >= n_features) return all;
    for (std::size_t i = 0; i < k; ++i) {
        std::swap(all[i], all[i + rng.index(n_features - i)]);
    }
    all.resize(k);
    std::sort(all.begin(), all.end());
    return all;
}

class TreeBuilder {
public:
    TreeBuilder(const FeatureMatrix& x, std::span<const double> y, const ForestConfig& config, Rng& rng)
        : x_(x), y_(y), config_(config), rng_(rng),
          n_candidates_(feature_count(config.max_features, x.cols())) {}

    std::int32_t build(std::vector<std::size_t> samples, std::size_t depth) {
        const auto index = static_cast<std::int32_t>(tree_.nodes.size());
        TreeNode node;
        node.value = mean_of(y_, samples);
        node.n_samples = samples.size();
        node.depth = depth;
        tree_.nodes.push_back(node);

        const bool depth_reached = config_.max_depth && depth >= *config_.max_depth;
        if (depth_reached || samples.size() < config_.min_samples_split ||
            samples.size() < 2 * config_.min_samples_leaf || all_equal(y_, samples)) {
            return index;
        }
        const auto candidates = pick_features(x_.cols(), n_candidates_, rng_);
        const auto split = best_split(x_, y_, samples, candidates, config_.min_samples_leaf);
        if (!split) return index;

        std::vector<std::size_t> left, right;
        for (std::size_t s : samples) {
            (x_(s, split->feature) <= split->threshold ? left : right).push_back(s);
        }
        samples.clear();
        samples.shrink_to_fit();

        const auto l = build(std::move(left), depth + 1);
        const auto r = build(std::move(right), depth + 1);
        auto& stored = tree_.nodes[static_cast<std::size_t>(index)];
        stored.feature = static_cast<std::int32_t>(split->feature);
        stored.threshold = split->threshold;
        stored.left = l;
        stored.right = r;
        return index;
    }

    Tree take() { return std::move(tree_); }

private:
    const FeatureMatrix& x_;
    std::span<const double> y_;
    const ForestConfig& config_;
    Rng& rng_;
    std::size_t n_candidates_;
    Tree tree_;
};

}  // namespace

std::string_view to_string(MaxFeatures mf) {
    switch (mf) {
    case MaxFeatures::All: return "All";
    case MaxFeatures::Log2: return "Log2";
    case MaxFeatures::Sqrt: return "Sqrt";
    }
    return "All";
}

MaxFeatures parse_max_features(std::string_view text) {
    std::string t(text);
    std::transform(t.begin(), t.end(), t.begin(), [](unsigned char c) { return std::tolower(c); });
    if (t == "all" || t == "auto" || t == "none") return MaxFeatures::All;
    if (t == "log2") return MaxFeatures::Log2;
    if (t == "sqrt") return MaxFeatures::Sqrt;
    throw Error(ErrorKind::InvalidConfig, "unknown max_features '" + std::string(text) + "'");
}

std::size_t feature_count(MaxFeatures mf, std::size_t n_features) {
    const double d = static_cast<double>(n_features);
    switch (mf) {
    case MaxFeatures::All: return n_features;
    case MaxFeatures::Log2: return std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(std::log2(d))));
    case MaxFeatures::Sqrt: return std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(std::sqrt(d))));
    }
    return n_features;
}

void ForestConfig::validate() const {
    if (n_estimators < 1) throw Error(ErrorKind::InvalidConfig, "n_estimators must be >= 1");
    if (max_depth && *max_depth < 1) throw Error(ErrorKind::InvalidConfig, "max_depth must be >= 1");
    if (min_samples_leaf < 1) throw Error(ErrorKind::InvalidConfig, "min_samples_leaf must be >= 1");
    if (min_samples_split < 2) throw Error(ErrorKind::InvalidConfig, "min_samples_split must be >= 2");
}

double Tree::predict(std::span<const double> x) const {
    std::size_t i = 0;
    while (!nodes[i].is_leaf()) {
        const auto& node = nodes[i];
        i = static_cast<std::size_t>(x[static_cast<std::size_t>(node.feature)] <= node.threshold ? node.left
                                                                                                  : node.right);
    }
    return nodes[i].value;
}

std::size_t Tree::depth() const {
    std::size_t d = 0;
    for (const auto& node : nodes) d = std::max(d, node.depth);
    return d;
}

std::vector<std::size_t> bootstrap_sample(std::size_t n, Rng& rng) {
    std::vector<std::size_t> out(n);
    for (auto& i : out) i = rng.index(n);
    return out;
}

std::optional<Split> best_split(const FeatureMatrix& features, std::span<const double> targets,
                                std::span<const std::size_t> samples,
                                std::span<const std::size_t> candidate_features,
                                std::size_t min_samples_leaf) {
    const std::size_t n = samples.size();
    min_samples_leaf = std::max<std::size_t>(min_samples_leaf, 1);
    if (n < 2 || n < 2 * min_samples_leaf || all_equal(targets, samples)) return std::nullopt;

    const double parent_mean = mean_of(targets, samples);
    double parent_sse = 0.0;
    for (std::size_t s : samples) parent_sse += (targets[s] - parent_mean) * (targets[s] - parent_mean);
    const double min_gain = kTieTolerance * parent_sse;

    std::vector<std::size_t> features_sorted(candidate_features.begin(), candidate_features.end());
    std::sort(features_sorted.begin(), features_sorted.end());

    std::optional<Split> best;
    std::vector<std::size_t> order;
    for (std::size_t f : features_sorted) {
        order.assign(samples.begin(), samples.end());
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return features(a, f) < features(b, f); });
        const double total = std::accumulate(order.begin(), order.end(), 0.0,
                                             [&](double acc, std::size_t s) { return acc + targets[s]; });
        double left_sum = 0.0;
        for (std::size_t k = 1; k < n; ++k) {
            left_sum += targets[order[k - 1]];
            const double lo = features(order[k - 1], f);
            const double hi = features(order[k], f);
            if (k < min_samples_leaf || n - k < min_samples_leaf || !(lo < hi)) continue;
            const double nl = static_cast<double>(k);
            const double nr = static_cast<double>(n - k);
            const double diff = left_sum / nl - (total - left_sum) / nr;
            // SSE(parent) - SSE(left) - SSE(right) = nl*nr/n * (mean_l - mean_r)^2
            const double gain = nl * nr / static_cast<double>(n) * diff * diff;
            if (gain <= min_gain) continue;
            if (!best || gain > best->sse_reduction * (1.0 + kTieTolerance)) {
                best = Split{f, lo + (hi - lo) / 2.0, gain};
            }
        }
    }
    return best;
}

std::optional<Split> best_split(const FeatureMatrix& features, std::span<const double> targets,
                                std::span<const std::size_t> candidate_features,
                                std::size_t min_samples_leaf) {
    std::vector<std::size_t> all(features.rows());
    std::iota(all.begin(), all.end(), 0);
    return best_split(features, targets, all, candidate_features, min_samples_leaf);
}

Tree grow_tree(const FeatureMatrix& features, std::span<const double> targets,
               std::vector<std::size_t> samples, const ForestConfig& config, Rng& rng) {
    if (samples.empty()) throw Error(ErrorKind::EmptyDataset, "no samples to grow a tree");
    TreeBuilder builder(features, targets, config, rng);
    builder.build(std::move(samples), 1);
    return builder.take();
}

ForestModel fit_forest(const WindowedDataset& data, const ForestConfig& config) {
    config.validate();
    if (data.size() == 0) throw Error(ErrorKind::EmptyDataset, "cannot fit a forest on no samples");
    const std::size_t n = data.size();

    ForestModel model;
    model.config = config;
    model.n_features = data.features.cols();
    model.trees.resize(config.n_estimators);
    model.oob_indices.resize(config.n_estimators);

    parallel_for(config.n_estimators, config.threads, [&](std::size_t t) {
        Rng rng(config.seed + t);
        std::vector<std::size_t> samples;
        if (config.bootstrap) {
            samples = bootstrap_sample(n, rng);
            std::vector<bool> seen(n, false);
            for (std::size_t s : samples) seen[s] = true;
            for (std::size_t i = 0; i < n; ++i) {
                if (!seen[i]) model.oob_indices[t].push_back(i);
            }
        } else {
            samples.resize(n);
            std::iota(samples.begin(), samples.end(), 0);
        }
        model.trees[t] = grow_tree(data.features, data.targets, std::move(samples), config, rng);
    });
    return model;
}

double predict_forest(const ForestModel& model, std::span<const double> row) {
    if (row.size() != model.n_features) {
        throw Error(ErrorKind::WidthMismatch, "expected " + std::to_string(model.n_features) + " features, got " +
                                                  std::to_string(row.size()));
    }
    double sum = 0.0;
    for (const auto& tree : model.trees) sum += tree.predict(row);
    return sum / static_cast<double>(model.trees.size());
}

std::vector<double> predict_forest(const ForestModel& model, const FeatureMatrix& features) {
    if (features.rows() > 0 && features.cols() != model.n_features) {
        throw Error(ErrorKind::WidthMismatch, "expected " + std::to_string(model.n_features) + " features, got " +
                                                  std::to_string(features.cols()));
    }
    std::vector<double> out(features.rows());
    for (std::size_t r = 0; r < features.rows(); ++r) out[r] = predict_forest(model, features.row(r));
    return out;
}

nlohmann::json to_json(const ForestConfig& config) {
    nlohmann::json j{{"n_estimators", config.n_estimators},
                     {"max_features", to_string(config.max_features)},
                     {"min_samples_leaf", config.min_samples_leaf},
                     {"min_samples_split", config.min_samples_split},
                     {"seed", config.seed},
                     {"bootstrap", config.bootstrap}};
    j["max_depth"] = config.max_depth ? nlohmann::json(*config.max_depth) : nlohmann::json(nullptr);
    return j;
}

ForestConfig forest_config_from_json(const nlohmann::json& j) {
    ForestConfig c;
    c.n_estimators = j.at("n_estimators").get<std::size_t>();
    if (j.contains("max_depth") && !j.at("max_depth").is_null()) c.max_depth = j.at("max_depth").get<std::size_t>();
    c.max_features = parse_max_features(j.at("max_features").get<std::string>());
    c.min_samples_leaf = j.at("min_samples_leaf").get<std::size_t>();
    c.min_samples_split = j.at("min_samples_split").get<std::size_t>();
    c.seed = j.value("seed", std::uint64_t{0});
    c.bootstrap = j.value("bootstrap", true);
    c.validate();
    return c;
}

nlohmann::json to_json(const ForestModel& model) {
    nlohmann::json trees = nlohmann::json::array();
    for (const auto& tree : model.trees) {
        nlohmann::json feature = nlohmann::json::array(), threshold = nlohmann::json::array(),
                       left = nlohmann::json::array(), right = nlohmann::json::array(),
                       value = nlohmann::json::array(), n_samples = nlohmann::json::array();
        for (const auto& node : tree.nodes) {
            feature.push_back(node.feature);
            threshold.push_back(node.threshold);
            left.push_back(node.left);
            right.push_back(node.right);
            value.push_back(node.value);
            n_samples.push_back(node.n_samples);
        }
        trees.push_back({{"feature", feature},
                         {"threshold", threshold},
                         {"left", left},
                         {"right", right},
                         {"value", value},
                         {"n_samples", n_samples}});
    }
    return {{"type", "forest"}, {"config", to_json(model.config)}, {"n_features", model.n_features},
            {"trees", trees}};
}

ForestModel forest_model_from_json(const nlohmann::json& j) {
    try {
        ForestModel model;
        model.config = forest_config_from_json(j.at("config"));
        model.n_features = j.at("n_features").get<std::size_t>();
        for (const auto& t : j.at("trees")) {
            Tree tree;
            const auto& feature = t.at("feature");
            tree.nodes.resize(feature.size());
            for (std::size_t i = 0; i < feature.size(); ++i) {
                auto& node = tree.nodes[i];
                node.feature = feature[i].get<std::int32_t>();
                node.threshold = t.at("threshold")[i].get<double>();
                node.left = t.at("left")[i].get<std::int32_t>();
                node.right = t.at("right")[i].get<std::int32_t>();
                node.value = t.at("value")[i].get<double>();
                node.n_samples = t.at("n_samples")[i].get<std::size_t>();
            }
            // Children always follow their parent in storage order.
            for (std::size_t i = 0; i < tree.nodes.size(); ++i) {
                const auto& node = tree.nodes[i];
                if (node.is_leaf()) continue;
                const auto n = static_cast<std::int32_t>(tree.nodes.size());
                if (node.left <= static_cast<std::int32_t>(i) || node.right <= static_cast<std::int32_t>(i) ||
                    node.left >= n || node.right >= n || node.feature >= static_cast<std::int32_t>(model.n_features)) {
                    throw Error(ErrorKind::InvalidModel, "malformed tree node " + std::to_string(i));
                }
                tree.nodes[static_cast<std::size_t>(node.left)].depth = node.depth + 1;
                tree.nodes[static_cast<std::size_t>(node.right)].depth = node.depth + 1;
            }
            model.trees.push_back(std::move(tree));
        }
        if (model.trees.size() != model.config.n_estimators || model.trees.empty()) {
            throw Error(ErrorKind::InvalidModel, "tree count does not match n_estimators");
        }
        return model;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::InvalidModel, e.what());
    }
}

}  // namespace idxcast::forest
