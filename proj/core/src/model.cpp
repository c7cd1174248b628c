#include "idxcast/model.hpp"

#include <fstream>

namespace idxcast {
namespace {

template <typename T>
T int_or(const HyperparamPoint& point, const std::string& name, T fallback) {
    if (!point.contains(name)) return fallback;
    const auto v = tune::get_int(point, name);
    if (v < 0) throw Error(ErrorKind::InvalidConfig, name + " must be non-negative");
    return static_cast<T>(v);
}

double real_or(const HyperparamPoint& point, const std::string& name, double fallback) {
    return point.contains(name) ? tune::get_real(point, name) : fallback;
}

}  // namespace

std::vector<double> Forecaster::predict(const preprocess::FeatureMatrix& features) const {
    std::vector<double> out(features.rows());
    for (std::size_t r = 0; r < features.rows(); ++r) out[r] = predict(features.row(r));
    return out;
}

double ForestForecaster::predict(std::span<const double> window) const {
    return forest::predict_forest(model_, window);
}

nlohmann::json ForestForecaster::to_json() const {
    auto j = forest::to_json(model_);
    j["window_size"] = window_size_;
    return j;
}

double LstmForecaster::predict(std::span<const double> window) const { return lstm::predict_lstm(model_, window); }

nlohmann::json LstmForecaster::to_json() const { return lstm::to_json(model_); }

double PersistenceForecaster::predict(std::span<const double> window) const {
    if (window.size() != window_size_) throw Error(ErrorKind::WidthMismatch, "persistence window mismatch");
    return window.back();
}

nlohmann::json PersistenceForecaster::to_json() const {
    return {{"type", "persistence"}, {"window_size", window_size_}};
}

std::size_t window_size_of(const HyperparamPoint& point) {
    const auto w = tune::get_int(point, "window_size");
    if (w < 1) throw Error(ErrorKind::InvalidConfig, "window_size must be >= 1");
    return static_cast<std::size_t>(w);
}

forest::ForestConfig forest_config_from_point(const HyperparamPoint& point, std::uint64_t seed) {
    forest::ForestConfig c;
    c.n_estimators = int_or<std::size_t>(point, "n_estimators", c.n_estimators);
    if (auto it = point.find("max_depth"); it != point.end()) {
        if (const auto* s = std::get_if<std::string>(&it->second)) {
            if (*s != "None" && *s != "none" && *s != "unlimited") {
                throw Error(ErrorKind::InvalidConfig, "max_depth must be an integer or \"None\"");
            }
        } else {
            c.max_depth = int_or<std::size_t>(point, "max_depth", 0);
        }
    }
    if (point.contains("max_features")) c.max_features = forest::parse_max_features(tune::get_string(point, "max_features"));
    c.min_samples_leaf = int_or<std::size_t>(point, "min_samples_leaf", c.min_samples_leaf);
    c.min_samples_split = int_or<std::size_t>(point, "min_samples_split", c.min_samples_split);
    c.seed = seed;
    c.validate();
    return c;
}

lstm::LstmConfig lstm_config_from_point(const HyperparamPoint& point, std::uint64_t seed) {
    lstm::LstmConfig c;
    c.window_size = window_size_of(point);
    c.units = int_or<std::size_t>(point, "units", c.units);
    c.epochs = int_or<std::size_t>(point, "epochs", 20);
    c.batch_size = int_or<std::size_t>(point, "batch_size", c.batch_size);
    c.l1 = real_or(point, "l1", c.l1);
    c.l2 = real_or(point, "l2", c.l2);
    c.dropout = real_or(point, "dropout", c.dropout);
    c.learning_rate = real_or(point, "learning_rate", c.learning_rate);
    c.seed = seed;
    c.validate();
    return c;
}

std::unique_ptr<Forecaster> train_forecaster(ModelKind kind, const HyperparamPoint& point,
                                             const preprocess::WindowedDataset& data, const TrainOptions& options) {
    const std::size_t window = window_size_of(point);
    if (data.window_size != window) throw Error(ErrorKind::ShapeMismatch, "dataset window differs from point");
    switch (kind) {
    case ModelKind::Forest: {
        auto config = forest_config_from_point(point, options.seed);
        config.threads = options.threads;
        return std::make_unique<ForestForecaster>(forest::fit_forest(data, config), window);
    }
    case ModelKind::Lstm:
        return std::make_unique<LstmForecaster>(lstm::fit_lstm(data, lstm_config_from_point(point, options.seed)));
    case ModelKind::Persistence:
        return std::make_unique<PersistenceForecaster>(window);
    }
    throw Error(ErrorKind::InvalidConfig, "unknown model kind");
}

std::unique_ptr<Forecaster> forecaster_from_json(const nlohmann::json& j) {
    try {
        const auto type = j.at("type").get<std::string>();
        if (type == "forest") {
            return std::make_unique<ForestForecaster>(forest::forest_model_from_json(j),
                                                      j.at("window_size").get<std::size_t>());
        }
        if (type == "lstm") return std::make_unique<LstmForecaster>(lstm::lstm_model_from_json(j));
        if (type == "persistence") {
            return std::make_unique<PersistenceForecaster>(j.at("window_size").get<std::size_t>());
        }
        throw Error(ErrorKind::InvalidModel, "unknown model type '" + type + "'");
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::InvalidModel, e.what());
    }
}

nlohmann::json to_json(const preprocess::NormalizationParams& params) {
    return {{"mean", params.mean()}, {"min", params.min()}, {"max", params.max()}};
}

preprocess::NormalizationParams normalizer_from_json(const nlohmann::json& j) {
    try {
        return {j.at("mean").get<double>(), j.at("min").get<double>(), j.at("max").get<double>()};
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::InvalidModel, e.what());
    }
}

void save_model(const Forecaster& forecaster, const preprocess::NormalizationParams& normalizer,
                const std::filesystem::path& path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw Error(ErrorKind::MissingFile, "cannot write " + path.string());
    const nlohmann::json doc{{"format", "idxcast-model"},
                             {"version", 1},
                             {"kind", tune::to_string(forecaster.kind())},
                             {"window_size", forecaster.window_size()},
                             {"normalizer", to_json(normalizer)},
                             {"model", forecaster.to_json()}};
    out << doc.dump() << '\n';
}

SavedModel load_model(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::MissingFile, "cannot open " + path.string());
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::InvalidModel, path.string() + ": " + e.what());
    }
    if (doc.value("format", "") != "idxcast-model") {
        throw Error(ErrorKind::InvalidModel, path.string() + " is not a model file");
    }
    return {forecaster_from_json(doc.at("model")), normalizer_from_json(doc.at("normalizer"))};
}

std::vector<double> forecast_recursive(const Forecaster& forecaster, const preprocess::NormalizationParams& normalizer,
                                       std::span<const double> history, std::size_t n_steps) {
    const std::size_t w = forecaster.window_size();
    if (history.size() < w) {
        throw Error(ErrorKind::WindowTooLarge, "history of " + std::to_string(history.size()) +
                                                   " values is shorter than window " + std::to_string(w));
    }
    std::vector<double> window = preprocess::normalize(history.subspan(history.size() - w), normalizer);
    std::vector<double> out;
    out.reserve(n_steps);
    for (std::size_t step = 0; step < n_steps; ++step) {
        const double next = forecaster.predict(window);
        out.push_back(normalizer.denormalize(next));
        window.erase(window.begin());
        window.push_back(next);
    }
    return out;
}

}  // namespace idxcast
