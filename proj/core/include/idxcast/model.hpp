#pragma once

#include "idxcast/forest.hpp"
#include "idxcast/hyperparams.hpp"
#include "idxcast/lstm.hpp"
#include "idxcast/preprocess.hpp"

#include <filesystem>
#include <memory>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

namespace idxcast {

using tune::HyperparamPoint;
using tune::ModelKind;

/// A trained one-step-ahead regressor over normalized lag windows.
class Forecaster {
public:
    virtual ~Forecaster() = default;

    virtual ModelKind kind() const = 0;
    virtual std::size_t window_size() const = 0;
    virtual double predict(std::span<const double> window) const = 0;
    virtual nlohmann::json to_json() const = 0;

    std::vector<double> predict(const preprocess::FeatureMatrix& features) const;
};

class ForestForecaster final : public Forecaster {
public:
    ForestForecaster(forest::ForestModel model, std::size_t window_size)
        : model_(std::move(model)), window_size_(window_size) {}

    ModelKind kind() const override { return ModelKind::Forest; }
    std::size_t window_size() const override { return window_size_; }
    double predict(std::span<const double> window) const override;
    nlohmann::json to_json() const override;

    const forest::ForestModel& model() const { return model_; }

private:
    forest::ForestModel model_;
    std::size_t window_size_;
};

class LstmForecaster final : public Forecaster {
public:
    explicit LstmForecaster(lstm::LstmModel model) : model_(std::move(model)) {}

    ModelKind kind() const override { return ModelKind::Lstm; }
    std::size_t window_size() const override { return model_.config.window_size; }
    double predict(std::span<const double> window) const override;
    nlohmann::json to_json() const override;

    const lstm::LstmModel& model() const { return model_; }

private:
    lstm::LstmModel model_;
};

/// Predicts the most recent value in the window.
class PersistenceForecaster final : public Forecaster {
public:
    explicit PersistenceForecaster(std::size_t window_size = 1) : window_size_(window_size) {}

    ModelKind kind() const override { return ModelKind::Persistence; }
    std::size_t window_size() const override { return window_size_; }
    double predict(std::span<const double> window) const override;
    nlohmann::json to_json() const override;

private:
    std::size_t window_size_;
};

/// Missing fields fall back to library defaults; window_size is required.
forest::ForestConfig forest_config_from_point(const HyperparamPoint& point, std::uint64_t seed);
lstm::LstmConfig lstm_config_from_point(const HyperparamPoint& point, std::uint64_t seed);
std::size_t window_size_of(const HyperparamPoint& point);

struct TrainOptions {
    std::uint64_t seed = 0;
    std::size_t threads = 1;
};

std::unique_ptr<Forecaster> train_forecaster(ModelKind kind, const HyperparamPoint& point,
                                             const preprocess::WindowedDataset& data,
                                             const TrainOptions& options = {});

std::unique_ptr<Forecaster> forecaster_from_json(const nlohmann::json& j);

/// A forecaster bundled with the normalizer of its training slice; the unit
/// written by the CLI as a model file.
struct SavedModel {
    std::unique_ptr<Forecaster> forecaster;
    preprocess::NormalizationParams normalizer;
};

nlohmann::json to_json(const preprocess::NormalizationParams& params);
preprocess::NormalizationParams normalizer_from_json(const nlohmann::json& j);

void save_model(const Forecaster& forecaster, const preprocess::NormalizationParams& normalizer,
                const std::filesystem::path& path);
SavedModel load_model(const std::filesystem::path& path);

/// n_steps recursive forecasts in index points: each prediction is appended
/// to the window that produces the next one.
std::vector<double> forecast_recursive(const Forecaster& forecaster, const preprocess::NormalizationParams& normalizer,
                                       std::span<const double> history, std::size_t n_steps);

}  // namespace idxcast
