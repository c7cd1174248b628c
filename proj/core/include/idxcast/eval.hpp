#pragma once

#include "idxcast/common.hpp"
#include "idxcast/hyperparams.hpp"
#include "idxcast/ingest.hpp"
#include "idxcast/preprocess.hpp"

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace idxcast {
class Forecaster;
}

namespace idxcast::eval {

double mse(std::span<const double> actual, std::span<const double> predicted);
/// 1 - SS_res / SS_tot; negative when worse than predicting the mean.
double r2(std::span<const double> actual, std::span<const double> predicted);

struct Metrics {
    double mse = 0.0;  ///< squared index points
    double r2 = 0.0;
    std::size_t n = 0;
};

Metrics compute_metrics(std::span<const double> actual, std::span<const double> predicted);

struct ForecastRow {
    Date date;
    double actual = 0.0;     ///< index points
    double predicted = 0.0;  ///< index points
};

struct SliceEvaluation {
    Metrics metrics;
    std::vector<ForecastRow> rows;
};

/**
 * One-step-ahead walk-forward over `test`.
 *
 * The prediction for each test day uses the window of actual observations
 * immediately before it, drawn from `context` (everything preceding the test
 * block) and from earlier test days. Inputs are normalized with the
 * training-slice `normalizer`; predictions are denormalized before scoring.
 */
SliceEvaluation evaluate_slice(const Forecaster& model, const ingest::PriceSeries& context,
                               const ingest::PriceSeries& test, const preprocess::NormalizationParams& normalizer);

struct FitReport {
    std::string index_name;
    std::string slice_name;
    tune::ModelKind model_kind = tune::ModelKind::Forest;
    tune::HyperparamPoint hyperparams;
    Metrics metrics;
    std::vector<double> cv_metrics;
    std::uint64_t seed = 0;
    std::size_t train_samples = 0;
    std::string train_end;
    std::vector<ForecastRow> forecast_rows;
};

/// Recomputes metrics from forecast_rows.
Metrics recompute_metrics(const FitReport& report);

nlohmann::json to_json(const Metrics& metrics);
nlohmann::json to_json(const FitReport& report);
FitReport fit_report_from_json(const nlohmann::json& j);

/// `date,actual,predicted`
void write_forecast_csv(const std::vector<ForecastRow>& rows, const std::filesystem::path& path);

}  // namespace idxcast::eval
