#include "idxcast/eval.hpp"

#include "idxcast/model.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>

namespace idxcast::eval {
namespace {

void check_lengths(std::span<const double> actual, std::span<const double> predicted, std::size_t min_len) {
    if (actual.size() != predicted.size()) {
        throw Error(ErrorKind::LengthMismatch, std::to_string(actual.size()) + " actual vs " +
                                                   std::to_string(predicted.size()) + " predicted");
    }
    if (actual.size() < min_len) throw Error(ErrorKind::Empty, "need at least " + std::to_string(min_len) + " values");
}

}  // namespace

double mse(std::span<const double> actual, std::span<const double> predicted) {
    check_lengths(actual, predicted, 1);
    double sse = 0.0;
    for (std::size_t i = 0; i < actual.size(); ++i) {
        const double e = actual[i] - predicted[i];
        sse += e * e;
    }
    return sse / static_cast<double>(actual.size());
}

double r2(std::span<const double> actual, std::span<const double> predicted) {
    check_lengths(actual, predicted, 2);
    const double mean = std::accumulate(actual.begin(), actual.end(), 0.0) / static_cast<double>(actual.size());
    double ss_res = 0.0, ss_tot = 0.0;
    for (std::size_t i = 0; i < actual.size(); ++i) {
        ss_res += (actual[i] - predicted[i]) * (actual[i] - predicted[i]);
        ss_tot += (actual[i] - mean) * (actual[i] - mean);
    }
    if (ss_tot == 0.0) throw Error(ErrorKind::ConstantActual, "R^2 undefined for constant actual values");
    return 1.0 - ss_res / ss_tot;
}

Metrics compute_metrics(std::span<const double> actual, std::span<const double> predicted) {
    Metrics m;
    m.mse = mse(actual, predicted);
    m.n = actual.size();
    // A single test point or a flat test block leaves R^2 undefined.
    m.r2 = std::numeric_limits<double>::quiet_NaN();
    if (actual.size() >= 2) {
        try {
            m.r2 = r2(actual, predicted);
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::ConstantActual) throw;
        }
    }
    return m;
}

SliceEvaluation evaluate_slice(const Forecaster& model, const ingest::PriceSeries& context,
                               const ingest::PriceSeries& test, const preprocess::NormalizationParams& normalizer) {
    if (test.empty()) throw Error(ErrorKind::InsufficientTestData, "empty test slice");
    const std::size_t w = model.window_size();
    if (context.size() < w) {
        throw Error(ErrorKind::WindowTooLarge, "context of " + std::to_string(context.size()) +
                                                   " observations cannot fill window " + std::to_string(w));
    }
    if (!context.empty() && !(context.observations.back().date < test.observations.front().date)) {
        throw Error(ErrorKind::CutoffOutOfRange, "context must precede the test block");
    }

    // Lag source: the last w context values followed by the test values.
    std::vector<double> lags;
    lags.reserve(w + test.size());
    for (std::size_t i = context.size() - w; i < context.size(); ++i) lags.push_back(context.observations[i].close);
    for (const auto& obs : test.observations) lags.push_back(obs.close);
    const auto normalized = preprocess::normalize(lags, normalizer);

    SliceEvaluation out;
    out.rows.reserve(test.size());
    std::vector<double> actual, predicted;
    for (std::size_t t = 0; t < test.size(); ++t) {
        const std::span<const double> window(normalized.data() + t, w);
        const double pred = normalizer.denormalize(model.predict(window));
        out.rows.push_back({test.observations[t].date, test.observations[t].close, pred});
        actual.push_back(test.observations[t].close);
        predicted.push_back(pred);
    }
    out.metrics = compute_metrics(actual, predicted);
    return out;
}

Metrics recompute_metrics(const FitReport& report) {
    std::vector<double> actual, predicted;
    for (const auto& row : report.forecast_rows) {
        actual.push_back(row.actual);
        predicted.push_back(row.predicted);
    }
    return compute_metrics(actual, predicted);
}

nlohmann::json to_json(const Metrics& metrics) {
    nlohmann::json j{{"mse", metrics.mse}, {"n", metrics.n}};
    j["r2"] = std::isfinite(metrics.r2) ? nlohmann::json(metrics.r2) : nlohmann::json(nullptr);
    return j;
}

nlohmann::json to_json(const FitReport& report) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& row : report.forecast_rows) {
        rows.push_back({format_date(row.date), row.actual, row.predicted});
    }
    return {{"index_name", report.index_name},
            {"slice_name", report.slice_name},
            {"model_kind", tune::to_string(report.model_kind)},
            {"hyperparams", tune::to_json(report.hyperparams)},
            {"metrics", to_json(report.metrics)},
            {"cv_metrics", report.cv_metrics},
            {"seed", report.seed},
            {"train_samples", report.train_samples},
            {"train_end", report.train_end},
            {"forecast_rows", rows}};
}

FitReport fit_report_from_json(const nlohmann::json& j) {
    try {
        FitReport r;
        r.index_name = j.at("index_name").get<std::string>();
        r.slice_name = j.at("slice_name").get<std::string>();
        r.model_kind = tune::parse_model_kind(j.at("model_kind").get<std::string>());
        r.hyperparams = tune::point_from_json(j.at("hyperparams"));
        const auto& m = j.at("metrics");
        r.metrics.mse = m.at("mse").get<double>();
        r.metrics.n = m.at("n").get<std::size_t>();
        r.metrics.r2 = m.at("r2").is_null() ? std::numeric_limits<double>::quiet_NaN() : m.at("r2").get<double>();
        r.cv_metrics = j.at("cv_metrics").get<std::vector<double>>();
        r.seed = j.at("seed").get<std::uint64_t>();
        r.train_samples = j.value("train_samples", std::size_t{0});
        r.train_end = j.value("train_end", std::string{});
        for (const auto& row : j.at("forecast_rows")) {
            const auto date = parse_iso_date(row.at(0).get<std::string>());
            if (!date) throw Error(ErrorKind::InvalidModel, "bad date in forecast_rows");
            r.forecast_rows.push_back({*date, row.at(1).get<double>(), row.at(2).get<double>()});
        }
        return r;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::InvalidModel, std::string("fit report: ") + e.what());
    }
}

void write_forecast_csv(const std::vector<ForecastRow>& rows, const std::filesystem::path& path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw Error(ErrorKind::MissingFile, "cannot write " + path.string());
    out << "date,actual,predicted\n";
    for (const auto& row : rows) {
        out << format_date(row.date) << ',' << format_double(row.actual) << ',' << format_double(row.predicted) << '\n';
    }
}

}  // namespace idxcast::eval
