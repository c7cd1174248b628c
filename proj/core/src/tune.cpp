#include "idxcast/tune.hpp"

#include "idxcast/eval.hpp"
#include "idxcast/model.hpp"
#include "idxcast/parallel.hpp"
#include "idxcast/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace idxcast::tune {
namespace {

TuneResult finish(std::string method, std::vector<HistoryEntry> history, std::uint64_t seed) {
    TuneResult result;
    result.method = std::move(method);
    result.seed = seed;
    result.iterations = history.size();
    std::size_t best = 0;
    for (std::size_t i = 1; i < history.size(); ++i) {
        if (history[i].score < history[best].score) best = i;
    }
    result.best_point = history[best].point;
    result.best_score = history[best].score;
    result.history = std::move(history);
    return result;
}

HistoryEntry score(const Objective& objective, HyperparamPoint point, std::uint64_t seed) {
    auto eval = objective(point, seed);
    return {std::move(point), eval.mean_score, std::move(eval.per_fold)};
}

}  // namespace

Evaluation cv_objective(ModelKind kind, const HyperparamPoint& point, const ingest::PriceSeries& train,
                        const CvConfig& cv, std::uint64_t seed, std::size_t threads) {
    const std::size_t window = window_size_of(point);
    const auto values = train.values();
    const auto normalizer = preprocess::fit_normalizer(values);
    const auto normalized = preprocess::normalize(values, normalizer);
    if (normalized.size() <= window + 1) {
        throw Error(ErrorKind::InsufficientData, "training slice too short for window " + std::to_string(window));
    }
    const auto data = preprocess::make_windows(normalized, train.dates(), window);
    const std::size_t n = data.size();
    const auto initial = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::floor(cv.initial_fraction * static_cast<double>(n))));
    if (initial >= n) throw Error(ErrorKind::InsufficientData, "no samples left for CV test folds");
    const std::size_t horizon = cv.horizon > 0 ? cv.horizon : std::max<std::size_t>(1, (n - initial) / std::max<std::size_t>(cv.folds, 1));
    if (initial + horizon > n) throw Error(ErrorKind::InsufficientData, "CV horizon exceeds available samples");

    const auto splits = preprocess::rolling_splits(n, initial, horizon);
    Evaluation eval;
    eval.per_fold.reserve(splits.size());
    for (std::size_t k = 0; k < splits.size(); ++k) {
        const auto& split = splits[k];
        const auto train_part = data.subset(split.train.begin, split.train.end);
        const auto test_part = data.subset(split.test.begin, split.test.end);
        const auto model = train_forecaster(kind, point, train_part, {mix_seed(seed, k), threads});
        eval.per_fold.push_back(eval::mse(test_part.targets, model->predict(test_part.features)));
    }
    eval.mean_score = std::accumulate(eval.per_fold.begin(), eval.per_fold.end(), 0.0) /
                      static_cast<double>(eval.per_fold.size());
    return eval;
}

Objective make_cv_objective(ModelKind kind, ingest::PriceSeries train, CvConfig cv, std::size_t threads) {
    return [kind, train = std::move(train), cv, threads](const HyperparamPoint& point, std::uint64_t seed) {
        return cv_objective(kind, point, train, cv, seed, threads);
    };
}

TuneResult random_search(const HyperparamSpace& space, const Objective& objective, const RandomSearchOptions& options,
                         const EvaluationSink& sink) {
    if (options.n_iterations < 1) throw Error(ErrorKind::InvalidConfig, "n_iterations must be >= 1");
    Rng rng(options.seed);
    std::vector<HyperparamPoint> points;
    points.reserve(options.n_iterations);
    for (std::size_t i = 0; i < options.n_iterations; ++i) points.push_back(space.sample(rng));

    std::vector<HistoryEntry> history(points.size());
    parallel_for(points.size(), options.threads,
                 [&](std::size_t i) { history[i] = score(objective, points[i], options.seed); });
    if (sink) {
        for (std::size_t i = 0; i < history.size(); ++i) sink(i, history[i]);
    }
    return finish("random", std::move(history), options.seed);
}

TuneResult bayesian_optimize(const HyperparamSpace& space, const Objective& objective, const BayesOptions& options,
                             const EvaluationSink& sink) {
    if (options.n_init < 2) throw Error(ErrorKind::InvalidConfig, "n_init must be >= 2");
    if (options.n_iterations < options.n_init) throw Error(ErrorKind::InvalidConfig, "n_iterations must be >= n_init");
    if (options.n_candidates < 1) throw Error(ErrorKind::InvalidConfig, "n_candidates must be >= 1");

    Rng rng(options.seed);
    std::vector<HistoryEntry> history;
    history.reserve(options.n_iterations);
    auto record = [&](HyperparamPoint point) {
        history.push_back(score(objective, std::move(point), options.seed));
        if (sink) sink(history.size() - 1, history.back());
    };

    for (std::size_t i = 0; i < options.n_init; ++i) record(space.sample(rng));

    const auto dim = static_cast<Eigen::Index>(space.encoded_dim());
    while (history.size() < options.n_iterations) {
        const auto n = static_cast<Eigen::Index>(history.size());
        Eigen::MatrixXd x(n, dim);
        Eigen::VectorXd y(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            x.row(i) = space.encode(history[static_cast<std::size_t>(i)].point).transpose();
            y(i) = history[static_cast<std::size_t>(i)].score;
        }
        const double mean = y.mean();
        const double sd = std::sqrt((y.array() - mean).square().sum() / static_cast<double>(n));
        const double scale = sd > 0.0 ? sd : 1.0;
        y = (y.array() - mean) / scale;

        const GaussianProcess gp(x, y, options.kernel);
        const double best = y.minCoeff();

        std::optional<HyperparamPoint> pick;
        double pick_ei = -1.0;
        for (std::size_t c = 0; c < options.n_candidates; ++c) {
            auto candidate = space.sample(rng);
            const double ei = expected_improvement(gp, space.encode(candidate), best);
            if (ei > pick_ei) {
                pick_ei = ei;
                pick = std::move(candidate);
            }
        }
        record(std::move(*pick));
    }
    return finish("bayesian", std::move(history), options.seed);
}

nlohmann::json to_json(const TuneResult& result) {
    nlohmann::json history = nlohmann::json::array();
    for (const auto& entry : result.history) {
        history.push_back({{"point", to_json(entry.point)}, {"score", entry.score}, {"per_fold", entry.per_fold}});
    }
    return {{"method", result.method},
            {"seed", result.seed},
            {"iterations", result.iterations},
            {"best_point", to_json(result.best_point)},
            {"best_score", result.best_score},
            {"history", history}};
}

TuneResult tune_result_from_json(const nlohmann::json& j) {
    try {
        TuneResult result;
        result.method = j.at("method").get<std::string>();
        result.seed = j.at("seed").get<std::uint64_t>();
        result.iterations = j.at("iterations").get<std::size_t>();
        result.best_point = point_from_json(j.at("best_point"));
        result.best_score = j.at("best_score").get<double>();
        for (const auto& h : j.at("history")) {
            result.history.push_back({point_from_json(h.at("point")), h.at("score").get<double>(),
                                      h.at("per_fold").get<std::vector<double>>()});
        }
        return result;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::InvalidConfig, std::string("tune result: ") + e.what());
    }
}

}  // namespace idxcast::tune
