#pragma once

#include "idxcast/gaussian_process.hpp"
#include "idxcast/hyperparams.hpp"
#include "idxcast/ingest.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace idxcast::tune {

struct Evaluation {
    double mean_score = 0.0;
    std::vector<double> per_fold;
};

/// Scores a point; `seed` is the tuning seed, shared by every candidate so
/// that all of them see the same model randomness.
using Objective = std::function<Evaluation(const HyperparamPoint&, std::uint64_t seed)>;

struct HistoryEntry {
    HyperparamPoint point;
    double score = 0.0;
    std::vector<double> per_fold;
};

struct TuneResult {
    std::string method;
    HyperparamPoint best_point;
    double best_score = 0.0;
    std::vector<HistoryEntry> history;
    std::size_t iterations = 0;
    std::uint64_t seed = 0;
};

/// Receives every evaluation in history order.
using EvaluationSink = std::function<void(std::size_t iteration, const HistoryEntry&)>;

struct CvConfig {
    double initial_fraction = 0.6;  ///< share of windowed samples in the first training fold
    std::size_t horizon = 0;        ///< test block length; 0 derives it from `folds`
    std::size_t folds = 5;
};

/// Rolling-window CV over one training slice: the slice is normalized with
/// its own statistics, windowed, and each expanding split is fit and scored
/// by MSE in normalized units. Fold k trains with seed mix_seed(seed, k).
Evaluation cv_objective(ModelKind kind, const HyperparamPoint& point, const ingest::PriceSeries& train,
                        const CvConfig& cv, std::uint64_t seed, std::size_t threads = 1);

Objective make_cv_objective(ModelKind kind, ingest::PriceSeries train, CvConfig cv, std::size_t threads = 1);

struct RandomSearchOptions {
    std::size_t n_iterations = 20;
    std::uint64_t seed = 0;
    std::size_t threads = 1;  ///< concurrent candidate evaluations
};

/// Draws every candidate up front, scores them (possibly in parallel), and
/// keeps the earliest minimum.
TuneResult random_search(const HyperparamSpace& space, const Objective& objective, const RandomSearchOptions& options,
                         const EvaluationSink& sink = {});

struct BayesOptions {
    std::size_t n_init = 5;
    std::size_t n_iterations = 20;  ///< total evaluations, including n_init
    std::uint64_t seed = 0;
    std::size_t n_candidates = 512;
    KernelParams kernel{};
};

/// GP-EI Bayesian optimization: n_init random points, then each step fits a
/// GP to the standardized history and evaluates the best of n_candidates
/// random proposals under expected improvement.
TuneResult bayesian_optimize(const HyperparamSpace& space, const Objective& objective, const BayesOptions& options,
                             const EvaluationSink& sink = {});

nlohmann::json to_json(const TuneResult& result);
TuneResult tune_result_from_json(const nlohmann::json& j);

}  // namespace idxcast::tune
