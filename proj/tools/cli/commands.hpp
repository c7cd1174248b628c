#pragma once

#include "cli/config.hpp"
#include "idxcast/eval.hpp"
#include "idxcast/tune.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

namespace idxcast::cli {

/// Process exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitDataError = 1;
inline constexpr int kExitUsageError = 2;

struct GlobalOptions {
    std::filesystem::path config;
    std::optional<std::uint64_t> seed;
    std::optional<std::filesystem::path> out;
    std::optional<std::size_t> threads;
    bool verbose = false;
};

/// Config file with the global flag overrides applied.
ExperimentConfig resolve_config(const GlobalOptions& options);

/// Scores candidates for one (index, slice, model) on the slice's training
/// data with the configured tuner.
tune::TuneResult run_tuner(const ExperimentConfig& config, tune::ModelKind kind, const ingest::PriceSeries& train,
                           TunerMethod method, const tune::EvaluationSink& sink = {});

/// Point used for one cell when tuning is not requested.
tune::HyperparamPoint untuned_point(const ExperimentConfig& config, tune::ModelKind kind,
                                    const std::string& index_name, const std::string& slice_name, TunerMethod method);

std::filesystem::path cell_dir(const std::filesystem::path& out, const std::string& index, const std::string& slice,
                               tune::ModelKind kind);

int cmd_ingest(const std::filesystem::path& csv, const std::string& index, const std::filesystem::path& out_dir,
               std::ostream& out, std::ostream& err);

struct TuneRequest {
    std::string index;
    std::string slice;
    std::string model;
    std::optional<std::string> method;
    std::optional<std::size_t> budget;
};

int cmd_tune(const GlobalOptions& options, const TuneRequest& request, std::ostream& out, std::ostream& err);

int cmd_run(const GlobalOptions& options, std::ostream& out, std::ostream& err);

int cmd_forecast(const std::filesystem::path& model, const std::filesystem::path& series, std::size_t n_steps,
                 const std::optional<std::filesystem::path>& output, std::ostream& out, std::ostream& err);

int cmd_report(const std::filesystem::path& out_dir, std::ostream& out, std::ostream& err);

}  // namespace idxcast::cli
