#pragma once

#include "idxcast/hyperparams.hpp"
#include "idxcast/ingest.hpp"
#include "idxcast/preprocess.hpp"
#include "idxcast/tune.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace idxcast::cli {

/// How each cell obtains its hyperparameters.
enum class TunerMethod {
    Default,    ///< random search for forests, Bayesian optimization for LSTMs
    Random,
    Bayesian,
    Reference,  ///< published best configuration for the (index, slice, model)
    Fixed,      ///< the point given under "fixed" in the config
};

std::string_view to_string(TunerMethod method);

struct TunerConfig {
    TunerMethod method = TunerMethod::Default;
    std::size_t budget = 20;
    std::size_t n_init = 5;
    std::size_t n_candidates = 512;
    std::uint64_t seed = 42;
};

struct ExperimentConfig {
    std::map<std::string, std::filesystem::path> data;
    ingest::CsvColumns columns;
    std::vector<preprocess::DatasetSlice> slices;
    tune::CvConfig cv;
    TunerConfig tuner;
    std::map<tune::ModelKind, tune::HyperparamSpace> spaces;
    std::map<tune::ModelKind, tune::HyperparamPoint> fixed;
    std::vector<tune::ModelKind> models{tune::ModelKind::Forest, tune::ModelKind::Lstm};
    std::filesystem::path output_dir = "out";
    std::size_t threads = 1;

    tune::HyperparamSpace space_for(tune::ModelKind kind) const;
    TunerMethod method_for(tune::ModelKind kind) const;
};

/// Thrown with every schema violation found, one per line.
class ConfigError : public Error {
public:
    explicit ConfigError(std::vector<std::string> problems);
    const std::vector<std::string>& problems() const { return problems_; }

private:
    std::vector<std::string> problems_;
};

/// Relative data paths resolve against `base_dir`.
ExperimentConfig parse_config(const nlohmann::json& doc, const std::filesystem::path& base_dir = {});
ExperimentConfig load_config(const std::filesystem::path& path);

}  // namespace idxcast::cli
