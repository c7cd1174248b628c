#pragma once

#include "idxcast/common.hpp"
#include "idxcast/preprocess.hpp"

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

namespace idxcast::lstm {

using preprocess::FeatureMatrix;
using preprocess::WindowedDataset;

struct LstmConfig {
    std::size_t window_size = 1;
    std::size_t units = 32;
    std::size_t epochs = 1;
    std::size_t batch_size = 32;
    double l1 = 0.0;
    double l2 = 0.0;
    double dropout = 0.0;
    double learning_rate = 1e-3;
    std::uint64_t seed = 0;

    void validate() const;
};

enum Gate : std::size_t { Forget = 0, Input = 1, Output = 2, Candidate = 3 };
inline constexpr std::size_t kGates = 4;

/// Single-layer LSTM with a scalar linear head.
struct LstmParams {
    std::array<Eigen::MatrixXd, kGates> W;  ///< units x input_size
    std::array<Eigen::MatrixXd, kGates> U;  ///< units x units
    std::array<Eigen::VectorXd, kGates> b;  ///< units
    Eigen::VectorXd w_y;                    ///< units
    double b_y = 0.0;

    static LstmParams zeros(std::size_t units, std::size_t input_size = 1);
    /// uniform(-1/sqrt(units), 1/sqrt(units)) weights, zero biases except a
    /// forget-gate bias of 1.
    static LstmParams initialize(std::size_t units, std::uint64_t seed, std::size_t input_size = 1);

    std::size_t units() const { return static_cast<std::size_t>(w_y.size()); }
    std::size_t input_size() const { return static_cast<std::size_t>(W[0].cols()); }

    /// Calls fn(values, is_weight) for every parameter block in a fixed order.
    /// Biases (gate and head) are the blocks with is_weight == false.
    void visit(const std::function<void(std::span<double>, bool)>& fn);
    void visit(const std::function<void(std::span<const double>, bool)>& fn) const;

    std::size_t parameter_count() const;
    std::vector<double> flatten() const;
    void assign(std::span<const double> flat);

    bool operator==(const LstmParams& other) const { return flatten() == other.flatten(); }
};

struct LstmState {
    Eigen::VectorXd h;
    Eigen::VectorXd c;

    static LstmState zero(std::size_t units);
};

LstmState lstm_step(const LstmParams& params, std::span<const double> x, const LstmState& state);

/// Per-step activations kept for backpropagation.
struct StepCache {
    Eigen::VectorXd x, h_prev, c_prev, f, i, o, g, c, tanh_c;
};

struct ForwardCache {
    std::vector<StepCache> steps;
    Eigen::VectorXd h_out;  ///< h_T after dropout, as fed to the head
    Eigen::VectorXd mask;   ///< empty when no dropout was applied
};

/// Feeds the window one scalar per step from a zero state and returns
/// w_y . (mask * h_T) + b_y. `dropout_mask` is an inverted-dropout mask.
double forward(const LstmParams& params, std::span<const double> window, ForwardCache* cache = nullptr,
               const Eigen::VectorXd* dropout_mask = nullptr);

/// Mean squared error over the batch plus l1 * sum|w| + l2 * sum w^2 over
/// the weight blocks.
double loss(const LstmParams& params, const WindowedDataset& batch, double l1, double l2);

/// Exact BPTT gradient of loss(). The L1 subgradient at 0 is 0.
LstmParams backward(const LstmParams& params, const WindowedDataset& batch, double l1, double l2);

struct LstmModel {
    LstmConfig config;
    LstmParams params;
};

struct FitTrace {
    std::vector<double> epoch_losses;  ///< full-data loss after each epoch
};

/// Chronological mini-batches, Adam updates. Throws DivergenceDetected when
/// the loss turns non-finite.
LstmModel fit_lstm(const WindowedDataset& data, const LstmConfig& config, FitTrace* trace = nullptr);

double predict_lstm(const LstmModel& model, std::span<const double> window);
std::vector<double> predict_lstm(const LstmModel& model, const FeatureMatrix& features);

nlohmann::json to_json(const LstmConfig& config);
LstmConfig lstm_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const LstmModel& model);
LstmModel lstm_model_from_json(const nlohmann::json& j);

}  // namespace idxcast::lstm
