#include "idxcast/lstm.hpp"

#include "oracles/finite_diff.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace idxcast;
using namespace idxcast::lstm;

namespace {

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

LstmParams random_params(std::size_t units, std::uint64_t seed, double scale = 0.5) {
    auto p = LstmParams::zeros(units);
    Rng rng(seed);
    p.visit([&](std::span<double> block, bool) {
        for (auto& v : block) v = rng.uniform(-scale, scale);
    });
    return p;
}

WindowedDataset random_batch(std::size_t rows, std::size_t window, std::uint64_t seed) {
    Rng rng(seed);
    WindowedDataset d;
    d.window_size = window;
    d.features = FeatureMatrix(rows, window);
    d.targets.resize(rows);
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < window; ++c) d.features(r, c) = rng.uniform(-1, 1);
        d.targets[r] = rng.uniform(-1, 1);
    }
    return d;
}

WindowedDataset ar1(std::size_t n, double phi) {
    std::vector<double> v(n);
    v[0] = 0.9;
    for (std::size_t t = 1; t < n; ++t) v[t] = phi * v[t - 1];
    return preprocess::make_windows(v, {}, 1);
}

}  // namespace

TEST(LstmStep, ZeroWeightsFixedPoint) {
    const auto p = LstmParams::zeros(3);
    const auto s = lstm_step(p, std::vector<double>{0.7}, LstmState::zero(3));
    EXPECT_EQ(s.h, Eigen::VectorXd::Zero(3));
    EXPECT_EQ(s.c, Eigen::VectorXd::Zero(3));
}

TEST(LstmStep, ScalarHandComputation) {
    auto p = LstmParams::zeros(1);
    p.W[Input](0, 0) = 20.0;
    p.W[Candidate](0, 0) = 20.0;
    p.W[Output](0, 0) = 0.5;
    const auto s = lstm_step(p, std::vector<double>{1.0}, LstmState::zero(1));
    const double c = sigmoid(20.0) * std::tanh(20.0);  // f * 0 + i * g
    EXPECT_DOUBLE_EQ(s.c(0), c);
    EXPECT_DOUBLE_EQ(s.h(0), sigmoid(0.5) * std::tanh(c));
    const auto again = lstm_step(p, std::vector<double>{1.0}, LstmState::zero(1));
    EXPECT_EQ(again.h, s.h);
}

TEST(LstmStep, ShapeMismatch) {
    const auto p = LstmParams::zeros(2);
    EXPECT_THROW(lstm_step(p, std::vector<double>{1.0, 2.0}, LstmState::zero(2)), Error);
}

TEST(Forward, ZeroParamsPredictZero) {
    EXPECT_EQ(forward(LstmParams::zeros(4), std::vector<double>{0.1, 0.2, 0.3}), 0.0);
}

TEST(Forward, MatchesExplicitStepComposition) {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto p = random_params(3, seed);
        const std::vector<double> window{0.3, -0.2, 0.9, 0.1};
        auto s = LstmState::zero(3);
        for (double x : window) s = lstm_step(p, std::vector<double>{x}, s);
        EXPECT_DOUBLE_EQ(forward(p, window), p.w_y.dot(s.h) + p.b_y);
    }
}

TEST(Forward, GatesBounded) {
    const auto p = random_params(4, 3, 3.0);
    ForwardCache cache;
    forward(p, std::vector<double>{1, -1, 0.5, 2, -2}, &cache);
    for (const auto& st : cache.steps) {
        for (Eigen::Index j = 0; j < 4; ++j) {
            EXPECT_GT(st.f(j), 0.0);
            EXPECT_LT(st.f(j), 1.0);
            EXPECT_GT(st.i(j), 0.0);
            EXPECT_LT(st.i(j), 1.0);
            EXPECT_GT(st.o(j), 0.0);
            EXPECT_LT(st.o(j), 1.0);
            EXPECT_GT(st.g(j), -1.0);
            EXPECT_LT(st.g(j), 1.0);
            EXPECT_LT(std::abs(st.tanh_c(j)), 1.0);
        }
    }
}

TEST(Loss, Examples) {
    auto batch = random_batch(4, 2, 1);
    const auto zero = LstmParams::zeros(2);
    double mean_sq = 0.0;
    for (double t : batch.targets) mean_sq += t * t / 4.0;
    EXPECT_DOUBLE_EQ(loss(zero, batch, 1.0, 0.0), mean_sq);

    for (auto& t : batch.targets) t = 0.0;
    EXPECT_EQ(loss(zero, batch, 0.0, 0.0), 0.0);

    // A single weight of 2 on an input with no effect on the head.
    auto p = LstmParams::zeros(1);
    p.W[Forget](0, 0) = 2.0;
    EXPECT_DOUBLE_EQ(loss(p, batch, 0.0, 0.05), 0.2);
}

TEST(Backward, ZeroResidualZeroGradient) {
    auto batch = random_batch(3, 2, 2);
    for (auto& t : batch.targets) t = 0.0;
    const auto g = backward(LstmParams::zeros(2), batch, 0.0, 0.0);
    for (double v : g.flatten()) EXPECT_EQ(v, 0.0);
}

TEST(Backward, L2PenaltyDerivative) {
    auto batch = random_batch(3, 2, 2);
    for (auto& t : batch.targets) t = 0.0;
    auto p = LstmParams::zeros(2);
    p.U[Output](1, 0) = 0.7;  // h stays 0, so this weight only enters the penalty
    const auto g = backward(p, batch, 0.0, 0.3);
    EXPECT_DOUBLE_EQ(g.U[Output](1, 0), 2.0 * 0.3 * 0.7);
}

TEST(Backward, MatchesFiniteDifferences) {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const auto p = random_params(2, seed);
        const auto batch = random_batch(5, 3, seed + 100);
        const double l1 = seed % 2 ? 0.01 : 0.0;
        const double l2 = 0.02;
        const auto analytic = backward(p, batch, l1, l2).flatten();
        const auto numeric = oracle::central_gradient(
            [&](const std::vector<double>& x) {
                auto q = p;
                q.assign(x);
                return loss(q, batch, l1, l2);
            },
            p.flatten(), 1e-5);
        for (std::size_t i = 0; i < analytic.size(); ++i) {
            EXPECT_LT(oracle::relative_error(analytic[i], numeric[i]), 1e-4) << "param " << i;
        }
    }
}

TEST(Params, FlattenAssignRoundTripAndInit) {
    const auto p = LstmParams::initialize(4, 9);
    EXPECT_EQ(p.parameter_count(), 4u * (4 * 1 + 4 * 4 + 4) + 4 + 1);
    auto q = LstmParams::zeros(4);
    q.assign(p.flatten());
    EXPECT_EQ(q, p);
    const double k = 0.5;
    for (std::size_t g = 0; g < kGates; ++g) {
        EXPECT_LE(p.W[g].cwiseAbs().maxCoeff(), k);
        EXPECT_LE(p.U[g].cwiseAbs().maxCoeff(), k);
        EXPECT_EQ(p.b[g], Eigen::VectorXd::Constant(4, g == Forget ? 1.0 : 0.0));
    }
}

TEST(FitLstm, SeedDeterminism) {
    const auto data = random_batch(40, 3, 4);
    LstmConfig c;
    c.window_size = 3;
    c.units = 4;
    c.epochs = 3;
    c.batch_size = 8;
    c.dropout = 0.2;
    c.seed = 17;
    EXPECT_EQ(fit_lstm(data, c).params, fit_lstm(data, c).params);
}

TEST(FitLstm, TinyStepStaysClose) {
    const auto data = random_batch(20, 2, 5);
    LstmConfig c;
    c.window_size = 2;
    c.units = 3;
    c.epochs = 1;
    c.batch_size = 20;
    c.learning_rate = 1e-6;
    c.seed = 2;
    const auto fit = fit_lstm(data, c);
    const auto init = LstmParams::initialize(3, 2).flatten();
    const auto after = fit.params.flatten();
    for (std::size_t i = 0; i < init.size(); ++i) EXPECT_LE(std::abs(after[i] - init[i]), 1.1e-6);
}

TEST(FitLstm, LearnsNoiselessAr1) {
    const auto data = ar1(120, 0.9);
    LstmConfig c;
    c.units = 8;
    c.epochs = 200;
    c.batch_size = 16;
    c.learning_rate = 1e-2;
    c.seed = 1;
    const auto m = fit_lstm(data, c);
    const auto p = predict_lstm(m, data.features);
    double mean = 0.0;
    for (double t : data.targets) mean += t / static_cast<double>(data.size());
    double ss_res = 0, ss_tot = 0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        ss_res += (data.targets[i] - p[i]) * (data.targets[i] - p[i]);
        ss_tot += (data.targets[i] - mean) * (data.targets[i] - mean);
    }
    EXPECT_GE(1.0 - ss_res / ss_tot, 0.95);
}

TEST(FitLstm, EarlyLossNonIncreasing) {
    const auto data = ar1(120, 0.9);
    LstmConfig c;
    c.units = 8;
    c.epochs = 10;
    c.batch_size = 120;
    c.learning_rate = 1e-3;
    c.seed = 1;
    FitTrace trace;
    fit_lstm(data, c, &trace);
    ASSERT_EQ(trace.epoch_losses.size(), 10u);
    for (std::size_t e = 1; e < trace.epoch_losses.size(); ++e) {
        EXPECT_LE(trace.epoch_losses[e], trace.epoch_losses[e - 1]);
    }
}

TEST(FitLstm, L2ShrinksWeights) {
    const auto data = random_batch(64, 3, 6);
    LstmConfig c;
    c.window_size = 3;
    c.units = 4;
    c.epochs = 60;
    c.batch_size = 16;
    c.learning_rate = 1e-2;
    c.seed = 3;
    auto weight_norm = [](const LstmParams& p) {
        double s = 0.0;
        p.visit([&](std::span<const double> block, bool is_weight) {
            if (is_weight) {
                for (double v : block) s += v * v;
            }
        });
        return s;
    };
    const auto free = fit_lstm(data, c);
    c.l2 = 0.5;
    const auto shrunk = fit_lstm(data, c);
    EXPECT_LT(weight_norm(shrunk.params), weight_norm(free.params));
}

TEST(FitLstm, DivergenceDetected) {
    auto data = random_batch(8, 1, 7);
    for (auto& t : data.targets) t = 1e300;
    LstmConfig c;
    c.units = 2;
    c.seed = 1;
    try {
        fit_lstm(data, c);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::DivergenceDetected);
    }
}

TEST(PredictLstm, ZeroParamsAndDefinitional) {
    const auto data = random_batch(6, 3, 8);
    LstmModel zero{{}, LstmParams::zeros(2)};
    zero.config.window_size = 3;
    for (double v : predict_lstm(zero, data.features)) EXPECT_EQ(v, 0.0);
    LstmModel m{zero.config, random_params(2, 4)};
    const auto p = predict_lstm(m, data.features);
    for (std::size_t r = 0; r < data.size(); ++r) EXPECT_EQ(p[r], forward(m.params, data.features.row(r)));
    EXPECT_EQ(predict_lstm(m, data.features), p);
    EXPECT_THROW(predict_lstm(m, std::vector<double>{1.0}), Error);
}

TEST(LstmJson, RoundTripExact) {
    LstmModel m{{}, random_params(3, 11)};
    m.config.window_size = 4;
    m.config.units = 3;
    const auto back = lstm_model_from_json(nlohmann::json::parse(to_json(m).dump()));
    EXPECT_EQ(back.params, m.params);
    EXPECT_EQ(back.config.window_size, 4u);
}

TEST(LstmConfig, Validation) {
    LstmConfig c;
    c.dropout = 1.0;
    EXPECT_THROW(c.validate(), Error);
    c = {};
    c.epochs = 0;
    EXPECT_THROW(c.validate(), Error);
    c = {};
    c.learning_rate = 0;
    EXPECT_THROW(c.validate(), Error);
}
